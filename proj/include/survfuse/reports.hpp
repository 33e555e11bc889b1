#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace survfuse {

enum class Category { indications = 0, findings = 1, impressions = 2, pancreas = 3 };
inline constexpr std::array<Category, 4> kAllCategories{Category::indications, Category::findings,
                                                        Category::impressions, Category::pancreas};
std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view text);
std::string_view placeholder_for(Category c);

struct ReportDocument {
    std::string report_id;
    std::string sample_id;
    std::string raw_text;
};

struct SectionedReport {
    std::string report_id;
    std::string sample_id;
    std::array<std::vector<std::string>, 4> sentences;
    std::array<bool, 4> placeholder{};

    std::vector<std::string>& operator[](Category c) { return sentences[static_cast<std::size_t>(c)]; }
    const std::vector<std::string>& operator[](Category c) const {
        return sentences[static_cast<std::size_t>(c)];
    }
    bool is_placeholder(Category c) const { return placeholder[static_cast<std::size_t>(c)]; }
};

// Report grammar. Patterns are ECMAScript regexes matched case-insensitively per line.
struct ReportConfig {
    std::vector<std::pair<std::string, Category>> headers;
    std::vector<std::string> ignored_headers;   // sections whose text is discarded
    std::vector<std::string> footer_patterns;   // matching line and everything after it dropped
    std::vector<std::string> line_patterns;     // matching lines dropped
    std::vector<std::string> pancreas_stems;
    std::vector<std::string> abbreviations;     // lowercase, with trailing period

    static ReportConfig defaults();
};

ReportConfig report_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ReportConfig& config);

// Non-ASCII transliterated where a one-character ASCII equivalent exists, otherwise
// dropped; footer and code lines removed; whitespace runs collapsed to one space.
std::string clean_report(std::string_view raw, const ReportConfig& config = ReportConfig::defaults());

// Header-driven sectioning and rule-based sentence splitting with per-category exact
// deduplication. Text before the first header belongs to findings.
SectionedReport segment_sections(std::string_view cleaned,
                                 const ReportConfig& config = ReportConfig::defaults());

// Sentences split at '.' or ';' followed by whitespace or end of text, except after
// an allowlisted abbreviation.
std::vector<std::string> split_sentences(std::string_view text,
                                         const std::vector<std::string>& abbreviations);

// Pancreas category becomes every sentence (from the other three, in order) whose
// lowercase form contains a stem. Other categories are left untouched.
SectionedReport extract_pancreas_sentences(SectionedReport report,
                                           const ReportConfig& config = ReportConfig::defaults());

SectionedReport apply_placeholders(SectionedReport report);

// clean -> segment -> pancreas -> placeholders, carrying ids.
SectionedReport process_report(const ReportDocument& doc,
                               const ReportConfig& config = ReportConfig::defaults());

// CSV (report_id,sample_id,text) or JSON lines, chosen by extension (.jsonl/.json).
std::vector<ReportDocument> load_reports(const std::filesystem::path& path);

// One JSON object per line: report_id, sample_id, then the requested categories in
// canonical order.
std::string sentence_bundles_jsonl(const std::vector<SectionedReport>& reports,
                                   const std::vector<Category>& categories);
void export_sentence_bundles(const std::vector<SectionedReport>& reports,
                             const std::vector<Category>& categories,
                             const std::filesystem::path& path);

}  // namespace survfuse
