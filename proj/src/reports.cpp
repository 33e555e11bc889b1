#include "survfuse/reports.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "survfuse/error.hpp"
#include "survfuse/io.hpp"

namespace survfuse {

std::string_view to_string(Category c) {
    switch (c) {
        case Category::indications: return "indications";
        case Category::findings: return "findings";
        case Category::impressions: return "impressions";
        case Category::pancreas: return "pancreas";
    }
    return "?";
}

std::optional<Category> parse_category(std::string_view text) {
    const auto t = io::to_lower(io::trim(text));
    for (auto c : kAllCategories) {
        if (t == to_string(c)) return c;
    }
    return std::nullopt;
}

std::string_view placeholder_for(Category c) {
    switch (c) {
        case Category::indications: return "No recorded indications.";
        case Category::findings: return "No significant findings noted.";
        case Category::impressions: return "No impressions recorded.";
        case Category::pancreas: return "No pancreatic findings noted.";
    }
    return "";
}

ReportConfig ReportConfig::defaults() {
    ReportConfig c;
    c.headers = {{"CLINICAL INDICATIONS", Category::indications},
                 {"CLINICAL INDICATION", Category::indications},
                 {"INDICATIONS", Category::indications},
                 {"INDICATION", Category::indications},
                 {"CLINICAL HISTORY", Category::indications},
                 {"HISTORY", Category::indications},
                 {"FINDINGS", Category::findings},
                 {"IMPRESSIONS", Category::impressions},
                 {"IMPRESSION", Category::impressions}};
    c.ignored_headers = {"TECHNIQUE", "COMPARISON", "COMPARISONS", "EXAMINATION", "EXAM",
                         "PROCEDURE"};
    c.footer_patterns = {R"(^\s*electronically signed\b)", R"(^\s*signed by\b)",
                         R"(^\s*dictated by\b)", R"(^\s*transcribed by\b)"};
    c.line_patterns = {
        R"(^\s*\d{1,2}/\d{1,2}/\d{2,4}(\s+\d{1,2}:\d{2}(:\d{2})?(\s*[ap]m)?)?\s*$)",
        R"(^\s*(cpt|icd(-?(9|10))?(-cm)?)\b.*$)"};
    c.pancreas_stems = {"pancrea"};
    c.abbreviations = {"dr.", "cm.", "e.g.", "vs.", "i.e."};
    return c;
}

ReportConfig report_config_from_json(const nlohmann::json& j) {
    ReportConfig c = ReportConfig::defaults();
    if (j.contains("headers")) {
        c.headers.clear();
        for (const auto& [header, cat] : j.at("headers").items()) {
            auto parsed = parse_category(cat.get<std::string>());
            if (!parsed || *parsed == Category::pancreas) {
                throw ValidationError("header " + header + " maps to an unknown section");
            }
            c.headers.emplace_back(header, *parsed);
        }
    }
    auto list = [&](const char* key, std::vector<std::string>& dst) {
        if (j.contains(key)) dst = j.at(key).get<std::vector<std::string>>();
    };
    list("ignored_headers", c.ignored_headers);
    list("footer_patterns", c.footer_patterns);
    list("line_patterns", c.line_patterns);
    list("pancreas_stems", c.pancreas_stems);
    list("abbreviations", c.abbreviations);
    for (auto& a : c.abbreviations) a = io::to_lower(a);
    for (auto& s : c.pancreas_stems) s = io::to_lower(s);
    return c;
}

nlohmann::ordered_json to_json(const ReportConfig& c) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json headers;
    for (const auto& [h, cat] : c.headers) headers[h] = to_string(cat);
    j["headers"] = headers;
    j["ignored_headers"] = c.ignored_headers;
    j["footer_patterns"] = c.footer_patterns;
    j["line_patterns"] = c.line_patterns;
    j["pancreas_stems"] = c.pancreas_stems;
    j["abbreviations"] = c.abbreviations;
    return j;
}

namespace {

// One-character ASCII stand-ins for common non-ASCII code points; 0 means drop.
char transliterate(char32_t cp) {
    switch (cp) {
        case 0x00A0: case 0x2002: case 0x2003: case 0x2004: case 0x2005: case 0x2006:
        case 0x2007: case 0x2008: case 0x2009: case 0x200A: case 0x202F: case 0x3000:
            return ' ';
        case 0x2018: case 0x2019: case 0x201A: case 0x2032: return '\'';
        case 0x201C: case 0x201D: case 0x201E: case 0x2033: return '"';
        case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014: case 0x2212: return '-';
        case 0x2022: case 0x00B7: return '-';
        case 0x00D7: return 'x';
        case 0x00B5: case 0x03BC: return 'u';
        default: break;
    }
    if (cp >= 0x00C0 && cp <= 0x00FF) {
        static constexpr char kLatin1[] =
            "AAAAAAACEEEEIIII"   // C0-CF
            "DNOOOOO\0OUUUUYTs"  // D0-DF
            "aaaaaaaceeeeiiii"   // E0-EF
            "dnooooo\0ouuuuyty"; // F0-FF
        return kLatin1[cp - 0x00C0];
    }
    return 0;
}

// Decodes UTF-8, keeps ASCII, transliterates or drops the rest. Malformed bytes are dropped.
std::string to_ascii(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        const auto b = static_cast<unsigned char>(in[i]);
        if (b < 0x80) {
            if (b >= 0x20 || b == '\n' || b == '\t' || b == '\r') out.push_back(static_cast<char>(b));
            ++i;
            continue;
        }
        std::size_t len = 0;
        char32_t cp = 0;
        if ((b & 0xE0) == 0xC0) {
            len = 2;
            cp = b & 0x1F;
        } else if ((b & 0xF0) == 0xE0) {
            len = 3;
            cp = b & 0x0F;
        } else if ((b & 0xF8) == 0xF0) {
            len = 4;
            cp = b & 0x07;
        } else {
            ++i;
            continue;
        }
        bool ok = i + len <= in.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto cont = static_cast<unsigned char>(in[i + k]);
            if ((cont & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (cont & 0x3F);
        }
        if (!ok) {
            ++i;
            continue;
        }
        if (char c = transliterate(cp)) out.push_back(c);
        i += len;
    }
    return out;
}

std::vector<std::regex> compile(const std::vector<std::string>& patterns) {
    std::vector<std::regex> out;
    for (const auto& p : patterns) {
        try {
            out.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error&) {
            throw ValidationError("invalid pattern: " + p);
        }
    }
    return out;
}

bool any_match(const std::vector<std::regex>& patterns, const std::string& line) {
    return std::any_of(patterns.begin(), patterns.end(),
                       [&](const std::regex& re) { return std::regex_search(line, re); });
}

std::string escape_regex(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::string_view(R"(\^$.|?*+()[]{})").find(c) != std::string_view::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

bool has_alnum(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
}

void push_unique(std::vector<std::string>& list, std::string sentence) {
    if (std::find(list.begin(), list.end(), sentence) == list.end()) list.push_back(std::move(sentence));
}

}  // namespace

std::string clean_report(std::string_view raw, const ReportConfig& config) {
    const std::string ascii = to_ascii(raw);
    const auto footers = compile(config.footer_patterns);
    const auto drops = compile(config.line_patterns);

    std::string kept;
    std::size_t start = 0;
    while (start <= ascii.size()) {
        auto end = ascii.find('\n', start);
        if (end == std::string::npos) end = ascii.size();
        std::string line = ascii.substr(start, end - start);
        if (any_match(footers, line)) break;
        if (!any_match(drops, line)) {
            kept += line;
            kept += ' ';
        }
        start = end + 1;
    }

    std::string out;
    out.reserve(kept.size());
    bool pending_space = false;
    for (char c : kept) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view text,
                                         const std::vector<std::string>& abbreviations) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto emit = [&](std::size_t end) {
        auto s = io::trim(text.substr(start, end - start));
        if (has_alnum(s)) out.emplace_back(s);
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != ';') continue;
        const bool at_boundary =
            i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
        if (!at_boundary) continue;
        if (c == '.') {
            std::size_t w = i;
            while (w > 0 && !std::isspace(static_cast<unsigned char>(text[w - 1]))) --w;
            std::string word = io::to_lower(text.substr(w, i + 1 - w));
            const auto first = word.find_first_not_of("([\"'");
            word = first == std::string::npos ? std::string() : word.substr(first);
            if (std::find(abbreviations.begin(), abbreviations.end(), word) != abbreviations.end()) {
                continue;
            }
        }
        emit(i + 1);
    }
    if (start < text.size()) emit(text.size());
    return out;
}

SectionedReport segment_sections(std::string_view cleaned, const ReportConfig& config) {
    // Longest header first so "CLINICAL INDICATION" wins over "INDICATION".
    std::vector<std::pair<std::string, std::optional<Category>>> lexicon;
    for (const auto& [h, cat] : config.headers) lexicon.emplace_back(io::to_lower(h), cat);
    for (const auto& h : config.ignored_headers) lexicon.emplace_back(io::to_lower(h), std::nullopt);
    std::stable_sort(lexicon.begin(), lexicon.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });

    SectionedReport report;
    const std::string text(cleaned);
    std::optional<Category> current = Category::findings;
    auto add_text = [&](std::string_view body) {
        if (!current) return;
        for (auto& s : split_sentences(body, config.abbreviations)) push_unique(report[*current], std::move(s));
    };

    if (lexicon.empty()) {
        add_text(text);
        return report;
    }
    std::string alternation;
    for (const auto& [h, cat] : lexicon) {
        if (!alternation.empty()) alternation += '|';
        alternation += escape_regex(h);
    }
    const std::regex header_re("\\b(" + alternation + ")\\s*:", std::regex::ECMAScript | std::regex::icase);

    std::size_t pos = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), header_re); it != std::sregex_iterator();
         ++it) {
        const auto& m = *it;
        add_text(std::string_view(text).substr(pos, static_cast<std::size_t>(m.position()) - pos));
        const auto name = io::to_lower(m.str(1));
        current = Category::findings;
        for (const auto& [h, cat] : lexicon) {
            if (h == name) {
                current = cat;
                break;
            }
        }
        pos = static_cast<std::size_t>(m.position() + m.length());
    }
    add_text(std::string_view(text).substr(pos));
    return report;
}

SectionedReport extract_pancreas_sentences(SectionedReport report, const ReportConfig& config) {
    std::vector<std::string> hits;
    for (auto c : {Category::indications, Category::findings, Category::impressions}) {
        if (report.is_placeholder(c)) continue;
        for (const auto& s : report[c]) {
            const auto lower = io::to_lower(s);
            const bool match = std::any_of(config.pancreas_stems.begin(), config.pancreas_stems.end(),
                                           [&](const std::string& stem) {
                                               return lower.find(stem) != std::string::npos;
                                           });
            if (match) push_unique(hits, s);
        }
    }
    report[Category::pancreas] = std::move(hits);
    report.placeholder[static_cast<std::size_t>(Category::pancreas)] = false;
    return report;
}

SectionedReport apply_placeholders(SectionedReport report) {
    for (auto c : kAllCategories) {
        if (report[c].empty()) {
            report[c].emplace_back(placeholder_for(c));
            report.placeholder[static_cast<std::size_t>(c)] = true;
        }
    }
    return report;
}

SectionedReport process_report(const ReportDocument& doc, const ReportConfig& config) {
    auto sectioned = segment_sections(clean_report(doc.raw_text, config), config);
    sectioned.report_id = doc.report_id;
    sectioned.sample_id = doc.sample_id;
    return apply_placeholders(extract_pancreas_sentences(std::move(sectioned), config));
}

std::vector<ReportDocument> load_reports(const std::filesystem::path& path) {
    const auto text = io::read_text(path);
    std::vector<ReportDocument> docs;
    const auto ext = io::to_lower(path.extension().string());
    if (ext == ".jsonl" || ext == ".json") {
        std::size_t start = 0;
        std::size_t line_no = 0;
        while (start < text.size()) {
            auto end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            ++line_no;
            const auto line = io::trim(std::string_view(text).substr(start, end - start));
            start = end + 1;
            if (line.empty()) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                docs.push_back({j.at("report_id").get<std::string>(), j.at("sample_id").get<std::string>(),
                                j.at("text").get<std::string>()});
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError("malformed report at line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    } else {
        const auto csv = io::parse_csv(text);
        auto col = [&](std::string_view name) -> std::size_t {
            for (std::size_t j = 0; j < csv.header.size(); ++j) {
                if (io::trim(csv.header[j]) == name) return j;
            }
            throw ValidationError("report file missing column " + std::string(name));
        };
        if (csv.header.empty()) throw ValidationError("report file is empty");
        const auto rid = col("report_id"), sid = col("sample_id"), txt = col("text");
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            if (row.size() != csv.header.size()) {
                throw ValidationError("wrong field count at row " + std::to_string(i + 1));
            }
            docs.push_back({row[rid], row[sid], row[txt]});
        }
    }
    if (docs.empty()) throw ValidationError("no reports in " + path.string());
    return docs;
}

std::string sentence_bundles_jsonl(const std::vector<SectionedReport>& reports,
                                   const std::vector<Category>& categories) {
    if (categories.empty()) throw ValidationError("no categories selected for export");
    std::string out;
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["report_id"] = r.report_id;
        j["sample_id"] = r.sample_id;
        for (auto c : kAllCategories) {
            if (std::find(categories.begin(), categories.end(), c) != categories.end()) {
                j[std::string(to_string(c))] = r[c];
            }
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

void export_sentence_bundles(const std::vector<SectionedReport>& reports,
                             const std::vector<Category>& categories,
                             const std::filesystem::path& path) {
    io::write_atomic(path, sentence_bundles_jsonl(reports, categories));
}

}  // namespace survfuse
