#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace survfuse {

enum class Site { internal_a, internal_b, external };

std::string_view to_string(Site site);
std::optional<Site> parse_site(std::string_view text);

// One scan-level observation.
struct SurvivalRecord {
    std::string subject_id;
    std::string sample_id;
    double time_months = 0.0;      // after horizon censoring
    bool event = false;            // diagnosis observed within the horizon
    Site site = Site::internal_a;
    double raw_time_months = 0.0;  // before horizon censoring
    bool event_observed = true;    // a diagnosis was ever recorded at raw_time_months
};

class Cohort {
public:
    Cohort() = default;
    // Validates: positive times, unique sample ids, consistent subject per sample,
    // and that the censored fields are consistent with the horizon.
    Cohort(std::vector<SurvivalRecord> records, double horizon_months);

    const std::vector<SurvivalRecord>& records() const { return records_; }
    double horizon_months() const { return horizon_months_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    // Fraction of records with event == false.
    double censorship_rate() const;
    std::vector<double> times() const;
    std::vector<std::uint8_t> events() const;  // 1 = event
    std::vector<std::string> sample_ids() const;
    std::optional<std::size_t> index_of(std::string_view sample_id) const;

    // Restricts to the given sample ids, in the given order.
    Cohort subset(const std::vector<std::string>& sample_ids) const;

private:
    std::vector<SurvivalRecord> records_;
    double horizon_months_ = 60.0;
    std::map<std::string, std::size_t, std::less<>> index_;
};

struct RowError {
    std::size_t row = 0;  // 1-based data row (header excluded)
    std::string message;
};

struct CohortLoad {
    Cohort cohort;
    std::vector<RowError> rejected;
    std::vector<std::string> warnings;
};

// Strict loader: throws ValidationError listing every failing row.
Cohort load_cohort(const std::filesystem::path& path, double horizon_months = 60.0);

// Lenient loader: failing rows are dropped and reported; subjects left without any
// usable sample are reported in warnings.
CohortLoad load_cohort_lenient(const std::filesystem::path& path, double horizon_months = 60.0);
CohortLoad parse_cohort_csv(std::string_view text, double horizon_months, bool strict);

std::string cohort_to_csv(const Cohort& cohort);

// Raw time beyond the horizon becomes (horizon, censored); otherwise the raw time is
// kept and the event is whatever was recorded (a boundary time equal to the horizon
// is still an event).
Cohort apply_horizon_censoring(const Cohort& cohort, double horizon_months);

enum class Split { train, validation, test };
std::string_view to_string(Split split);

struct SplitAssignment {
    std::map<std::string, Split> by_subject;

    Split of_subject(const std::string& subject_id) const;
    // Sample ids of the cohort that fall in the split, in cohort order.
    std::vector<std::string> samples(const Cohort& cohort, Split split) const;
    std::vector<std::size_t> indices(const Cohort& cohort, Split split) const;
    std::size_t subject_count(Split split) const;
};

// Every subject with a sample from external_site goes to test. Remaining subjects,
// sorted by id and shuffled with the seeded stream, give floor(ratio * N) subjects
// to train and the rest to validation.
SplitAssignment split_by_subject(const Cohort& cohort, double ratio, std::uint64_t seed,
                                 std::optional<Site> external_site);

}  // namespace survfuse
