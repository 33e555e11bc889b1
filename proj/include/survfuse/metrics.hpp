#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace survfuse {

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    int replicates = 0;
    std::uint64_t seed = 0;
    double level = 0.95;
};

struct CIndexResult {
    double value = 0.0;
    std::uint64_t concordant = 0;
    std::uint64_t discordant = 0;
    std::uint64_t tied_score = 0;
    std::uint64_t comparable_pairs = 0;
    std::optional<ConfidenceInterval> ci;
};

// Harrell's C. A pair (i, j) is comparable when t_i < t_j and i had the event, or when
// t_i == t_j, i had the event and j is censored. Concordant when r_i > r_j; tied scores
// count one half. O(n log n) via a Fenwick tree over score ranks.
CIndexResult concordance_index(std::span<const double> times, std::span<const std::uint8_t> events,
                               std::span<const double> scores);

enum class ResampleUnit { sample, subject };

struct BootstrapOptions {
    int replicates = 1000;
    std::uint64_t seed = 0;
    double level = 0.95;
    ResampleUnit unit = ResampleUnit::sample;
    int max_redraws = 100;  // per replicate, when a resample has no comparable pair
};

// Percentile interval over `replicates` resamples. Replicate b draws from its own
// stream seeded with seed + b. `clusters` (subject ids) is required for subject mode.
ConfidenceInterval bootstrap_ci(std::span<const double> times, std::span<const std::uint8_t> events,
                                std::span<const double> scores, const BootstrapOptions& options,
                                std::span<const std::string> clusters = {});

// Linear interpolation between order statistics (q in [0, 1]); input need not be sorted.
double percentile(std::vector<double> values, double q);

// "0.6750 (0.6429, 0.7121)"
std::string format_cindex_row(const CIndexResult& result);

nlohmann::ordered_json to_json(const CIndexResult& result);

struct KmCurve {
    std::size_t n_total = 0;
    std::vector<double> times;        // distinct event times
    std::vector<double> survival;     // S(t_k)
    std::vector<std::size_t> at_risk; // n_k
    std::vector<std::size_t> events;  // d_k

    // Right-continuous step function.
    double survival_at(double t) const;
};

// Product-limit estimate. At tied times events are counted before censorings leave
// the risk set.
KmCurve kaplan_meier(std::span<const double> times, std::span<const std::uint8_t> events);

enum class RiskGroup : std::uint8_t { low = 0, high = 1 };

// high <=> score > threshold (strict).
std::vector<RiskGroup> stratify(std::span<const double> scores, double threshold = 0.0);

struct LogRankResult {
    double statistic = 0.0;  // chi-square, 1 df
    double p_value = 1.0;
    double observed_high = 0.0;
    double expected_high = 0.0;
    double variance = 0.0;
};

// Two-group log-rank test with hypergeometric variance. Throws ValidationError when a
// group is empty or there are no events.
LogRankResult log_rank_test(std::span<const RiskGroup> groups, std::span<const double> times,
                            std::span<const std::uint8_t> events);

// "<1e-16" below the floating-point tail limit, otherwise 4 significant digits.
std::string format_p_value(double p);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);
double chi_square_sf(double statistic, double dof);

// Long-format CSV: label,time,survival,n_at_risk,n_events. Each curve starts with a
// time-0 row at survival 1.
std::string km_to_csv(const std::vector<std::pair<std::string, KmCurve>>& curves);
void km_export(const std::vector<std::pair<std::string, KmCurve>>& curves,
               const std::filesystem::path& path);

}  // namespace survfuse
