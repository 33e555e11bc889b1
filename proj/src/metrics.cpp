#include "survfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include "survfuse/error.hpp"
#include "survfuse/io.hpp"
#include "survfuse/rng.hpp"

namespace survfuse {

namespace {

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }
    // Count of inserted ranks < i.
    std::uint64_t prefix(std::size_t i) const {
        std::uint64_t s = 0;
        for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::uint64_t> tree_;
};

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
    if (a != b || a != c) throw ValidationError("times, events and scores differ in length");
}

}  // namespace

CIndexResult concordance_index(std::span<const double> times, std::span<const std::uint8_t> events,
                               std::span<const double> scores) {
    check_lengths(times.size(), events.size(), scores.size());
    const std::size_t n = times.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(scores[i]) || std::isnan(times[i])) {
            throw ValidationError("NaN in C-index input");
        }
    }

    std::vector<double> distinct(scores.begin(), scores.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        rank[i] = static_cast<std::size_t>(
            std::lower_bound(distinct.begin(), distinct.end(), scores[i]) - distinct.begin());
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return times[a] > times[b] || (times[a] == times[b] && a < b);
    });

    // Walk distinct times from latest to earliest. When an event at time t is queried
    // the tree holds every sample with a later time plus the censored samples at t.
    Fenwick tree(distinct.size());
    std::uint64_t inserted = 0;
    CIndexResult result;
    std::size_t k = 0;
    while (k < n) {
        std::size_t end = k;
        while (end < n && times[order[end]] == times[order[k]]) ++end;
        for (std::size_t m = k; m < end; ++m) {
            if (!events[order[m]]) {
                tree.add(rank[order[m]]);
                ++inserted;
            }
        }
        for (std::size_t m = k; m < end; ++m) {
            const auto i = order[m];
            if (!events[i]) continue;
            const auto below = tree.prefix(rank[i]);
            const auto at_or_below = tree.prefix(rank[i] + 1);
            result.concordant += below;
            result.tied_score += at_or_below - below;
            result.discordant += inserted - at_or_below;
        }
        for (std::size_t m = k; m < end; ++m) {
            if (events[order[m]]) {
                tree.add(rank[order[m]]);
                ++inserted;
            }
        }
        k = end;
    }
    result.comparable_pairs = result.concordant + result.discordant + result.tied_score;
    if (result.comparable_pairs == 0) throw ValidationError("no comparable pairs");
    result.value = (static_cast<double>(result.concordant) +
                    0.5 * static_cast<double>(result.tied_score)) /
                   static_cast<double>(result.comparable_pairs);
    return result;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ConfidenceInterval bootstrap_ci(std::span<const double> times, std::span<const std::uint8_t> events,
                                std::span<const double> scores, const BootstrapOptions& options,
                                std::span<const std::string> clusters) {
    check_lengths(times.size(), events.size(), scores.size());
    if (options.replicates < 100) throw ValidationError("bootstrap needs at least 100 replicates");
    if (!(options.level > 0.0 && options.level < 1.0)) {
        throw ValidationError("confidence level must lie in (0, 1)");
    }
    const std::size_t n = times.size();
    if (n == 0) throw ValidationError("bootstrap of an empty sample");

    std::vector<std::vector<std::size_t>> members;
    if (options.unit == ResampleUnit::subject) {
        if (clusters.size() != n) throw ValidationError("subject resampling needs one id per sample");
        std::map<std::string, std::size_t> id_of;
        for (std::size_t i = 0; i < n; ++i) {
            auto [it, fresh] = id_of.emplace(clusters[i], members.size());
            if (fresh) members.emplace_back();
            members[it->second].push_back(i);
        }
    }

    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(options.replicates));
    std::vector<double> bt, bs;
    std::vector<std::uint8_t> be;
    for (int b = 0; b < options.replicates; ++b) {
        Rng rng(options.seed + static_cast<std::uint64_t>(b));
        bool done = false;
        for (int attempt = 0; attempt <= options.max_redraws && !done; ++attempt) {
            bt.clear();
            be.clear();
            bs.clear();
            auto take = [&](std::size_t i) {
                bt.push_back(times[i]);
                be.push_back(events[i]);
                bs.push_back(scores[i]);
            };
            if (options.unit == ResampleUnit::sample) {
                for (std::size_t k = 0; k < n; ++k) take(static_cast<std::size_t>(rng.below(n)));
            } else {
                for (std::size_t k = 0; k < members.size(); ++k) {
                    for (auto i : members[static_cast<std::size_t>(rng.below(members.size()))]) take(i);
                }
            }
            try {
                stats.push_back(concordance_index(bt, be, bs).value);
                done = true;
            } catch (const ValidationError&) {
                // no comparable pair in this resample; redraw from the same stream
            }
        }
        if (!done) {
            throw RuntimeFailure("bootstrap: replicate " + std::to_string(b) +
                                 " never produced a comparable pair");
        }
    }
    const double tail = (1.0 - options.level) / 2.0;
    ConfidenceInterval ci;
    ci.lower = percentile(stats, tail);
    ci.upper = percentile(stats, 1.0 - tail);
    ci.replicates = options.replicates;
    ci.seed = options.seed;
    ci.level = options.level;
    return ci;
}

std::string format_cindex_row(const CIndexResult& result) {
    char buf[96];
    if (result.ci) {
        std::snprintf(buf, sizeof(buf), "%.4f (%.4f, %.4f)", result.value, result.ci->lower,
                      result.ci->upper);
    } else {
        std::snprintf(buf, sizeof(buf), "%.4f", result.value);
    }
    return buf;
}

nlohmann::ordered_json to_json(const CIndexResult& result) {
    nlohmann::ordered_json j;
    j["value"] = result.value;
    j["concordant"] = result.concordant;
    j["discordant"] = result.discordant;
    j["tied"] = result.tied_score;
    j["pairs"] = result.comparable_pairs;
    if (result.ci) {
        j["ci"] = {{"lower", result.ci->lower},
                   {"upper", result.ci->upper},
                   {"B", result.ci->replicates},
                   {"seed", result.ci->seed},
                   {"level", result.ci->level}};
    } else {
        j["ci"] = nullptr;
    }
    return j;
}

double KmCurve::survival_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

KmCurve kaplan_meier(std::span<const double> times, std::span<const std::uint8_t> events) {
    if (times.size() != events.size()) throw ValidationError("times and events differ in length");
    if (times.empty()) throw ValidationError("Kaplan-Meier of an empty sample");
    const std::size_t n = times.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    KmCurve curve;
    curve.n_total = n;
    double s = 1.0;
    std::size_t at_risk = n;
    std::size_t k = 0;
    while (k < n) {
        std::size_t end = k;
        std::size_t d = 0;
        while (end < n && times[order[end]] == times[order[k]]) {
            d += events[order[end]] ? 1 : 0;
            ++end;
        }
        if (d > 0) {
            s *= static_cast<double>(at_risk - d) / static_cast<double>(at_risk);
            curve.times.push_back(times[order[k]]);
            curve.survival.push_back(s);
            curve.at_risk.push_back(at_risk);
            curve.events.push_back(d);
        }
        at_risk -= end - k;
        k = end;
    }
    return curve;
}

std::vector<RiskGroup> stratify(std::span<const double> scores, double threshold) {
    std::vector<RiskGroup> groups;
    groups.reserve(scores.size());
    for (double s : scores) {
        if (!std::isfinite(s)) throw ValidationError("non-finite risk score");
        groups.push_back(s > threshold ? RiskGroup::high : RiskGroup::low);
    }
    return groups;
}

LogRankResult log_rank_test(std::span<const RiskGroup> groups, std::span<const double> times,
                            std::span<const std::uint8_t> events) {
    check_lengths(groups.size(), times.size(), events.size());
    const std::size_t n = times.size();
    std::size_t n_high = 0;
    std::size_t total_events = 0;
    for (std::size_t i = 0; i < n; ++i) {
        n_high += groups[i] == RiskGroup::high ? 1 : 0;
        total_events += events[i] ? 1 : 0;
    }
    if (n_high == 0 || n_high == n) throw ValidationError("log-rank test: empty group");
    if (total_events == 0) throw ValidationError("log-rank test: no events");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    LogRankResult result;
    double at_risk = static_cast<double>(n);
    double at_risk_high = static_cast<double>(n_high);
    std::size_t k = 0;
    while (k < n) {
        std::size_t end = k;
        double d = 0.0, d_high = 0.0, leaving_high = 0.0;
        while (end < n && times[order[end]] == times[order[k]]) {
            const auto i = order[end];
            const bool high = groups[i] == RiskGroup::high;
            if (events[i]) {
                d += 1.0;
                if (high) d_high += 1.0;
            }
            if (high) leaving_high += 1.0;
            ++end;
        }
        if (d > 0.0) {
            result.observed_high += d_high;
            result.expected_high += d * at_risk_high / at_risk;
            if (at_risk > 1.0) {
                const double at_risk_low = at_risk - at_risk_high;
                result.variance += at_risk_high * at_risk_low * d * (at_risk - d) /
                                   (at_risk * at_risk * (at_risk - 1.0));
            }
        }
        at_risk -= static_cast<double>(end - k);
        at_risk_high -= leaving_high;
        k = end;
    }
    if (result.variance > 0.0) {
        const double diff = result.observed_high - result.expected_high;
        result.statistic = diff * diff / result.variance;
    }
    result.p_value = chi_square_sf(result.statistic, 1.0);
    return result;
}

std::string format_p_value(double p) {
    if (p < 1e-16) return "<1e-16";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", p);
    return buf;
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) throw ValidationError("gamma_q: invalid argument");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    if (x < a + 1.0) {
        // Series for P(a, x).
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int n = 0; n < kMaxIter; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * kEps) break;
        }
        return std::max(0.0, 1.0 - sum * std::exp(log_prefactor));
    }
    // Modified Lentz continued fraction for Q(a, x).
    constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::exp(log_prefactor) * h;
}

double chi_square_sf(double statistic, double dof) {
    if (statistic <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * statistic);
}

std::string km_to_csv(const std::vector<std::pair<std::string, KmCurve>>& curves) {
    std::string out = "label,time,survival,n_at_risk,n_events\n";
    for (const auto& [label, curve] : curves) {
        const auto lab = io::csv_escape(label);
        out += lab + ",0,1," + std::to_string(curve.n_total) + ",0\n";
        for (std::size_t k = 0; k < curve.times.size(); ++k) {
            out += lab;
            out += ',';
            out += io::format_double(curve.times[k]);
            out += ',';
            out += io::format_double(curve.survival[k]);
            out += ',';
            out += std::to_string(curve.at_risk[k]);
            out += ',';
            out += std::to_string(curve.events[k]);
            out += '\n';
        }
    }
    return out;
}

void km_export(const std::vector<std::pair<std::string, KmCurve>>& curves,
               const std::filesystem::path& path) {
    if (curves.empty()) throw ValidationError("no curves to export");
    io::write_atomic(path, km_to_csv(curves));
}

}  // namespace survfuse
