// Slow, obviously-correct reference implementations shared by the unit and
// acceptance tests. Nothing here calls into the library under test.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// Direct O(n^2) Breslow NPLL: -(1/E) sum_i e_i [r_i - log sum_{t_j >= t_i} exp(r_j)].
inline double npll(const std::vector<double>& r, const std::vector<double>& t,
                   const std::vector<std::uint8_t>& e) {
    double total = 0.0;
    int events = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!e[i]) continue;
        long double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (t[j] >= t[i]) s += std::exp(static_cast<long double>(r[j]));
        }
        total += r[i] - static_cast<double>(std::log(s));
        ++events;
    }
    return -total / events;
}

struct PairCounts {
    std::uint64_t concordant = 0, discordant = 0, tied = 0, comparable = 0;
    double value() const { return (concordant + 0.5 * tied) / static_cast<double>(comparable); }
};

// Every ordered pair checked explicitly.
inline PairCounts cindex(const std::vector<double>& t, const std::vector<std::uint8_t>& e,
                         const std::vector<double>& r) {
    PairCounts c;
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !e[i]) continue;
            const bool comparable = t[i] < t[j] || (t[i] == t[j] && !e[j]);
            if (!comparable) continue;
            ++c.comparable;
            if (r[i] > r[j]) {
                ++c.concordant;
            } else if (r[i] < r[j]) {
                ++c.discordant;
            } else {
                ++c.tied;
            }
        }
    }
    return c;
}

// Central differences of f around x, one coordinate at a time.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double saved = x[k];
        x[k] = saved + h;
        const double up = f(x);
        x[k] = saved - h;
        const double down = f(x);
        x[k] = saved;
        g[k] = (up - down) / (2.0 * h);
    }
    return g;
}

// ||a - b|| / ||b|| in the Euclidean norm.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        diff += (a[k] - b[k]) * (a[k] - b[k]);
        norm += b[k] * b[k];
    }
    if (norm == 0.0) return std::sqrt(diff);
    return std::sqrt(diff / norm);
}

// Pearson correlation straight from the textbook sums.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0 || sbb == 0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
