#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "../oracles.hpp"
#include "survfuse/error.hpp"
#include "survfuse/io.hpp"
#include "survfuse/metrics.hpp"
#include "survfuse/rng.hpp"

using namespace survfuse;

TEST_CASE("C-index extremes") {
    const std::vector<double> t{1, 2, 3, 4, 5};
    const std::vector<std::uint8_t> e{1, 1, 1, 1, 1};
    std::vector<double> r;
    for (double v : t) r.push_back(-v);
    CHECK(concordance_index(t, e, r).value == 1.0);
    const std::vector<double> flat(5, 0.3);
    const auto c = concordance_index(t, e, flat);
    CHECK(c.value == 0.5);
    CHECK(c.tied_score == c.comparable_pairs);
}

TEST_CASE("C-index counts equal the pair enumerator") {
    Rng rng(99);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 2 + rng.below(300);
        const double censoring = rng.uniform(0.0, 0.6);
        std::vector<double> t, r;
        std::vector<std::uint8_t> e;
        for (std::size_t i = 0; i < n; ++i) {
            t.push_back(static_cast<double>(1 + rng.below(40)));
            r.push_back(static_cast<double>(rng.below(25)) / 4.0);
            e.push_back(rng.bernoulli(censoring) ? 0 : 1);
        }
        e[0] = 1;
        t[0] = 0.5;  // guarantees a comparable pair
        const auto got = concordance_index(t, e, r);
        const auto want = oracle::cindex(t, e, r);
        CHECK(got.concordant == want.concordant);
        CHECK(got.discordant == want.discordant);
        CHECK(got.tied_score == want.tied);
        CHECK(got.comparable_pairs == want.comparable);
        CHECK(got.value == want.value());
    }
}

TEST_CASE("C-index without comparable pairs is an error") {
    const std::vector<double> t{1, 2};
    const std::vector<std::uint8_t> e{0, 0};
    const std::vector<double> r{0, 1};
    CHECK_THROWS_AS(concordance_index(t, e, r), ValidationError);
}

TEST_CASE("bootstrap interval") {
    std::vector<double> t, r;
    std::vector<std::uint8_t> e;
    for (int i = 1; i <= 40; ++i) {
        t.push_back(i);
        r.push_back(-i);
        e.push_back(1);
    }
    BootstrapOptions opts;
    opts.replicates = 200;
    opts.seed = 4;
    const auto ci = bootstrap_ci(t, e, r, opts);
    CHECK(ci.lower == 1.0);
    CHECK(ci.upper == 1.0);

    Rng rng(8);
    for (auto& v : r) v += rng.normal() * 20;
    const auto a = bootstrap_ci(t, e, r, opts);
    const auto b = bootstrap_ci(t, e, r, opts);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.lower <= a.upper);
    CHECK(a.replicates == 200);

    opts.replicates = 50;
    CHECK_THROWS_AS(bootstrap_ci(t, e, r, opts), ValidationError);
}

TEST_CASE("subject bootstrap keeps clusters together") {
    std::vector<double> t, r;
    std::vector<std::uint8_t> e;
    std::vector<std::string> subjects;
    for (int i = 0; i < 30; ++i) {
        for (int k = 0; k < 2; ++k) {
            t.push_back(i + 1);
            r.push_back(-i + 0.1 * k);
            e.push_back(1);
            subjects.push_back("P" + std::to_string(i));
        }
    }
    BootstrapOptions opts;
    opts.replicates = 100;
    opts.unit = ResampleUnit::subject;
    const auto ci = bootstrap_ci(t, e, r, opts, subjects);
    CHECK(ci.lower == 1.0);
    CHECK_THROWS_AS(bootstrap_ci(t, e, r, opts), ValidationError);
}

TEST_CASE("percentile interpolates between order statistics") {
    CHECK(percentile({3, 1, 2, 4}, 0.0) == 1.0);
    CHECK(percentile({3, 1, 2, 4}, 1.0) == 4.0);
    CHECK(percentile({3, 1, 2, 4}, 0.5) == 2.5);
    CHECK(percentile({10, 20}, 0.25) == 12.5);
}

TEST_CASE("report row format") {
    CIndexResult r;
    r.value = 0.675;
    r.ci = ConfidenceInterval{0.64291, 0.71209, 1000, 0, 0.95};
    CHECK(format_cindex_row(r) == "0.6750 (0.6429, 0.7121)");
}

TEST_CASE("Kaplan-Meier hand examples") {
    const auto km = kaplan_meier(std::vector<double>{1, 2, 3}, std::vector<std::uint8_t>{1, 1, 0});
    REQUIRE(km.times.size() == 2);
    CHECK(km.survival_at(1) == 2.0 / 3.0);
    CHECK(km.survival_at(2) == 1.0 / 3.0);
    CHECK(km.survival_at(0.5) == 1.0);
    CHECK(km.survival_at(2.9) == 1.0 / 3.0);

    const auto none = kaplan_meier(std::vector<double>{1, 2}, std::vector<std::uint8_t>{0, 0});
    CHECK(none.times.empty());
    CHECK(none.survival_at(100) == 1.0);

    const std::size_t n = 7;
    std::vector<double> t;
    for (std::size_t i = 1; i <= n; ++i) t.push_back(static_cast<double>(i));
    const auto full = kaplan_meier(t, std::vector<std::uint8_t>(n, 1));
    for (std::size_t k = 1; k <= n; ++k) {
        CHECK(full.survival[k - 1] == doctest::Approx(static_cast<double>(n - k) / n).epsilon(1e-15));
    }
}

TEST_CASE("Kaplan-Meier counts events before censorings at a tie") {
    const auto km = kaplan_meier(std::vector<double>{2, 2, 3}, std::vector<std::uint8_t>{1, 0, 1});
    CHECK(km.at_risk[0] == 3);
    CHECK(km.survival_at(2) == 2.0 / 3.0);
    CHECK(km.survival_at(3) == 0.0);
}

TEST_CASE("stratification boundary") {
    const std::vector<double> grid{-1.0, -1e-12, 0.0, -0.0, 1e-12, 1.0};
    const auto g = stratify(grid);
    const std::vector<RiskGroup> want{RiskGroup::low, RiskGroup::low, RiskGroup::low,
                                      RiskGroup::low, RiskGroup::high, RiskGroup::high};
    CHECK(g == want);
}

TEST_CASE("log-rank test") {
    SUBCASE("identical groups give statistic 0 and p = 1") {
        const std::vector<double> t{1, 2, 3, 4, 1, 2, 3, 4};
        const std::vector<std::uint8_t> e{1, 0, 1, 1, 1, 0, 1, 1};
        std::vector<RiskGroup> g(8, RiskGroup::low);
        for (int i = 4; i < 8; ++i) g[i] = RiskGroup::high;
        const auto lr = log_rank_test(g, t, e);
        CHECK(lr.statistic == doctest::Approx(0.0).scale(1e-12));
        CHECK(lr.p_value == doctest::Approx(1.0));
    }
    SUBCASE("label swap is symmetric and matches a hand computation") {
        const std::vector<double> t{1, 2, 3, 4};
        const std::vector<std::uint8_t> e{1, 1, 1, 1};
        const std::vector<RiskGroup> g{RiskGroup::high, RiskGroup::high, RiskGroup::low, RiskGroup::low};
        std::vector<RiskGroup> swapped;
        for (auto x : g) swapped.push_back(x == RiskGroup::high ? RiskGroup::low : RiskGroup::high);
        const auto a = log_rank_test(g, t, e);
        const auto b = log_rank_test(swapped, t, e);
        CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-14));
        CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-14));
        // Event times 1..4 with risk sets (2,2), (1,2), (0,2), (0,1):
        // O - E = (1 - 1/2) + (1 - 1/3) = 7/6; V = 1/4 + 2/9 = 17/36.
        CHECK(a.observed_high - a.expected_high == doctest::Approx(7.0 / 6.0));
        CHECK(a.variance == doctest::Approx(17.0 / 36.0));
        CHECK(a.statistic == doctest::Approx((49.0 / 36.0) / (17.0 / 36.0)));
    }
    SUBCASE("degenerate inputs") {
        const std::vector<double> t{1, 2};
        const std::vector<std::uint8_t> e{1, 1};
        const std::vector<RiskGroup> low{RiskGroup::low, RiskGroup::low};
        CHECK_THROWS_AS(log_rank_test(low, t, e), ValidationError);
    }
}

TEST_CASE("chi-square tail") {
    // Q(1/2, x) = erfc(sqrt(x)); Q(1, x) = exp(-x).
    for (double x : {1e-6, 0.1, 0.5, 1.0, 3.84 / 2, 10.0, 30.0}) {
        CHECK(gamma_q(0.5, x) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-12));
        CHECK(gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
    }
    CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(chi_square_sf(0.0, 1) == 1.0);
    CHECK(format_p_value(0.0) == "<1e-16");
    CHECK(format_p_value(0.012345) == "0.01235");
}

TEST_CASE("KM export") {
    const auto a = kaplan_meier(std::vector<double>{1, 2, 3}, std::vector<std::uint8_t>{1, 1, 0});
    const auto b = kaplan_meier(std::vector<double>{5, 6}, std::vector<std::uint8_t>{0, 0});
    const std::vector<std::pair<std::string, KmCurve>> curves{{"low", b}, {"high", a}};
    const auto csv = km_to_csv(curves);
    CHECK(csv.rfind("label,time,survival,n_at_risk,n_events\n", 0) == 0);
    CHECK(csv.find("low,0,1,2,0\n") != std::string::npos);
    CHECK(csv.find("high,0,1,3,0\n") != std::string::npos);
    const auto table = io::parse_csv(csv);
    for (const auto& row : table.rows) {
        if (row[0] == "low") CHECK(row[2] == "1");
    }

    const auto dir = std::filesystem::temp_directory_path() / "survfuse_km_test";
    std::filesystem::remove_all(dir);
    km_export(curves, dir / "km.csv");
    const auto first = io::read_text(dir / "km.csv");
    km_export(curves, dir / "km.csv");
    CHECK(io::read_text(dir / "km.csv") == first);
    CHECK(first == csv);
    std::filesystem::remove_all(dir);
}
