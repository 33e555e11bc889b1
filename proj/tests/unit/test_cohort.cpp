#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "survfuse/cohort.hpp"
#include "survfuse/error.hpp"
#include "survfuse/io.hpp"

using namespace survfuse;

namespace {

const char* kHeader = "subject_id,sample_id,site,raw_time_months,event_observed\n";

Cohort cohort_of(const std::string& body, double horizon = 60.0) {
    return parse_cohort_csv(std::string(kHeader) + body, horizon, true).cohort;
}

SurvivalRecord raw(double t, bool observed) {
    SurvivalRecord r;
    r.subject_id = "p";
    r.sample_id = "s";
    r.raw_time_months = t;
    r.event_observed = observed;
    r.time_months = std::min(t, 1000.0);
    r.event = false;
    return r;
}

}  // namespace

TEST_CASE("cohort loading") {
    const auto c = cohort_of("p1,s1,internal_a,12.5,1\np2,s2,internal_b,80,1\np3,s3,external,30,0\n");
    REQUIRE(c.size() == 3);
    CHECK(c.records()[0].time_months == 12.5);
    CHECK(c.records()[0].event);
    CHECK(c.records()[1].time_months == 60.0);
    CHECK_FALSE(c.records()[1].event);
    CHECK(c.records()[2].site == Site::external);
    CHECK(c.censorship_rate() == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_WITH_AS(cohort_of("p1,s1,internal_a,5,1\np2,s2,internal_a,0,1\n"),
                         doctest::Contains("non-positive time at row 2"), ValidationError);
    CHECK_THROWS_WITH_AS(cohort_of("p1,s1,internal_a,5,1\np2,s1,internal_a,6,1\n"),
                         doctest::Contains("duplicate sample_id"), ValidationError);
    CHECK_THROWS_WITH_AS(cohort_of("p1,s1,internal_a,five,1\n"), doctest::Contains("row 1"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_cohort_csv("subject_id,sample_id,site,event_observed\np,s,internal_a,1\n", 60, true),
                         doctest::Contains("missing column raw_time_months"), ValidationError);
    CHECK_THROWS_AS(cohort_of("p1,s1,nowhere,5,1\n"), ValidationError);
}

TEST_CASE("lenient loading drops bad rows and reports empty subjects") {
    const auto load = parse_cohort_csv(std::string(kHeader) + "p1,s1,internal_a,5,1\np2,s2,internal_a,-1,1\n", 60, false);
    CHECK(load.cohort.size() == 1);
    REQUIRE(load.rejected.size() == 1);
    CHECK(load.rejected[0].row == 2);
    CHECK(load.warnings.size() == 1);
}

TEST_CASE("cohort file round trip") {
    const auto c = cohort_of("p1,s1,internal_a,12.5,1\np1,s2,internal_a,13.25,0\n");
    const auto path = std::filesystem::temp_directory_path() / "survfuse_cohort_test.csv";
    io::write_atomic(path, cohort_to_csv(c));
    const auto back = load_cohort(path);
    CHECK(back.size() == 2);
    CHECK(back.records()[1].raw_time_months == 13.25);
    std::filesystem::remove(path);
}

TEST_CASE("horizon censoring") {
    std::vector<SurvivalRecord> recs{raw(44.5, true), raw(60.0, true), raw(72.0, true), raw(90.0, false)};
    for (std::size_t i = 0; i < recs.size(); ++i) recs[i].sample_id = "s" + std::to_string(i);
    const auto h = apply_horizon_censoring(Cohort(recs, 1000.0), 60.0);
    CHECK(h.records()[0].time_months == 44.5);
    CHECK(h.records()[0].event);
    CHECK(h.records()[1].time_months == 60.0);
    CHECK(h.records()[1].event);
    CHECK(h.records()[2].time_months == 60.0);
    CHECK_FALSE(h.records()[2].event);
    CHECK(h.censorship_rate() == 0.5);

    const auto twice = apply_horizon_censoring(h, 60.0);
    for (std::size_t i = 0; i < h.size(); ++i) {
        CHECK(twice.records()[i].time_months == h.records()[i].time_months);
        CHECK(twice.records()[i].event == h.records()[i].event);
    }
    CHECK_THROWS_AS(apply_horizon_censoring(h, 0.0), ValidationError);
}

TEST_CASE("subject-level split") {
    std::string body;
    for (int s = 0; s < 10; ++s) {
        for (int k = 0; k < 3; ++k) {
            body += "p" + std::to_string(s) + ",s" + std::to_string(s) + "_" + std::to_string(k) +
                    ",internal_a," + std::to_string(5 + s + k) + ",1\n";
        }
    }
    const auto c = cohort_of(body);
    const auto a = split_by_subject(c, 0.8, 42, std::nullopt);
    CHECK(a.subject_count(Split::train) == 8);
    CHECK(a.subject_count(Split::validation) == 2);
    CHECK(a.subject_count(Split::test) == 0);

    for (const auto& r : c.records()) {
        for (const auto& q : c.records()) {
            if (r.subject_id == q.subject_id) CHECK(a.of_subject(r.subject_id) == a.of_subject(q.subject_id));
        }
    }
    CHECK(a.samples(c, Split::train).size() == 24);

    const auto b = split_by_subject(c, 0.8, 42, std::nullopt);
    CHECK(a.by_subject == b.by_subject);
    bool differs = false;
    for (std::uint64_t seed = 1; seed < 20 && !differs; ++seed) {
        differs = split_by_subject(c, 0.8, seed, std::nullopt).by_subject != a.by_subject;
    }
    CHECK(differs);

    CHECK_THROWS_AS(split_by_subject(c, 1.0, 1, std::nullopt), ValidationError);
    CHECK_THROWS_AS(split_by_subject(c, 0.0, 1, std::nullopt), ValidationError);
}

TEST_CASE("external site goes to test") {
    const auto c = cohort_of(
        "p1,s1,internal_a,5,1\np2,s2,internal_b,6,1\np3,s3,external,7,1\np4,s4,internal_a,8,0\n"
        "p5,s5,internal_a,9,1\np6,s6,external,10,0\n");
    const auto a = split_by_subject(c, 0.5, 3, Site::external);
    CHECK(a.samples(c, Split::test) == std::vector<std::string>{"s3", "s6"});
    CHECK(a.subject_count(Split::train) == 2);
    CHECK(a.subject_count(Split::validation) == 2);
    std::set<std::string> seen;
    for (auto s : {Split::train, Split::validation, Split::test}) {
        for (const auto& id : a.samples(c, s)) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == c.size());
}
