#include "survfuse/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "survfuse/error.hpp"
#include "survfuse/io.hpp"
#include "survfuse/rng.hpp"

namespace survfuse {

std::string_view to_string(Site site) {
    switch (site) {
        case Site::internal_a: return "internal_a";
        case Site::internal_b: return "internal_b";
        case Site::external: return "external";
    }
    return "?";
}

std::optional<Site> parse_site(std::string_view text) {
    const auto t = io::to_lower(io::trim(text));
    if (t == "internal_a") return Site::internal_a;
    if (t == "internal_b") return Site::internal_b;
    if (t == "external") return Site::external;
    return std::nullopt;
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "?";
}

Cohort::Cohort(std::vector<SurvivalRecord> records, double horizon_months)
    : records_(std::move(records)), horizon_months_(horizon_months) {
    if (!(horizon_months_ > 0.0) || !std::isfinite(horizon_months_)) {
        throw ValidationError("horizon must be positive and finite");
    }
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.sample_id.empty() || r.subject_id.empty()) {
            throw ValidationError("empty subject or sample id at record " + std::to_string(i));
        }
        if (!(r.time_months > 0.0) || !(r.raw_time_months > 0.0) ||
            !std::isfinite(r.raw_time_months)) {
            throw ValidationError("non-positive time for sample " + r.sample_id);
        }
        if (r.time_months > horizon_months_) {
            throw ValidationError("time beyond horizon for sample " + r.sample_id);
        }
        if (r.event && r.raw_time_months > horizon_months_) {
            throw ValidationError("event after horizon for sample " + r.sample_id);
        }
        if (!index_.emplace(r.sample_id, i).second) {
            throw ValidationError("duplicate sample_id " + r.sample_id);
        }
    }
}

double Cohort::censorship_rate() const {
    if (records_.empty()) return 0.0;
    const auto censored =
        std::count_if(records_.begin(), records_.end(), [](const auto& r) { return !r.event; });
    return static_cast<double>(censored) / static_cast<double>(records_.size());
}

std::vector<double> Cohort::times() const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.time_months);
    return out;
}

std::vector<std::uint8_t> Cohort::events() const {
    std::vector<std::uint8_t> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.event ? 1 : 0);
    return out;
}

std::vector<std::string> Cohort::sample_ids() const {
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.sample_id);
    return out;
}

std::optional<std::size_t> Cohort::index_of(std::string_view sample_id) const {
    auto it = index_.find(sample_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Cohort Cohort::subset(const std::vector<std::string>& sample_ids) const {
    std::vector<SurvivalRecord> out;
    out.reserve(sample_ids.size());
    for (const auto& id : sample_ids) {
        auto idx = index_of(id);
        if (!idx) throw ValidationError("sample " + id + " not in cohort");
        out.push_back(records_[*idx]);
    }
    return Cohort(std::move(out), horizon_months_);
}

namespace {

void censor_in_place(SurvivalRecord& r, double horizon) {
    if (r.raw_time_months > horizon) {
        r.time_months = horizon;
        r.event = false;
    } else {
        r.time_months = r.raw_time_months;
        r.event = r.event_observed;
    }
}

constexpr std::string_view kRequired[] = {"subject_id", "sample_id", "site", "raw_time_months",
                                          "event_observed"};

}  // namespace

Cohort apply_horizon_censoring(const Cohort& cohort, double horizon_months) {
    if (!(horizon_months > 0.0) || !std::isfinite(horizon_months)) {
        throw ValidationError("non-positive horizon");
    }
    auto records = cohort.records();
    for (auto& r : records) censor_in_place(r, horizon_months);
    return Cohort(std::move(records), horizon_months);
}

CohortLoad parse_cohort_csv(std::string_view text, double horizon_months, bool strict) {
    if (!(horizon_months > 0.0)) throw ValidationError("non-positive horizon");
    const auto csv = io::parse_csv(text);
    if (csv.header.empty()) throw ValidationError("cohort file is empty");

    std::map<std::string, std::size_t> col;
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
        col[std::string(io::trim(csv.header[j]))] = j;
    }
    for (auto name : kRequired) {
        if (!col.contains(std::string(name))) {
            throw ValidationError("missing column " + std::string(name));
        }
    }

    CohortLoad result;
    std::vector<SurvivalRecord> records;
    std::set<std::string, std::less<>> seen_samples;
    std::set<std::string, std::less<>> all_subjects;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        const std::size_t rownum = i + 1;
        auto reject = [&](const std::string& message) {
            result.rejected.push_back({rownum, message + " at row " + std::to_string(rownum)});
        };
        if (row.size() != csv.header.size()) {
            reject("expected " + std::to_string(csv.header.size()) + " fields, found " +
                   std::to_string(row.size()));
            continue;
        }
        SurvivalRecord r;
        r.subject_id = std::string(io::trim(row[col["subject_id"]]));
        r.sample_id = std::string(io::trim(row[col["sample_id"]]));
        if (!r.subject_id.empty()) all_subjects.insert(r.subject_id);
        if (r.subject_id.empty() || r.sample_id.empty()) {
            reject("empty subject_id or sample_id");
            continue;
        }
        auto site = parse_site(row[col["site"]]);
        if (!site) {
            reject("unknown site '" + row[col["site"]] + "'");
            continue;
        }
        r.site = *site;
        auto t = io::parse_double(row[col["raw_time_months"]]);
        if (!t || !std::isfinite(*t)) {
            reject("unparseable number '" + row[col["raw_time_months"]] + "'");
            continue;
        }
        if (*t <= 0.0) {
            reject("non-positive time");
            continue;
        }
        r.raw_time_months = *t;
        auto ev = io::parse_int(row[col["event_observed"]]);
        if (!ev || (*ev != 0 && *ev != 1)) {
            reject("event_observed must be 0 or 1");
            continue;
        }
        r.event_observed = *ev == 1;
        if (!seen_samples.insert(r.sample_id).second) {
            reject("duplicate sample_id " + r.sample_id);
            continue;
        }
        censor_in_place(r, horizon_months);
        records.push_back(std::move(r));
    }

    if (strict && !result.rejected.empty()) {
        std::ostringstream msg;
        msg << result.rejected.size() << " invalid cohort row(s):";
        for (const auto& e : result.rejected) msg << "\n  " << e.message;
        throw ValidationError(msg.str());
    }
    std::set<std::string, std::less<>> kept_subjects;
    for (const auto& r : records) kept_subjects.insert(r.subject_id);
    for (const auto& s : all_subjects) {
        if (!kept_subjects.contains(s)) {
            result.warnings.push_back("subject " + s + " dropped: no usable samples");
        }
    }
    if (records.empty()) throw ValidationError("no data rows");
    result.cohort = Cohort(std::move(records), horizon_months);
    return result;
}

Cohort load_cohort(const std::filesystem::path& path, double horizon_months) {
    return parse_cohort_csv(io::read_text(path), horizon_months, true).cohort;
}

CohortLoad load_cohort_lenient(const std::filesystem::path& path, double horizon_months) {
    return parse_cohort_csv(io::read_text(path), horizon_months, false);
}

std::string cohort_to_csv(const Cohort& cohort) {
    std::string out = "subject_id,sample_id,site,raw_time_months,event_observed\n";
    for (const auto& r : cohort.records()) {
        out += io::csv_escape(r.subject_id);
        out += ',';
        out += io::csv_escape(r.sample_id);
        out += ',';
        out += to_string(r.site);
        out += ',';
        out += io::format_double(r.raw_time_months);
        out += r.event_observed ? ",1\n" : ",0\n";
    }
    return out;
}

Split SplitAssignment::of_subject(const std::string& subject_id) const {
    auto it = by_subject.find(subject_id);
    if (it == by_subject.end()) throw ValidationError("subject " + subject_id + " not assigned");
    return it->second;
}

std::vector<std::size_t> SplitAssignment::indices(const Cohort& cohort, Split split) const {
    std::vector<std::size_t> out;
    const auto& recs = cohort.records();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (of_subject(recs[i].subject_id) == split) out.push_back(i);
    }
    return out;
}

std::vector<std::string> SplitAssignment::samples(const Cohort& cohort, Split split) const {
    std::vector<std::string> out;
    for (auto i : indices(cohort, split)) out.push_back(cohort.records()[i].sample_id);
    return out;
}

std::size_t SplitAssignment::subject_count(Split split) const {
    return static_cast<std::size_t>(std::count_if(
        by_subject.begin(), by_subject.end(), [&](const auto& kv) { return kv.second == split; }));
}

SplitAssignment split_by_subject(const Cohort& cohort, double ratio, std::uint64_t seed,
                                 std::optional<Site> external_site) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("ratio must lie in (0, 1)");
    if (cohort.empty()) throw ValidationError("cannot split an empty cohort");

    std::set<std::string> held_out;
    std::set<std::string> subjects;
    for (const auto& r : cohort.records()) {
        subjects.insert(r.subject_id);
        if (external_site && r.site == *external_site) held_out.insert(r.subject_id);
    }

    SplitAssignment assignment;
    std::vector<std::string> pool;
    for (const auto& s : subjects) {
        if (held_out.contains(s)) {
            assignment.by_subject[s] = Split::test;
        } else {
            pool.push_back(s);
        }
    }
    Rng rng(seed);
    rng.shuffle(pool);
    // The epsilon keeps exact products such as 0.8 * 10 from rounding down.
    const auto n_train = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(pool.size()) + 1e-9));
    for (std::size_t i = 0; i < pool.size(); ++i) {
        assignment.by_subject[pool[i]] = i < n_train ? Split::train : Split::validation;
    }
    return assignment;
}

}  // namespace survfuse
