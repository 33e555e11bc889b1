#include "survfuse/simdata.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "survfuse/error.hpp"
#include "survfuse/io.hpp"
#include "survfuse/rng.hpp"

namespace survfuse {

double RiskFunction::operator()(const double* x, std::size_t p) const {
    if (kind == RiskKind::linear) {
        double r = 0.0;
        for (std::size_t j = 0; j < beta.size() && j < p; ++j) r += beta[j] * x[j];
        return r;
    }
    if (form == "quadratic_sine") {
        return scale * (x[0] * x[0] - x[1] * x[1] + std::sin(std::numbers::pi * x[2]));
    }
    throw ValidationError("unknown nonlinear risk form " + form);
}

namespace {

void validate(const SyntheticSpec& spec) {
    if (spec.n < 2) throw ValidationError("synthetic cohort needs n >= 2");
    if (spec.p == 0) throw ValidationError("synthetic cohort needs p >= 1");
    if (!(spec.weibull_shape > 0.0) || !(spec.weibull_scale > 0.0)) {
        throw ValidationError("Weibull shape and scale must be positive");
    }
    if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) {
        throw ValidationError("horizon must be positive and finite");
    }
    if (spec.risk.kind == RiskKind::linear && spec.risk.beta.size() > spec.p) {
        throw ValidationError("more coefficients than features");
    }
    if (spec.risk.kind == RiskKind::nonlinear && spec.p < 3) {
        throw ValidationError("the nonlinear risk form needs p >= 3");
    }
    if (!(spec.shared_factor >= 0.0 && spec.shared_factor < 1.0)) {
        throw ValidationError("shared_factor must lie in [0, 1)");
    }
    const auto& c = spec.censoring;
    if (c.kind == CensoringKind::uniform && !(c.high > c.low && c.low >= 0.0)) {
        throw ValidationError("uniform censoring window must satisfy 0 <= low < high");
    }
    if (c.kind == CensoringKind::exponential && !(c.rate > 0.0)) {
        throw ValidationError("exponential censoring rate must be positive");
    }
    if (!spec.blocks.empty()) {
        std::size_t total = 0;
        for (const auto& b : spec.blocks) total += b.width;
        if (total != spec.p) throw ValidationError("block widths must sum to p");
    }
}

std::string padded(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, i);
    return buf;
}

}  // namespace

SyntheticCohort generate(const SyntheticSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.p);
    Matrix x(n, p);
    std::vector<double> risk(spec.n);
    std::vector<SurvivalRecord> records;
    records.reserve(spec.n);
    const double own = std::sqrt(1.0 - spec.shared_factor);
    const double shared = std::sqrt(spec.shared_factor);

    for (Eigen::Index i = 0; i < n; ++i) {
        const double factor = spec.shared_factor > 0.0 ? rng.normal() : 0.0;
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = own * rng.normal() + shared * factor;
        const double r = spec.risk(&x(i, 0), spec.p);
        risk[static_cast<std::size_t>(i)] = r;

        const double u = rng.uniform_open();
        const double t_event =
            spec.weibull_scale * std::pow(-std::log(u) * std::exp(-r), 1.0 / spec.weibull_shape);
        double t_censor = std::numeric_limits<double>::infinity();
        switch (spec.censoring.kind) {
            case CensoringKind::none: break;
            case CensoringKind::uniform:
                t_censor = rng.uniform(spec.censoring.low, spec.censoring.high);
                break;
            case CensoringKind::exponential:
                t_censor = rng.exponential(spec.censoring.rate);
                break;
        }
        const bool external = spec.external_fraction > 0.0 && rng.bernoulli(spec.external_fraction);

        SurvivalRecord rec;
        rec.subject_id = padded("S", static_cast<std::size_t>(i));
        rec.sample_id = padded("X", static_cast<std::size_t>(i));
        rec.site = external ? Site::external : (i % 2 == 0 ? Site::internal_a : Site::internal_b);
        // Time zero is not a valid observation; clamp to the smallest positive double.
        rec.raw_time_months = std::max(std::min(t_event, t_censor), std::numeric_limits<double>::min());
        rec.event_observed = t_event <= t_censor;
        if (rec.raw_time_months > spec.horizon) {
            rec.time_months = spec.horizon;
            rec.event = false;
        } else {
            rec.time_months = rec.raw_time_months;
            rec.event = rec.event_observed;
        }
        records.push_back(std::move(rec));
    }

    std::vector<ColumnName> columns;
    if (spec.blocks.empty()) {
        for (std::size_t j = 0; j < spec.p; ++j) columns.push_back({"radiomics", "f" + std::to_string(j)});
    } else {
        for (const auto& b : spec.blocks) {
            for (std::size_t j = 0; j < b.width; ++j) columns.push_back({b.name, "f" + std::to_string(j)});
        }
    }
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.sample_id);

    SyntheticCohort out{Cohort(std::move(records), spec.horizon),
                        FeatureTable(std::move(ids), std::move(columns), std::move(x)),
                        std::move(risk), spec};
    return out;
}

CIndexResult oracle_metrics(const SyntheticCohort& cohort) {
    return concordance_index(cohort.cohort.times(), cohort.cohort.events(), cohort.true_risk);
}

CIndexResult oracle_metrics(const SyntheticCohort& cohort, const std::vector<std::string>& samples) {
    std::vector<double> t, r;
    std::vector<std::uint8_t> e;
    for (const auto& id : samples) {
        auto idx = cohort.cohort.index_of(id);
        if (!idx) throw ValidationError("sample " + id + " not in synthetic cohort");
        const auto& rec = cohort.cohort.records()[*idx];
        t.push_back(rec.time_months);
        e.push_back(rec.event ? 1 : 0);
        r.push_back(cohort.true_risk[*idx]);
    }
    return concordance_index(t, e, r);
}

nlohmann::ordered_json to_json(const SyntheticSpec& s) {
    nlohmann::ordered_json j;
    j["n"] = s.n;
    j["p"] = s.p;
    nlohmann::ordered_json risk;
    risk["kind"] = s.risk.kind == RiskKind::linear ? "linear" : "nonlinear";
    risk["beta"] = s.risk.beta;
    risk["form"] = s.risk.form;
    risk["scale"] = s.risk.scale;
    j["risk"] = risk;
    j["weibull_shape"] = s.weibull_shape;
    j["weibull_scale"] = s.weibull_scale;
    nlohmann::ordered_json cens;
    switch (s.censoring.kind) {
        case CensoringKind::none: cens["kind"] = "none"; break;
        case CensoringKind::uniform: cens["kind"] = "uniform"; break;
        case CensoringKind::exponential: cens["kind"] = "exponential"; break;
    }
    cens["low"] = s.censoring.low;
    cens["high"] = s.censoring.high;
    cens["rate"] = s.censoring.rate;
    j["censoring"] = cens;
    j["horizon"] = s.horizon;
    j["seed"] = s.seed;
    j["shared_factor"] = s.shared_factor;
    j["external_fraction"] = s.external_fraction;
    auto blocks = nlohmann::ordered_json::array();
    for (const auto& b : s.blocks) blocks.push_back({{"name", b.name}, {"width", b.width}});
    j["blocks"] = blocks;
    return j;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    s.n = j.value("n", s.n);
    s.p = j.value("p", s.p);
    if (j.contains("risk")) {
        const auto& r = j.at("risk");
        const auto kind = r.value("kind", std::string("linear"));
        if (kind == "linear") {
            s.risk.kind = RiskKind::linear;
        } else if (kind == "nonlinear") {
            s.risk.kind = RiskKind::nonlinear;
        } else {
            throw ValidationError("unknown risk kind " + kind);
        }
        s.risk.beta = r.value("beta", std::vector<double>{});
        s.risk.form = r.value("form", s.risk.form);
        s.risk.scale = r.value("scale", s.risk.scale);
    }
    s.weibull_shape = j.value("weibull_shape", s.weibull_shape);
    s.weibull_scale = j.value("weibull_scale", s.weibull_scale);
    if (j.contains("censoring")) {
        const auto& c = j.at("censoring");
        const auto kind = c.value("kind", std::string("none"));
        if (kind == "none") {
            s.censoring.kind = CensoringKind::none;
        } else if (kind == "uniform") {
            s.censoring.kind = CensoringKind::uniform;
        } else if (kind == "exponential") {
            s.censoring.kind = CensoringKind::exponential;
        } else {
            throw ValidationError("unknown censoring kind " + kind);
        }
        s.censoring.low = c.value("low", 0.0);
        s.censoring.high = c.value("high", 0.0);
        s.censoring.rate = c.value("rate", 0.0);
    }
    s.horizon = j.value("horizon", s.horizon);
    s.seed = j.value("seed", s.seed);
    s.shared_factor = j.value("shared_factor", s.shared_factor);
    s.external_fraction = j.value("external_fraction", s.external_fraction);
    if (j.contains("blocks")) {
        for (const auto& b : j.at("blocks")) {
            s.blocks.push_back({b.at("name").get<std::string>(), b.at("width").get<std::size_t>()});
        }
    }
    return s;
}

void write_synthetic(const SyntheticCohort& c, const std::filesystem::path& dir) {
    io::write_atomic(dir / "cohort.csv", cohort_to_csv(c.cohort));
    for (const auto& block : c.features.blocks()) {
        io::write_atomic(dir / ("features_" + block + ".csv"),
                         feature_table_to_csv(c.features.select_blocks({block})));
    }
    std::string risk = "sample_id,true_risk\n";
    for (std::size_t i = 0; i < c.true_risk.size(); ++i) {
        risk += c.cohort.records()[i].sample_id + "," + io::format_double(c.true_risk[i]) + "\n";
    }
    io::write_atomic(dir / "true_risk.csv", risk);
    io::write_atomic(dir / "spec.json", to_json(c.spec).dump(2) + "\n");
}

}  // namespace survfuse
