#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "survfuse/cohort.hpp"
#include "survfuse/features.hpp"
#include "survfuse/metrics.hpp"

namespace survfuse {

enum class RiskKind { linear, nonlinear };

struct RiskFunction {
    RiskKind kind = RiskKind::linear;
    std::vector<double> beta;              // linear: one per leading feature, rest 0
    std::string form = "quadratic_sine";   // nonlinear: x1^2 - x2^2 + sin(pi x3)
    double scale = 1.0;                    // multiplies the nonlinear form

    double operator()(const double* x, std::size_t p) const;
};

enum class CensoringKind { none, uniform, exponential };

struct CensoringModel {
    CensoringKind kind = CensoringKind::none;
    double low = 0.0;   // uniform window
    double high = 0.0;
    double rate = 0.0;  // exponential
};

struct FeatureBlockSpec {
    std::string name;
    std::size_t width = 0;
};

struct SyntheticSpec {
    std::size_t n = 1000;
    std::size_t p = 3;
    RiskFunction risk;
    double weibull_shape = 1.0;
    double weibull_scale = 60.0;
    CensoringModel censoring;
    double horizon = 60.0;
    std::uint64_t seed = 0;
    // Correlation induced by a per-sample shared factor: x = sqrt(1-rho) z + sqrt(rho) f.
    double shared_factor = 0.0;
    double external_fraction = 0.0;  // probability a subject is tagged as external
    // Column layout; empty means a single "radiomics" block of width p.
    std::vector<FeatureBlockSpec> blocks;
};

struct SyntheticCohort {
    Cohort cohort;
    FeatureTable features;
    std::vector<double> true_risk;
    SyntheticSpec spec;
};

// Standard-normal features; event time by inverse-transform sampling from
// S(t | x) = exp(-(t / scale)^shape * exp(risk(x))); observed time
// min(T, C, horizon) with event = [T <= min(C, horizon)].
SyntheticCohort generate(const SyntheticSpec& spec);

// C-index of the true risk over the whole cohort, or over the listed samples.
CIndexResult oracle_metrics(const SyntheticCohort& cohort);
CIndexResult oracle_metrics(const SyntheticCohort& cohort, const std::vector<std::string>& samples);

nlohmann::ordered_json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

// cohort.csv, features_<block>.csv per block, true_risk.csv and spec.json.
void write_synthetic(const SyntheticCohort& cohort, const std::filesystem::path& dir);

}  // namespace survfuse
