#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "survfuse/features.hpp"

namespace survfuse {

// Negative partial log-likelihood of risk scores under the Cox model, Breslow ties,
// normalized by the number of events:
//
//   L = -(1/E) * sum_{i: event} [ r_i - log sum_{j: t_j >= t_i} exp(r_j) ]
//
// Risk-set sums are accumulated as a running log-sum-exp over samples sorted by
// descending time, so arbitrarily large or small scores stay finite.
double cox_npll(std::span<const double> scores, std::span<const double> times,
                std::span<const std::uint8_t> events);

// dL/dr_k = (1/E) * ( -e_k + sum_{i: event, t_i <= t_k} exp(r_k - logsum_i) )
std::vector<double> cox_npll_gradient(std::span<const double> scores,
                                      std::span<const double> times,
                                      std::span<const std::uint8_t> events);

// Loss and gradient from one sort.
double cox_npll_with_gradient(std::span<const double> scores, std::span<const double> times,
                              std::span<const std::uint8_t> events, std::span<double> gradient);

struct NewtonOptions {
    double tol = 1e-9;         // max-norm of the per-event gradient
    int max_iter = 100;
    int max_halvings = 40;
    double max_abs_beta = 30.0;  // beyond this the likelihood is treated as monotone
    double min_rcond = 1e-14;
};

struct LinearCoxModel {
    std::vector<std::string> columns;
    std::vector<double> beta;
    int iterations = 0;
    double grad_norm = 0.0;
    std::vector<double> loglik_trace;  // per-event partial log-likelihood, one per iterate
};

// Newton-Raphson on the Breslow partial likelihood with step halving whenever a full
// step lowers the likelihood. Throws SingularHessianError or ConvergenceError.
LinearCoxModel fit_linear_coxph(const FeatureTable& features, std::span<const double> times,
                                std::span<const std::uint8_t> events,
                                const NewtonOptions& options = {});
LinearCoxModel fit_linear_coxph(const Matrix& x, std::span<const double> times,
                                std::span<const std::uint8_t> events,
                                const NewtonOptions& options = {});

// r = X beta; columns matched by key.
std::vector<double> predict_linear_risk(const LinearCoxModel& model, const FeatureTable& features);

nlohmann::ordered_json to_json(const LinearCoxModel& model);
LinearCoxModel linear_cox_from_json(const nlohmann::json& j);

}  // namespace survfuse
