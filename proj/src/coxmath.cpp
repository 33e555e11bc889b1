#include "survfuse/coxmath.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "survfuse/error.hpp"

namespace survfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_inputs(std::span<const double> scores, std::span<const double> times,
                  std::span<const std::uint8_t> events) {
    if (scores.size() != times.size() || scores.size() != events.size()) {
        throw ValidationError("scores, times and events differ in length");
    }
    bool any_event = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw ValidationError("non-finite score");
        if (!std::isfinite(times[i])) throw ValidationError("non-finite time");
        any_event = any_event || events[i] != 0;
    }
    if (!any_event) throw ValidationError("partial likelihood needs at least one event");
}

// Indices sorted by time, descending; ties keep input order.
std::vector<std::size_t> descending_time_order(std::span<const double> times) {
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
    return order;
}

}  // namespace

double cox_npll_with_gradient(std::span<const double> scores, std::span<const double> times,
                              std::span<const std::uint8_t> events, std::span<double> gradient) {
    check_inputs(scores, times, events);
    const std::size_t n = scores.size();
    const auto order = descending_time_order(times);

    // Group boundaries over the descending order: [group_start[g], group_start[g+1]).
    std::vector<std::size_t> group_start;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || times[order[k]] != times[order[k - 1]]) group_start.push_back(k);
    }
    group_start.push_back(n);
    const std::size_t groups = group_start.size() - 1;

    // Forward pass (descending time): log of the risk-set sum at each distinct time.
    std::vector<double> log_risk(groups);
    std::vector<std::size_t> group_events(groups, 0);
    double running = kNegInf;
    double total = 0.0;
    std::size_t event_count = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t k = group_start[g]; k < group_start[g + 1]; ++k) {
            running = log_add_exp(running, scores[order[k]]);
        }
        log_risk[g] = running;
        for (std::size_t k = group_start[g]; k < group_start[g + 1]; ++k) {
            const auto i = order[k];
            if (events[i]) {
                total += scores[i] - running;
                ++group_events[g];
            }
        }
        event_count += group_events[g];
    }
    const double scale = 1.0 / static_cast<double>(event_count);

    if (!gradient.empty()) {
        if (gradient.size() != n) throw ValidationError("gradient buffer has the wrong size");
        // Backward pass (ascending time): log sum over events at or before t of 1/S(t_i).
        double inverse_sum = kNegInf;
        for (std::size_t g = groups; g-- > 0;) {
            if (group_events[g] > 0) {
                inverse_sum = log_add_exp(
                    inverse_sum, std::log(static_cast<double>(group_events[g])) - log_risk[g]);
            }
            for (std::size_t k = group_start[g]; k < group_start[g + 1]; ++k) {
                const auto i = order[k];
                const double share = inverse_sum == kNegInf ? 0.0 : std::exp(scores[i] + inverse_sum);
                gradient[i] = scale * (share - (events[i] ? 1.0 : 0.0));
            }
        }
    }
    return -total * scale;
}

double cox_npll(std::span<const double> scores, std::span<const double> times,
                std::span<const std::uint8_t> events) {
    return cox_npll_with_gradient(scores, times, events, {});
}

std::vector<double> cox_npll_gradient(std::span<const double> scores,
                                      std::span<const double> times,
                                      std::span<const std::uint8_t> events) {
    std::vector<double> grad(scores.size());
    cox_npll_with_gradient(scores, times, events, grad);
    return grad;
}

namespace {

struct CoxState {
    double loglik = 0.0;  // per event
    Eigen::VectorXd gradient;
    Eigen::MatrixXd information;  // negative Hessian, per event
};

CoxState evaluate_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                         std::span<const double> times, std::span<const std::uint8_t> events,
                         const std::vector<std::size_t>& order, bool want_derivatives) {
    const auto n = x.rows();
    const auto p = x.cols();
    const Eigen::VectorXd eta = x * beta;
    const double shift = eta.maxCoeff();

    CoxState state;
    state.gradient = Eigen::VectorXd::Zero(p);
    if (want_derivatives) state.information = Eigen::MatrixXd::Zero(p, p);

    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(want_derivatives ? p : 0, want_derivatives ? p : 0);
    double loglik = 0.0;
    std::size_t event_count = 0;

    std::size_t k = 0;
    while (k < static_cast<std::size_t>(n)) {
        std::size_t end = k;
        while (end < static_cast<std::size_t>(n) && times[order[end]] == times[order[k]]) ++end;
        for (std::size_t m = k; m < end; ++m) {
            const auto i = static_cast<Eigen::Index>(order[m]);
            const double w = std::exp(eta(i) - shift);
            s0 += w;
            s1.noalias() += w * x.row(i).transpose();
            if (want_derivatives) s2.noalias() += w * x.row(i).transpose() * x.row(i);
        }
        const double log_s0 = std::log(s0) + shift;
        const Eigen::VectorXd mean = s1 / s0;
        for (std::size_t m = k; m < end; ++m) {
            const auto i = static_cast<Eigen::Index>(order[m]);
            if (!events[order[m]]) continue;
            ++event_count;
            loglik += eta(i) - log_s0;
            if (want_derivatives) {
                state.gradient.noalias() += x.row(i).transpose() - mean;
                state.information.noalias() += s2 / s0 - mean * mean.transpose();
            }
        }
        k = end;
    }
    const double scale = 1.0 / static_cast<double>(event_count);
    state.loglik = loglik * scale;
    state.gradient *= scale;
    if (want_derivatives) state.information *= scale;
    return state;
}

}  // namespace

LinearCoxModel fit_linear_coxph(const Matrix& x_in, std::span<const double> times,
                                std::span<const std::uint8_t> events,
                                const NewtonOptions& options) {
    const Eigen::MatrixXd x = x_in;
    if (static_cast<std::size_t>(x.rows()) != times.size() || times.size() != events.size()) {
        throw ValidationError("features, times and events differ in length");
    }
    if (x.cols() == 0) throw ValidationError("no feature columns");
    if (!x.allFinite()) throw ValidationError("non-finite feature value");
    if (std::none_of(events.begin(), events.end(), [](auto e) { return e != 0; })) {
        throw ValidationError("partial likelihood needs at least one event");
    }
    const auto order = descending_time_order(times);
    const auto p = x.cols();

    LinearCoxModel model;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    CoxState state = evaluate_linear(x, beta, times, events, order, true);
    model.loglik_trace.push_back(state.loglik);
    const double initial_scale =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(state.information, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .maxCoeff();

    for (int iter = 0;; ++iter) {
        const double gnorm = state.gradient.lpNorm<Eigen::Infinity>();
        if (gnorm < options.tol) {
            // A vanishing gradient with vanishing curvature is the flat tail of a
            // likelihood that keeps rising toward infinite beta, not an optimum.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.information, Eigen::EigenvaluesOnly);
            if (iter > 0 && eig.eigenvalues().minCoeff() < 1e-8 * initial_scale) {
                throw ConvergenceError("coefficients diverging (monotone likelihood); information vanished");
            }
            model.iterations = iter;
            model.grad_norm = gnorm;
            break;
        }
        if (iter >= options.max_iter) {
            throw ConvergenceError("Newton-Raphson did not converge in " +
                                   std::to_string(options.max_iter) +
                                   " iterations (gradient max-norm " + std::to_string(gnorm) + ")");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.information,
                                                           Eigen::EigenvaluesOnly);
        const double lmin = eig.eigenvalues().minCoeff();
        const double lmax = eig.eigenvalues().maxCoeff();
        if (!(lmax > 0.0) || lmin / lmax < options.min_rcond) {
            const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
            throw SingularHessianError(
                "singular Hessian (condition estimate " + std::to_string(cond) + ")", cond);
        }
        const Eigen::VectorXd step = state.information.ldlt().solve(state.gradient);

        // Rounding slack: near the optimum a Newton step changes the likelihood by less
        // than the floating-point noise of evaluating it.
        const double slack = 4.0 * DBL_EPSILON * (std::abs(state.loglik) + 1.0);
        double factor = 1.0;
        bool accepted = false;
        for (int h = 0; h <= options.max_halvings; ++h) {
            const Eigen::VectorXd candidate = beta + factor * step;
            CoxState next = evaluate_linear(x, candidate, times, events, order, false);
            if (std::isfinite(next.loglik) && next.loglik >= state.loglik - slack) {
                beta = candidate;
                accepted = true;
                break;
            }
            factor *= 0.5;
        }
        if (!accepted) {
            throw ConvergenceError("step halving failed to increase the partial likelihood");
        }
        if (beta.lpNorm<Eigen::Infinity>() > options.max_abs_beta) {
            throw ConvergenceError(
                "coefficients diverging (monotone likelihood); |beta| exceeded " +
                std::to_string(options.max_abs_beta));
        }
        state = evaluate_linear(x, beta, times, events, order, true);
        model.loglik_trace.push_back(state.loglik);
    }
    model.beta.assign(beta.data(), beta.data() + beta.size());
    return model;
}

LinearCoxModel fit_linear_coxph(const FeatureTable& features, std::span<const double> times,
                                std::span<const std::uint8_t> events,
                                const NewtonOptions& options) {
    auto model = fit_linear_coxph(features.values(), times, events, options);
    model.columns = features.column_keys();
    return model;
}

std::vector<double> predict_linear_risk(const LinearCoxModel& model, const FeatureTable& features) {
    if (model.columns.size() != model.beta.size()) {
        throw ValidationError("model columns and coefficients differ in length");
    }
    std::vector<Eigen::Index> cols;
    for (const auto& key : model.columns) {
        auto j = features.column_index(key);
        if (!j) throw ValidationError("column mismatch: " + key + " missing from features");
        cols.push_back(*j);
    }
    std::vector<double> scores(static_cast<std::size_t>(features.rows()), 0.0);
    const auto& v = features.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) s += v(i, cols[k]) * model.beta[k];
        scores[static_cast<std::size_t>(i)] = s;
    }
    return scores;
}

nlohmann::ordered_json to_json(const LinearCoxModel& model) {
    nlohmann::ordered_json j;
    j["columns"] = model.columns;
    j["beta"] = model.beta;
    j["iterations"] = model.iterations;
    j["grad_norm"] = model.grad_norm;
    return j;
}

LinearCoxModel linear_cox_from_json(const nlohmann::json& j) {
    LinearCoxModel m;
    m.columns = j.at("columns").get<std::vector<std::string>>();
    m.beta = j.at("beta").get<std::vector<double>>();
    m.iterations = j.value("iterations", 0);
    m.grad_norm = j.value("grad_norm", 0.0);
    if (m.columns.size() != m.beta.size()) {
        throw ValidationError("linear Cox model: columns and beta differ in length");
    }
    return m;
}

}  // namespace survfuse
