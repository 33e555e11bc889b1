#include "survfuse/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "survfuse/coxmath.hpp"
#include "survfuse/error.hpp"

namespace survfuse {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::size_t MlpModel::parameter_count() const {
    std::size_t count = 0;
    for (const auto& d : dense) count += static_cast<std::size_t>(d.weight.size() + d.bias.size());
    for (const auto& b : norms) count += static_cast<std::size_t>(b.gamma.size() + b.beta.size());
    return count;
}

std::size_t MlpModel::buffer_count() const {
    std::size_t count = 0;
    for (const auto& b : norms) {
        count += static_cast<std::size_t>(b.running_mean.size() + b.running_var.size());
    }
    return count;
}

namespace {

// Visits every trainable tensor in flat order.
template <class Model, class Fn>
void visit_parameters(Model& model, Fn&& fn) {
    for (std::size_t l = 0; l < model.dense.size(); ++l) {
        auto& d = model.dense[l];
        for (Eigen::Index r = 0; r < d.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < d.weight.cols(); ++c) fn(d.weight(r, c));
        }
        for (Eigen::Index k = 0; k < d.bias.size(); ++k) fn(d.bias(k));
        if (l < model.norms.size()) {
            auto& b = model.norms[l];
            for (Eigen::Index k = 0; k < b.gamma.size(); ++k) fn(b.gamma(k));
            for (Eigen::Index k = 0; k < b.beta.size(); ++k) fn(b.beta(k));
        }
    }
}

bool same(const MatrixXd& a, const MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::equal(a.data(), a.data() + a.size(), b.data());
}

bool same(const VectorXd& a, const VectorXd& b) {
    return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

}  // namespace

std::vector<double> MlpModel::flat_parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    visit_parameters(*this, [&](const double& v) { flat.push_back(v); });
    return flat;
}

void MlpModel::set_flat_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw ValidationError("flat parameter size mismatch");
    std::size_t k = 0;
    visit_parameters(*this, [&](double& v) { v = flat[k++]; });
}

bool MlpModel::operator==(const MlpModel& other) const {
    if (dense.size() != other.dense.size() || norms.size() != other.norms.size()) return false;
    for (std::size_t l = 0; l < dense.size(); ++l) {
        if (!same(dense[l].weight, other.dense[l].weight) || !same(dense[l].bias, other.dense[l].bias)) {
            return false;
        }
    }
    for (std::size_t l = 0; l < norms.size(); ++l) {
        const auto& a = norms[l];
        const auto& b = other.norms[l];
        if (!same(a.gamma, b.gamma) || !same(a.beta, b.beta) ||
            !same(a.running_mean, b.running_mean) || !same(a.running_var, b.running_var)) {
            return false;
        }
    }
    return true;
}

MlpModel build_mlp(const MlpConfig& config) {
    if (config.input_dim == 0) throw ValidationError("input_dim must be positive");
    if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) {
        throw ValidationError("dropout_rate must lie in [0, 1)");
    }
    for (auto h : config.hidden_dims) {
        if (h == 0) throw ValidationError("hidden layer widths must be positive");
    }
    MlpModel model;
    model.config = config;
    Rng rng(config.seed);
    std::size_t fan_in = config.input_dim;
    std::vector<std::size_t> widths = config.hidden_dims;
    widths.push_back(1);
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const auto out = static_cast<Eigen::Index>(widths[l]);
        const auto in = static_cast<Eigen::Index>(fan_in);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        DenseLayer d;
        d.weight.resize(out, in);
        d.bias.resize(out);
        for (Eigen::Index r = 0; r < out; ++r) {
            for (Eigen::Index c = 0; c < in; ++c) d.weight(r, c) = rng.uniform(-bound, bound);
        }
        for (Eigen::Index r = 0; r < out; ++r) d.bias(r) = rng.uniform(-bound, bound);
        model.dense.push_back(std::move(d));
        if (config.batchnorm && l + 1 < widths.size()) {
            BatchNormLayer b;
            b.gamma = VectorXd::Ones(out);
            b.beta = VectorXd::Zero(out);
            b.running_mean = VectorXd::Zero(out);
            b.running_var = VectorXd::Ones(out);
            model.norms.push_back(std::move(b));
        }
        fan_in = widths[l];
    }
    return model;
}

namespace {

struct HiddenCache {
    MatrixXd input;    // activations entering the linear layer
    MatrixXd xhat;     // normalized pre-activations (batchnorm only)
    VectorXd inv_std;  // 1 / sqrt(var + eps) used for xhat
    MatrixXd post_bn;  // input to ReLU
    MatrixXd dropout;  // multiplicative mask (empty when rate == 0 or eval)
};

struct ForwardCache {
    std::vector<HiddenCache> hidden;
    MatrixXd last_input;
};

void check_batch(const MlpModel& model, const Matrix& batch, Mode mode) {
    if (static_cast<std::size_t>(batch.cols()) != model.config.input_dim) {
        throw ValidationError("batch width " + std::to_string(batch.cols()) +
                              " does not match input_dim " +
                              std::to_string(model.config.input_dim));
    }
    if (mode == Mode::train && !model.norms.empty() && batch.rows() < 2) {
        throw ValidationError("train-mode batchnorm needs a batch of at least 2 rows");
    }
}

// Column vector of outputs; fills `cache` when non-null.
VectorXd run_forward(MlpModel& model, const Matrix& batch, Mode mode, Rng* rng,
                     ForwardCache* cache) {
    check_batch(model, batch, mode);
    const auto n = batch.rows();
    const double nd = static_cast<double>(n);
    const auto& cfg = model.config;
    MatrixXd a = batch;
    const std::size_t hidden_layers = model.dense.size() - 1;
    if (cache) cache->hidden.resize(hidden_layers);

    for (std::size_t l = 0; l < hidden_layers; ++l) {
        const auto& d = model.dense[l];
        MatrixXd z = a * d.weight.transpose();
        z.rowwise() += d.bias.transpose();
        HiddenCache hc;
        if (cache) hc.input = std::move(a);

        if (!model.norms.empty()) {
            auto& bn = model.norms[l];
            VectorXd mean, var;
            if (mode == Mode::train) {
                mean = z.colwise().mean().transpose();
                var = (z.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
                bn.running_mean = (1.0 - cfg.bn_momentum) * bn.running_mean + cfg.bn_momentum * mean;
                const VectorXd unbiased = var * (nd / std::max(nd - 1.0, 1.0));
                bn.running_var = (1.0 - cfg.bn_momentum) * bn.running_var + cfg.bn_momentum * unbiased;
            } else {
                mean = bn.running_mean;
                var = bn.running_var;
            }
            const VectorXd inv_std = (var.array() + cfg.bn_epsilon).rsqrt().matrix();
            MatrixXd xhat = (z.rowwise() - mean.transpose()) * inv_std.asDiagonal();
            z = xhat * bn.gamma.asDiagonal();
            z.rowwise() += bn.beta.transpose();
            if (cache) {
                hc.xhat = std::move(xhat);
                hc.inv_std = inv_std;
            }
        }
        if (cache) hc.post_bn = z;
        a = z.cwiseMax(0.0);

        if (mode == Mode::train && cfg.dropout_rate > 0.0) {
            const double keep = 1.0 - cfg.dropout_rate;
            MatrixXd mask(a.rows(), a.cols());
            // Row-major draw order keeps masks independent of Eigen's storage order.
            for (Eigen::Index i = 0; i < mask.rows(); ++i) {
                for (Eigen::Index j = 0; j < mask.cols(); ++j) {
                    mask(i, j) = rng->uniform() < keep ? 1.0 / keep : 0.0;
                }
            }
            a = a.cwiseProduct(mask);
            if (cache) hc.dropout = std::move(mask);
        }
        if (cache) cache->hidden[l] = std::move(hc);
    }
    const auto& out = model.dense.back();
    VectorXd r = a * out.weight.transpose();
    r.array() += out.bias(0);
    if (cache) cache->last_input = std::move(a);
    return r;
}

std::vector<double> to_std(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::vector<double> forward(MlpModel& model, const Matrix& batch, Mode mode, Rng& rng) {
    model.mode = mode;
    return to_std(run_forward(model, batch, mode, &rng, nullptr));
}

std::vector<double> predict_risk(const MlpModel& model, const Matrix& features) {
    MlpModel copy = model;  // eval mode never mutates; the copy keeps the signature const
    return to_std(run_forward(copy, features, Mode::eval, nullptr, nullptr));
}

std::vector<double> predict_risk(const MlpModel& model, const FeatureTable& features) {
    return predict_risk(model, features.values());
}

LossAndGradient npll_parameter_gradient(MlpModel& model, const Matrix& batch,
                                        std::span<const double> times,
                                        std::span<const std::uint8_t> events, Mode mode,
                                        Rng& rng) {
    if (static_cast<std::size_t>(batch.rows()) != times.size()) {
        throw ValidationError("batch rows and labels differ in length");
    }
    ForwardCache cache;
    model.mode = mode;
    const VectorXd scores = run_forward(model, batch, mode, &rng, &cache);
    if (!scores.allFinite()) throw DivergenceError("non-finite risk score", 0);

    std::vector<double> dscore(static_cast<std::size_t>(scores.size()));
    LossAndGradient result;
    result.loss = cox_npll_with_gradient(std::span<const double>(scores.data(), dscore.size()),
                                         times, events, dscore);

    const std::size_t hidden_layers = model.dense.size() - 1;
    std::vector<MatrixXd> grad_w(model.dense.size());
    std::vector<VectorXd> grad_b(model.dense.size());
    std::vector<VectorXd> grad_gamma(model.norms.size());
    std::vector<VectorXd> grad_beta(model.norms.size());

    const Eigen::Map<const VectorXd> g_out(dscore.data(), static_cast<Eigen::Index>(dscore.size()));
    grad_w.back() = g_out.transpose() * cache.last_input;
    grad_b.back() = VectorXd::Constant(1, g_out.sum());
    MatrixXd upstream = g_out * model.dense.back().weight;  // n x width

    const double nd = static_cast<double>(batch.rows());
    for (std::size_t l = hidden_layers; l-- > 0;) {
        const auto& hc = cache.hidden[l];
        if (hc.dropout.size() > 0) upstream = upstream.cwiseProduct(hc.dropout);
        MatrixXd dz = (hc.post_bn.array() > 0.0).select(upstream, 0.0);
        if (!model.norms.empty()) {
            const auto& bn = model.norms[l];
            grad_gamma[l] = dz.cwiseProduct(hc.xhat).colwise().sum().transpose();
            grad_beta[l] = dz.colwise().sum().transpose();
            const MatrixXd dxhat = dz * bn.gamma.asDiagonal();
            if (mode == Mode::train) {
                const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
                const Eigen::RowVectorXd sum_dxhat_xhat = dxhat.cwiseProduct(hc.xhat).colwise().sum();
                MatrixXd centred = nd * dxhat;
                centred.rowwise() -= sum_dxhat;
                centred -= hc.xhat * sum_dxhat_xhat.asDiagonal();
                dz = centred * (hc.inv_std / nd).asDiagonal();
            } else {
                dz = dxhat * hc.inv_std.asDiagonal();
            }
        }
        grad_w[l] = dz.transpose() * hc.input;
        grad_b[l] = dz.colwise().sum().transpose();
        if (l > 0) upstream = dz * model.dense[l].weight;
    }

    result.gradient.reserve(model.parameter_count());
    for (std::size_t l = 0; l < model.dense.size(); ++l) {
        const auto& gw = grad_w[l];
        for (Eigen::Index r = 0; r < gw.rows(); ++r) {
            for (Eigen::Index c = 0; c < gw.cols(); ++c) result.gradient.push_back(gw(r, c));
        }
        for (Eigen::Index k = 0; k < grad_b[l].size(); ++k) result.gradient.push_back(grad_b[l](k));
        if (l < model.norms.size()) {
            for (Eigen::Index k = 0; k < grad_gamma[l].size(); ++k) {
                result.gradient.push_back(grad_gamma[l](k));
            }
            for (Eigen::Index k = 0; k < grad_beta[l].size(); ++k) {
                result.gradient.push_back(grad_beta[l](k));
            }
        }
    }
    return result;
}

void adamw_step(std::vector<double>& params, std::span<const double> grad, AdamState& state,
                const TrainConfig& config) {
    if (grad.size() != params.size()) throw ValidationError("gradient size mismatch");
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.step = 0;
    }
    ++state.step;
    const double lr = config.learning_rate;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        params[k] -= lr * config.weight_decay * params[k];
        state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * grad[k];
        state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * grad[k] * grad[k];
        const double m_hat = state.m[k] / c1;
        const double v_hat = state.v[k] / c2;
        params[k] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
}

std::string_view to_string(StopReason reason) {
    return reason == StopReason::early_stop ? "early_stop" : "max_epochs";
}

namespace {

std::vector<std::vector<Eigen::Index>> make_batches(const SurvivalLabels& y, std::size_t batch_size,
                                                    bool need_pairs, Rng& rng) {
    const std::size_t n = y.times.size();
    std::vector<Eigen::Index> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<Eigen::Index>(i);
    if (batch_size == 0 || batch_size >= n) return {order};

    constexpr int kMaxRedraws = 100;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        rng.shuffle(order);
        std::vector<std::vector<Eigen::Index>> batches;
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t end = std::min(n, start + batch_size);
            batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                                 order.begin() + static_cast<std::ptrdiff_t>(end));
        }
        // A trailing single row cannot be batch-normalized; fold it into its predecessor.
        if (need_pairs && batches.size() > 1 && batches.back().size() < 2) {
            auto tail = batches.back();
            batches.pop_back();
            batches.back().insert(batches.back().end(), tail.begin(), tail.end());
        }
        const bool all_have_events = std::all_of(batches.begin(), batches.end(), [&](const auto& b) {
            return std::any_of(b.begin(), b.end(),
                               [&](Eigen::Index i) { return y.events[static_cast<std::size_t>(i)] != 0; });
        });
        if (all_have_events) return batches;
    }
    throw ValidationError("could not draw minibatches that all contain an event");
}

Matrix gather_rows(const Matrix& x, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
    return out;
}

void check_labels(const Matrix& x, const SurvivalLabels& y, const char* what) {
    if (static_cast<std::size_t>(x.rows()) != y.times.size() || y.times.size() != y.events.size()) {
        throw ValidationError(std::string(what) + ": features and labels differ in length");
    }
    if (std::none_of(y.events.begin(), y.events.end(), [](auto e) { return e != 0; })) {
        throw ValidationError(std::string(what) + ": no events");
    }
}

}  // namespace

TrainResult train(const MlpModel& initial, const Matrix& train_x, const SurvivalLabels& train_y,
                  const Matrix& val_x, const SurvivalLabels& val_y, const TrainConfig& config,
                  const TrainHooks& hooks) {
    check_labels(train_x, train_y, "training set");
    check_labels(val_x, val_y, "validation set");
    if (config.patience < 1) throw ValidationError("patience must be at least 1");
    if (!(config.min_delta >= 0.0)) throw ValidationError("min_delta must be non-negative");
    if (config.max_epochs < 1) throw ValidationError("max_epochs must be at least 1");

    MlpModel model = initial;
    MlpModel best = initial;
    TrainHistory history;
    history.best_val_loss = std::numeric_limits<double>::infinity();
    AdamState adam;
    Rng rng(config.seed);
    const bool need_pairs = !model.norms.empty();
    int since_improvement = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto batches = make_batches(train_y, config.batch_size, need_pairs, rng);
        double loss_sum = 0.0;
        for (const auto& rows : batches) {
            SurvivalLabels by;
            for (auto i : rows) {
                by.times.push_back(train_y.times[static_cast<std::size_t>(i)]);
                by.events.push_back(train_y.events[static_cast<std::size_t>(i)]);
            }
            const Matrix bx = batches.size() == 1 ? train_x : gather_rows(train_x, rows);
            LossAndGradient lg;
            try {
                lg = npll_parameter_gradient(model, bx, by.times, by.events, Mode::train, rng);
            } catch (const DivergenceError&) {
                throw DivergenceError("non-finite risk scores at epoch " + std::to_string(epoch), epoch);
            }
            if (!std::isfinite(lg.loss)) {
                throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch), epoch);
            }
            auto params = model.flat_parameters();
            adamw_step(params, lg.gradient, adam, config);
            model.set_flat_parameters(params);
            loss_sum += lg.loss;
        }
        model.mode = Mode::eval;
        const auto val_scores = predict_risk(model, val_x);
        if (std::any_of(val_scores.begin(), val_scores.end(), [](double s) { return !std::isfinite(s); })) {
            throw DivergenceError("non-finite validation scores at epoch " + std::to_string(epoch), epoch);
        }
        double val_loss = cox_npll(val_scores, val_y.times, val_y.events);
        if (hooks.validation_override) val_loss = hooks.validation_override(epoch, val_loss);
        if (!std::isfinite(val_loss)) {
            throw DivergenceError("non-finite validation loss at epoch " + std::to_string(epoch), epoch);
        }
        history.train_loss.push_back(loss_sum / static_cast<double>(batches.size()));
        history.val_loss.push_back(val_loss);
        if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, model);

        if (history.best_val_loss - val_loss > config.min_delta) {
            history.best_val_loss = val_loss;
            history.best_epoch = epoch;
            best = model;
            since_improvement = 0;
        } else if (++since_improvement >= config.patience) {
            history.stop_reason = StopReason::early_stop;
            break;
        }
    }
    best.mode = Mode::eval;
    return {std::move(best), std::move(history)};
}

nlohmann::ordered_json to_json(const MlpConfig& c) {
    nlohmann::ordered_json j;
    j["input_dim"] = c.input_dim;
    j["hidden_dims"] = c.hidden_dims;
    j["dropout_rate"] = c.dropout_rate;
    j["batchnorm"] = c.batchnorm;
    j["seed"] = c.seed;
    j["bn_momentum"] = c.bn_momentum;
    j["bn_epsilon"] = c.bn_epsilon;
    return j;
}

MlpConfig mlp_config_from_json(const nlohmann::json& j) {
    MlpConfig c;
    c.input_dim = j.value("input_dim", c.input_dim);
    c.hidden_dims = j.value("hidden_dims", c.hidden_dims);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.batchnorm = j.value("batchnorm", c.batchnorm);
    c.seed = j.value("seed", c.seed);
    c.bn_momentum = j.value("bn_momentum", c.bn_momentum);
    c.bn_epsilon = j.value("bn_epsilon", c.bn_epsilon);
    return c;
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
    nlohmann::ordered_json j;
    j["learning_rate"] = c.learning_rate;
    j["weight_decay"] = c.weight_decay;
    j["max_epochs"] = c.max_epochs;
    j["patience"] = c.patience;
    j["min_delta"] = c.min_delta;
    j["batch_size"] = c.batch_size;
    j["seed"] = c.seed;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["adam_epsilon"] = c.adam_epsilon;
    return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.min_delta = j.value("min_delta", c.min_delta);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    return c;
}

nlohmann::ordered_json to_json(const TrainHistory& h) {
    nlohmann::ordered_json j;
    j["best_epoch"] = h.best_epoch;
    j["best_val_loss"] = h.best_val_loss;
    j["stop_reason"] = to_string(h.stop_reason);
    j["epochs_run"] = h.val_loss.size();
    j["threads"] = h.threads;
    j["train_loss"] = h.train_loss;
    j["val_loss"] = h.val_loss;
    return j;
}

namespace {

nlohmann::ordered_json matrix_json(const MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    }
    return flat;
}

VectorXd vector_from(const nlohmann::json& j, Eigen::Index expected, const char* what) {
    const auto v = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != expected) {
        throw ValidationError(std::string("checkpoint: wrong size for ") + what);
    }
    return Eigen::Map<const VectorXd>(v.data(), expected);
}

}  // namespace

nlohmann::ordered_json to_json(const MlpModel& model) {
    nlohmann::ordered_json j;
    j["config"] = to_json(model.config);
    auto layers = nlohmann::ordered_json::array();
    for (const auto& d : model.dense) {
        nlohmann::ordered_json lj;
        lj["rows"] = d.weight.rows();
        lj["cols"] = d.weight.cols();
        lj["weight"] = matrix_json(d.weight);
        lj["bias"] = std::vector<double>(d.bias.data(), d.bias.data() + d.bias.size());
        layers.push_back(std::move(lj));
    }
    j["dense"] = std::move(layers);
    auto norms = nlohmann::ordered_json::array();
    for (const auto& b : model.norms) {
        nlohmann::ordered_json bj;
        bj["gamma"] = to_std(b.gamma);
        bj["beta"] = to_std(b.beta);
        bj["running_mean"] = to_std(b.running_mean);
        bj["running_var"] = to_std(b.running_var);
        norms.push_back(std::move(bj));
    }
    j["batchnorm"] = std::move(norms);
    return j;
}

MlpModel mlp_from_json(const nlohmann::json& j) {
    MlpModel model = build_mlp(mlp_config_from_json(j.at("config")));
    const auto& layers = j.at("dense");
    if (layers.size() != model.dense.size()) throw ValidationError("checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < model.dense.size(); ++l) {
        auto& d = model.dense[l];
        const auto w = vector_from(layers[l].at("weight"), d.weight.size(), "weight");
        for (Eigen::Index r = 0; r < d.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < d.weight.cols(); ++c) d.weight(r, c) = w(r * d.weight.cols() + c);
        }
        d.bias = vector_from(layers[l].at("bias"), d.bias.size(), "bias");
    }
    const auto& norms = j.at("batchnorm");
    if (norms.size() != model.norms.size()) throw ValidationError("checkpoint: batchnorm count mismatch");
    for (std::size_t l = 0; l < model.norms.size(); ++l) {
        auto& b = model.norms[l];
        const auto width = b.gamma.size();
        b.gamma = vector_from(norms[l].at("gamma"), width, "gamma");
        b.beta = vector_from(norms[l].at("beta"), width, "beta");
        b.running_mean = vector_from(norms[l].at("running_mean"), width, "running_mean");
        b.running_var = vector_from(norms[l].at("running_var"), width, "running_var");
    }
    model.mode = Mode::eval;
    return model;
}

}  // namespace survfuse
