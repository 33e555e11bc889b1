#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "survfuse/features.hpp"
#include "survfuse/rng.hpp"

namespace survfuse {

struct MlpConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims{128, 64};
    double dropout_rate = 0.3;
    bool batchnorm = true;
    std::uint64_t seed = 0;
    double bn_momentum = 0.1;
    double bn_epsilon = 1e-8;
};

enum class Mode { train, eval };

struct DenseLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;
};

struct BatchNormLayer {
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta;
    Eigen::VectorXd running_mean;
    Eigen::VectorXd running_var;
};

// Risk network: [linear -> batchnorm -> ReLU -> dropout] per hidden layer, then a
// linear layer to one output.
struct MlpModel {
    MlpConfig config;
    std::vector<DenseLayer> dense;        // hidden_dims.size() + 1 layers
    std::vector<BatchNormLayer> norms;    // one per hidden layer when batchnorm is on
    Mode mode = Mode::eval;

    // Trainable parameters: weights, biases, batchnorm scale and shift.
    std::size_t parameter_count() const;
    // Non-trainable state: batchnorm running mean and variance.
    std::size_t buffer_count() const;

    // Flat views in a fixed order: per layer weight (row-major) then bias, then
    // batchnorm gamma and beta for that layer.
    std::vector<double> flat_parameters() const;
    void set_flat_parameters(std::span<const double> flat);

    bool operator==(const MlpModel& other) const;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases; batchnorm scale 1,
// shift 0, running stats (0, 1).
MlpModel build_mlp(const MlpConfig& config);

// Train mode uses batch statistics (and updates running stats) and draws dropout
// masks from `rng`; eval mode uses running statistics and no dropout.
std::vector<double> forward(MlpModel& model, const Matrix& batch, Mode mode, Rng& rng);
std::vector<double> predict_risk(const MlpModel& model, const Matrix& features);
std::vector<double> predict_risk(const MlpModel& model, const FeatureTable& features);

// Gradient of the Cox loss with respect to the flat parameters, for one batch.
// Runs a train-mode forward pass (mutating running stats) unless mode is eval.
struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};
LossAndGradient npll_parameter_gradient(MlpModel& model, const Matrix& batch,
                                        std::span<const double> times,
                                        std::span<const std::uint8_t> events, Mode mode,
                                        Rng& rng);

struct TrainConfig {
    double learning_rate = 1e-4;
    double weight_decay = 1e-3;
    int max_epochs = 100;
    int patience = 10;
    double min_delta = 1e-4;
    std::size_t batch_size = 0;  // 0 = full batch
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

enum class StopReason { early_stop, max_epochs };
std::string_view to_string(StopReason reason);

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int best_epoch = 0;  // 1-based
    double best_val_loss = 0.0;
    StopReason stop_reason = StopReason::max_epochs;
    int threads = 1;
};

struct SurvivalLabels {
    std::vector<double> times;
    std::vector<std::uint8_t> events;
};

// Optional instrumentation. `validation_override` replaces the computed validation
// loss for an epoch; `on_epoch_end` sees the model after each epoch's updates.
struct TrainHooks {
    std::function<double(int epoch, double computed)> validation_override;
    std::function<void(int epoch, const MlpModel&)> on_epoch_end;
};

struct TrainResult {
    MlpModel model;  // weights from the best validation epoch, eval mode
    TrainHistory history;
};

// Adam with decoupled weight decay on the normalized Cox loss. After each epoch the
// validation loss is computed in eval mode; training stops once `patience` epochs
// pass without best - current > min_delta.
TrainResult train(const MlpModel& initial, const Matrix& train_x, const SurvivalLabels& train_y,
                  const Matrix& val_x, const SurvivalLabels& val_y, const TrainConfig& config,
                  const TrainHooks& hooks = {});

// One AdamW update on flat parameters (exposed for tests).
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
};
void adamw_step(std::vector<double>& params, std::span<const double> grad, AdamState& state,
                const TrainConfig& config);

nlohmann::ordered_json to_json(const MlpConfig& config);
MlpConfig mlp_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TrainHistory& history);

nlohmann::ordered_json to_json(const MlpModel& model);
MlpModel mlp_from_json(const nlohmann::json& j);

}  // namespace survfuse
