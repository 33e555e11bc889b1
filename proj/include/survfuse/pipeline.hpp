#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "survfuse/cohort.hpp"
#include "survfuse/coxmath.hpp"
#include "survfuse/features.hpp"
#include "survfuse/metrics.hpp"
#include "survfuse/neural.hpp"
#include "survfuse/reports.hpp"

namespace survfuse {

enum class ModelFamily { linear_cox, mlp };
std::string_view to_string(ModelFamily family);

struct SplitSettings {
    double ratio = 0.8;
    std::uint64_t seed = 42;
    std::optional<Site> external_site = Site::external;
};

struct EvaluationSettings {
    int bootstrap = 1000;
    double level = 0.95;
    std::uint64_t seed = 45;
    ResampleUnit unit = ResampleUnit::sample;
    double stratification_threshold = 0.0;
};

struct ExperimentConfig {
    std::filesystem::path cohort;
    double horizon_months = 60.0;
    std::map<std::string, std::filesystem::path> feature_paths;  // block -> CSV
    std::vector<std::string> blocks;                             // fused, in this order
    std::vector<std::string> standardize_blocks{"radiomics"};
    std::optional<double> correlation_threshold;                 // nullopt = keep all
    std::vector<std::string> selection_blocks{"radiomics"};
    SplitSettings split;
    ModelFamily model = ModelFamily::mlp;
    MlpConfig mlp;
    TrainConfig train;
    EvaluationSettings evaluation;
    std::filesystem::path out_dir = "out";
};

// Sets split, init, training and bootstrap seeds to seed, seed+1, seed+2, seed+3.
void apply_master_seed(ExperimentConfig& config, std::uint64_t seed);

// Relative paths resolve against `base_dir` (normally the config file's directory).
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ExperimentConfig& config);

// Inputs read once and shared by every run of a sweep.
struct ExperimentData {
    Cohort cohort;
    std::map<std::string, FeatureTable> blocks;  // rows aligned to the cohort
    SplitAssignment split;
};

ExperimentData load_experiment_data(const ExperimentConfig& config);

struct Preprocessing {
    std::vector<std::string> blocks;
    std::map<std::string, StandardizationParams> standardizers;  // by block
    std::map<std::string, SelectionMask> selections;             // by block
    std::vector<std::string> columns;                 // final fused column keys
};

// Standardize, select and fuse the configured blocks for all cohort samples.
FeatureTable apply_preprocessing(const Preprocessing& prep,
                                 const std::map<std::string, FeatureTable>& blocks);

struct TrainedModel {
    ModelFamily family = ModelFamily::mlp;
    std::optional<MlpModel> mlp;
    std::optional<LinearCoxModel> linear;

    std::vector<double> predict(const FeatureTable& features) const;
};

struct TrainOutcome {
    Preprocessing preprocessing;
    TrainedModel model;
    std::optional<TrainHistory> history;
    std::size_t input_dim = 0;
    CIndexResult internal;
    std::optional<CIndexResult> external;
};

TrainOutcome run_training(const ExperimentConfig& config, const ExperimentData& data);

nlohmann::ordered_json checkpoint_json(const ExperimentConfig& config, const TrainOutcome& outcome);
struct Checkpoint {
    Preprocessing preprocessing;
    TrainedModel model;
};
Checkpoint checkpoint_from_json(const nlohmann::json& j);
nlohmann::ordered_json metrics_json(const ExperimentConfig& config, const TrainOutcome& outcome);

// Writes checkpoint.json, metrics.json, history.json (MLP), split.csv and table.md.
TrainOutcome cmd_train(const ExperimentConfig& config);

struct EvalOutcome {
    std::vector<std::string> sample_ids;
    std::vector<double> scores;
    CIndexResult cindex;
    std::vector<RiskGroup> groups;
    std::optional<LogRankResult> log_rank;  // absent when stratification is one-sided
    std::vector<std::pair<std::string, KmCurve>> curves;
};

// `which` selects "all", "train", "validation" or "test" samples of the cohort.
EvalOutcome run_evaluation(const ExperimentConfig& config, const Checkpoint& checkpoint,
                           const ExperimentData& data, const std::string& which);
// Writes eval_metrics.json, scores.csv, km.csv and table.md/.csv in config.out_dir.
EvalOutcome cmd_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint_path,
                     const std::string& which = "all");

struct SweepPoint {
    std::string label;
    std::optional<double> threshold;          // threshold sweeps
    std::vector<std::string> blocks;          // section sweeps (empty: keep config)
};

struct AblationRow {
    SweepPoint point;
    std::string status = "ok";  // or the error message
    std::size_t input_dim = 0;
    std::optional<std::size_t> retained;     // features kept by the correlation filter
    std::optional<bool> pairwise_check;      // post-hoc |r| < t verification
    std::optional<CIndexResult> internal;
    std::optional<CIndexResult> external;
};

std::vector<SweepPoint> threshold_sweep(const std::vector<std::optional<double>>& thresholds);
std::vector<SweepPoint> section_sweep(const std::vector<std::vector<std::string>>& combinations);
// The ten text-block combinations compared in the ablation table.
std::vector<std::vector<std::string>> default_section_combinations();
std::vector<std::optional<double>> default_thresholds();

std::vector<AblationRow> run_ablation(const ExperimentConfig& config, const ExperimentData& data,
                                      const std::vector<SweepPoint>& sweep);
std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string ablation_markdown(const std::vector<AblationRow>& rows);
// Writes ablation.csv and ablation.md in config.out_dir.
std::vector<AblationRow> cmd_ablate(const ExperimentConfig& config, const std::vector<SweepPoint>& sweep);

struct SectionSummary {
    std::size_t reports = 0;
    std::array<std::size_t, 4> sentences{};
    std::array<std::size_t, 4> placeholders{};
};

// clean -> segment -> pancreas -> placeholders -> bundles.jsonl in out_dir.
SectionSummary cmd_sections(const std::filesystem::path& input, const ReportConfig& config,
                            const std::vector<Category>& categories,
                            const std::filesystem::path& out_dir);
std::string format_section_summary(const SectionSummary& summary);

}  // namespace survfuse
