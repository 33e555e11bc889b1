#include "survfuse/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "survfuse/error.hpp"
#include "survfuse/io.hpp"

namespace survfuse {

std::string_view to_string(ModelFamily family) {
    return family == ModelFamily::mlp ? "mlp" : "linear_cox";
}

void apply_master_seed(ExperimentConfig& config, std::uint64_t seed) {
    config.split.seed = seed;
    config.mlp.seed = seed + 1;
    config.train.seed = seed + 2;
    config.evaluation.seed = seed + 3;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    try {
        if (j.contains("seed")) apply_master_seed(c, j.at("seed").get<std::uint64_t>());
        if (j.contains("cohort")) c.cohort = resolve(base_dir, j.at("cohort").get<std::string>());
        c.horizon_months = j.value("horizon_months", c.horizon_months);
        if (j.contains("features")) {
            for (const auto& [block, path] : j.at("features").items()) {
                c.feature_paths[block] = resolve(base_dir, path.get<std::string>());
            }
        }
        c.blocks = j.value("blocks", c.blocks);
        if (c.blocks.empty()) {
            for (const auto& [block, path] : c.feature_paths) c.blocks.push_back(block);
        }
        c.standardize_blocks = j.value("standardize_blocks", c.standardize_blocks);
        c.selection_blocks = j.value("selection_blocks", c.selection_blocks);
        if (j.contains("correlation_threshold")) {
            const auto& t = j.at("correlation_threshold");
            if (t.is_string()) {
                if (t.get<std::string>() != "all") throw ValidationError("correlation_threshold must be a number or \"all\"");
            } else if (!t.is_null()) {
                c.correlation_threshold = t.get<double>();
            }
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            c.split.ratio = s.value("ratio", c.split.ratio);
            c.split.seed = s.value("seed", c.split.seed);
            if (s.contains("external_site")) {
                const auto& e = s.at("external_site");
                if (e.is_null() || (e.is_string() && e.get<std::string>() == "none")) {
                    c.split.external_site.reset();
                } else {
                    auto site = parse_site(e.get<std::string>());
                    if (!site) throw ValidationError("unknown external_site " + e.get<std::string>());
                    c.split.external_site = *site;
                }
            }
        }
        if (j.contains("model")) {
            const auto m = j.at("model").get<std::string>();
            if (m == "mlp") {
                c.model = ModelFamily::mlp;
            } else if (m == "linear_cox") {
                c.model = ModelFamily::linear_cox;
            } else {
                throw ValidationError("model must be \"mlp\" or \"linear_cox\"");
            }
        }
        if (j.contains("mlp")) {
            const auto seed = c.mlp.seed;
            c.mlp = mlp_config_from_json(j.at("mlp"));
            if (!j.at("mlp").contains("seed")) c.mlp.seed = seed;
        }
        if (j.contains("train")) {
            const auto seed = c.train.seed;
            c.train = train_config_from_json(j.at("train"));
            if (!j.at("train").contains("seed")) c.train.seed = seed;
        }
        if (j.contains("evaluation")) {
            const auto& e = j.at("evaluation");
            c.evaluation.bootstrap = e.value("bootstrap", c.evaluation.bootstrap);
            c.evaluation.level = e.value("level", c.evaluation.level);
            c.evaluation.seed = e.value("seed", c.evaluation.seed);
            c.evaluation.stratification_threshold =
                e.value("stratification_threshold", c.evaluation.stratification_threshold);
            const auto unit = e.value("resample", std::string("sample"));
            if (unit == "sample") {
                c.evaluation.unit = ResampleUnit::sample;
            } else if (unit == "subject") {
                c.evaluation.unit = ResampleUnit::subject;
            } else {
                throw ValidationError("evaluation.resample must be \"sample\" or \"subject\"");
            }
        }
        if (j.contains("out")) c.out_dir = resolve(base_dir, j.at("out").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed experiment config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("cannot parse " + path.string() + ": " + e.what());
    }
    return experiment_config_from_json(j, path.parent_path());
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["cohort"] = c.cohort.generic_string();
    j["horizon_months"] = c.horizon_months;
    nlohmann::ordered_json feats = nlohmann::ordered_json::object();
    for (const auto& [b, p] : c.feature_paths) feats[b] = p.generic_string();
    j["features"] = feats;
    j["blocks"] = c.blocks;
    j["standardize_blocks"] = c.standardize_blocks;
    j["selection_blocks"] = c.selection_blocks;
    if (c.correlation_threshold) {
        j["correlation_threshold"] = *c.correlation_threshold;
    } else {
        j["correlation_threshold"] = "all";
    }
    j["split"] = {{"ratio", c.split.ratio},
                  {"seed", c.split.seed},
                  {"external_site", c.split.external_site ? std::string(to_string(*c.split.external_site))
                                                          : std::string("none")}};
    j["model"] = to_string(c.model);
    j["mlp"] = to_json(c.mlp);
    j["train"] = to_json(c.train);
    j["evaluation"] = {{"bootstrap", c.evaluation.bootstrap},
                       {"level", c.evaluation.level},
                       {"seed", c.evaluation.seed},
                       {"resample", c.evaluation.unit == ResampleUnit::sample ? "sample" : "subject"},
                       {"stratification_threshold", c.evaluation.stratification_threshold}};
    j["out"] = c.out_dir.generic_string();
    return j;
}

ExperimentData load_experiment_data(const ExperimentConfig& config) {
    if (config.cohort.empty()) throw ValidationError("experiment config has no cohort path");
    ExperimentData data{load_cohort(config.cohort, config.horizon_months), {}, {}};
    const auto ids = data.cohort.sample_ids();
    for (const auto& [block, path] : config.feature_paths) {
        auto table = load_feature_table(path, block);
        try {
            data.blocks.emplace(block, table.select_rows(ids));
        } catch (const ValidationError& e) {
            throw ValidationError("block " + block + " is not aligned with the cohort: " + e.what());
        }
    }
    data.split = split_by_subject(data.cohort, config.split.ratio, config.split.seed,
                                  config.split.external_site);
    return data;
}

namespace {

// One block after standardization and (optionally) selection.
FeatureTable prepare_block(const Preprocessing& prep, const FeatureTable& raw, const std::string& block,
                           bool with_selection = true) {
    FeatureTable t = raw;
    if (auto it = prep.standardizers.find(block); it != prep.standardizers.end()) {
        t = apply_standardizer(t, it->second);
    }
    if (with_selection) {
        if (auto it = prep.selections.find(block); it != prep.selections.end()) {
            t = apply_selection(t, it->second);
        }
    }
    return t;
}

const FeatureTable& block_of(const std::map<std::string, FeatureTable>& blocks, const std::string& b) {
    auto it = blocks.find(b);
    if (it == blocks.end()) throw ValidationError("no feature table for block " + b);
    return it->second;
}

SurvivalLabels labels_for(const Cohort& cohort, const std::vector<std::string>& ids) {
    SurvivalLabels y;
    for (const auto& id : ids) {
        const auto& r = cohort.records()[*cohort.index_of(id)];
        y.times.push_back(r.time_months);
        y.events.push_back(r.event ? 1 : 0);
    }
    return y;
}

CIndexResult evaluate_scores(const ExperimentConfig& config, const Cohort& cohort,
                             const std::vector<std::string>& ids, const std::vector<double>& scores) {
    const auto y = labels_for(cohort, ids);
    auto result = concordance_index(y.times, y.events, scores);
    BootstrapOptions opts;
    opts.replicates = config.evaluation.bootstrap;
    opts.seed = config.evaluation.seed;
    opts.level = config.evaluation.level;
    opts.unit = config.evaluation.unit;
    std::vector<std::string> subjects;
    if (opts.unit == ResampleUnit::subject) {
        for (const auto& id : ids) subjects.push_back(cohort.records()[*cohort.index_of(id)].subject_id);
    }
    result.ci = bootstrap_ci(y.times, y.events, scores, opts, subjects);
    return result;
}

}  // namespace

FeatureTable apply_preprocessing(const Preprocessing& prep,
                                 const std::map<std::string, FeatureTable>& blocks) {
    std::vector<FeatureTable> tables;
    for (const auto& b : prep.blocks) tables.push_back(prepare_block(prep, block_of(blocks, b), b));
    auto fused = fuse_concat(tables);
    if (!prep.columns.empty() && fused.column_keys() != prep.columns) {
        throw ValidationError("column mismatch between checkpoint and feature tables");
    }
    return fused;
}

std::vector<double> TrainedModel::predict(const FeatureTable& features) const {
    if (family == ModelFamily::mlp) {
        if (!mlp) throw ValidationError("checkpoint has no MLP weights");
        return predict_risk(*mlp, features);
    }
    if (!linear) throw ValidationError("checkpoint has no linear Cox coefficients");
    return predict_linear_risk(*linear, features);
}

TrainOutcome run_training(const ExperimentConfig& config, const ExperimentData& data) {
    if (config.blocks.empty()) throw ValidationError("no feature blocks selected");
    const auto train_ids = data.split.samples(data.cohort, Split::train);
    const auto val_ids = data.split.samples(data.cohort, Split::validation);
    const auto test_ids = data.split.samples(data.cohort, Split::test);
    if (train_ids.empty() || val_ids.empty()) throw ValidationError("empty train or validation split");

    TrainOutcome outcome;
    auto& prep = outcome.preprocessing;
    prep.blocks = config.blocks;
    for (const auto& b : config.blocks) {
        const auto& raw = block_of(data.blocks, b);
        if (contains(config.standardize_blocks, b)) {
            prep.standardizers[b] = fit_standardizer(raw, train_ids);
        }
        if (config.correlation_threshold && contains(config.selection_blocks, b)) {
            const auto standardized = prepare_block(prep, raw, b, false);
            prep.selections[b] = select_by_correlation(standardized, train_ids, *config.correlation_threshold);
        }
    }
    const auto fused = apply_preprocessing(prep, data.blocks);
    prep.columns = fused.column_keys();
    outcome.input_dim = static_cast<std::size_t>(fused.cols());

    const auto train_x = fused.select_rows(train_ids);
    const auto val_x = fused.select_rows(val_ids);
    const auto train_y = labels_for(data.cohort, train_ids);
    const auto val_y = labels_for(data.cohort, val_ids);

    outcome.model.family = config.model;
    if (config.model == ModelFamily::mlp) {
        auto mlp_config = config.mlp;
        mlp_config.input_dim = outcome.input_dim;
        auto result = train(build_mlp(mlp_config), train_x.values(), train_y, val_x.values(), val_y,
                            config.train);
        outcome.model.mlp = std::move(result.model);
        outcome.history = std::move(result.history);
    } else {
        outcome.model.linear = fit_linear_coxph(train_x, train_y.times, train_y.events);
    }

    outcome.internal = evaluate_scores(config, data.cohort, val_ids, outcome.model.predict(val_x));
    if (!test_ids.empty()) {
        outcome.external = evaluate_scores(config, data.cohort, test_ids,
                                           outcome.model.predict(fused.select_rows(test_ids)));
    }
    return outcome;
}

namespace {

nlohmann::ordered_json seeds_json(const ExperimentConfig& c) {
    return {{"split", c.split.seed},
            {"init", c.mlp.seed},
            {"train", c.train.seed},
            {"bootstrap", c.evaluation.seed}};
}

nlohmann::ordered_json preprocessing_json(const Preprocessing& p) {
    nlohmann::ordered_json j;
    j["blocks"] = p.blocks;
    nlohmann::ordered_json std_json = nlohmann::ordered_json::object();
    for (const auto& [b, s] : p.standardizers) std_json[b] = to_json(s);
    j["standardizers"] = std_json;
    nlohmann::ordered_json sel = nlohmann::ordered_json::object();
    for (const auto& [b, m] : p.selections) sel[b] = to_json(m);
    j["selections"] = sel;
    j["columns"] = p.columns;
    return j;
}

std::string table_markdown(const std::string& model, const CIndexResult& internal,
                           const std::optional<CIndexResult>& external) {
    std::string out = "| Model | Internal Validation | External Validation |\n|---|---|---|\n";
    out += "| " + model + " | " + format_cindex_row(internal) + " | " +
           (external ? format_cindex_row(*external) : std::string("n/a")) + " |\n";
    return out;
}

std::string describe_model(const ExperimentConfig& c, std::size_t input_dim) {
    std::string blocks;
    for (const auto& b : c.blocks) blocks += (blocks.empty() ? "" : "+") + b;
    return std::string(to_string(c.model)) + " (" + blocks + ", no. features: " + std::to_string(input_dim) + ")";
}

}  // namespace

nlohmann::ordered_json checkpoint_json(const ExperimentConfig& config, const TrainOutcome& outcome) {
    nlohmann::ordered_json j;
    j["format"] = "survfuse-checkpoint";
    j["version"] = 1;
    j["model_family"] = to_string(outcome.model.family);
    j["preprocessing"] = preprocessing_json(outcome.preprocessing);
    if (outcome.model.mlp) {
        j["model"] = to_json(*outcome.model.mlp);
        j["train"] = to_json(config.train);
    } else {
        j["model"] = to_json(*outcome.model.linear);
    }
    j["seeds"] = seeds_json(config);
    return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", std::string()) != "survfuse-checkpoint") {
            throw ValidationError("not a survfuse checkpoint");
        }
        Checkpoint ck;
        const auto& p = j.at("preprocessing");
        ck.preprocessing.blocks = p.at("blocks").get<std::vector<std::string>>();
        for (const auto& [b, s] : p.at("standardizers").items()) {
            ck.preprocessing.standardizers[b] = standardizer_from_json(s);
        }
        for (const auto& [b, m] : p.at("selections").items()) {
            ck.preprocessing.selections[b] = selection_from_json(m);
        }
        ck.preprocessing.columns = p.at("columns").get<std::vector<std::string>>();
        const auto family = j.at("model_family").get<std::string>();
        if (family == "mlp") {
            ck.model.family = ModelFamily::mlp;
            ck.model.mlp = mlp_from_json(j.at("model"));
        } else if (family == "linear_cox") {
            ck.model.family = ModelFamily::linear_cox;
            ck.model.linear = linear_cox_from_json(j.at("model"));
        } else {
            throw ValidationError("unknown model family " + family);
        }
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed checkpoint: ") + e.what());
    }
}

nlohmann::ordered_json metrics_json(const ExperimentConfig& config, const TrainOutcome& outcome) {
    nlohmann::ordered_json j;
    j["model_family"] = to_string(config.model);
    j["blocks"] = config.blocks;
    j["input_dim"] = outcome.input_dim;
    if (config.correlation_threshold) {
        j["correlation_threshold"] = *config.correlation_threshold;
    } else {
        j["correlation_threshold"] = "all";
    }
    nlohmann::ordered_json retained = nlohmann::ordered_json::object();
    for (const auto& [b, m] : outcome.preprocessing.selections) retained[b] = m.retained.size();
    j["retained"] = retained;
    j["seeds"] = seeds_json(config);
    j["internal"] = to_json(outcome.internal);
    j["internal_row"] = format_cindex_row(outcome.internal);
    if (outcome.external) {
        j["external"] = to_json(*outcome.external);
        j["external_row"] = format_cindex_row(*outcome.external);
    } else {
        j["external"] = nullptr;
    }
    if (outcome.history) {
        j["best_epoch"] = outcome.history->best_epoch;
        j["stop_reason"] = to_string(outcome.history->stop_reason);
        j["epochs_run"] = outcome.history->val_loss.size();
    }
    return j;
}

TrainOutcome cmd_train(const ExperimentConfig& config) {
    const auto data = load_experiment_data(config);
    auto outcome = run_training(config, data);
    const auto& out = config.out_dir;
    io::write_atomic(out / "checkpoint.json", checkpoint_json(config, outcome).dump() + "\n");
    io::write_atomic(out / "metrics.json", metrics_json(config, outcome).dump(2) + "\n");
    if (outcome.history) io::write_atomic(out / "history.json", to_json(*outcome.history).dump(2) + "\n");
    std::string split_csv = "subject_id,split\n";
    for (const auto& [subject, split] : data.split.by_subject) {
        split_csv += io::csv_escape(subject) + "," + std::string(to_string(split)) + "\n";
    }
    io::write_atomic(out / "split.csv", split_csv);
    io::write_atomic(out / "table.md",
                     table_markdown(describe_model(config, outcome.input_dim), outcome.internal, outcome.external));
    io::write_atomic(out / "config.json", to_json(config).dump(2) + "\n");
    return outcome;
}

EvalOutcome run_evaluation(const ExperimentConfig& config, const Checkpoint& checkpoint,
                           const ExperimentData& data, const std::string& which) {
    std::vector<std::string> ids;
    if (which == "all") {
        ids = data.cohort.sample_ids();
    } else if (which == "train") {
        ids = data.split.samples(data.cohort, Split::train);
    } else if (which == "validation") {
        ids = data.split.samples(data.cohort, Split::validation);
    } else if (which == "test") {
        ids = data.split.samples(data.cohort, Split::test);
    } else {
        throw ValidationError("unknown evaluation subset " + which);
    }
    if (ids.empty()) throw ValidationError("evaluation subset '" + which + "' is empty");

    const auto features = apply_preprocessing(checkpoint.preprocessing, data.blocks).select_rows(ids);
    EvalOutcome out;
    out.sample_ids = ids;
    out.scores = checkpoint.model.predict(features);
    out.cindex = evaluate_scores(config, data.cohort, ids, out.scores);
    out.groups = stratify(out.scores, config.evaluation.stratification_threshold);

    const auto y = labels_for(data.cohort, ids);
    for (auto g : {RiskGroup::low, RiskGroup::high}) {
        std::vector<double> t;
        std::vector<std::uint8_t> e;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (out.groups[i] == g) {
                t.push_back(y.times[i]);
                e.push_back(y.events[i]);
            }
        }
        if (!t.empty()) out.curves.emplace_back(g == RiskGroup::low ? "low" : "high", kaplan_meier(t, e));
    }
    if (out.curves.size() == 2) {
        try {
            out.log_rank = log_rank_test(out.groups, y.times, y.events);
        } catch (const ValidationError&) {
            out.log_rank.reset();
        }
    }
    return out;
}

EvalOutcome cmd_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint_path,
                     const std::string& which) {
    nlohmann::json ckj;
    try {
        ckj = nlohmann::json::parse(io::read_text(checkpoint_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("cannot parse checkpoint: " + std::string(e.what()));
    }
    const auto checkpoint = checkpoint_from_json(ckj);
    const auto data = load_experiment_data(config);
    auto out = run_evaluation(config, checkpoint, data, which);

    std::size_t n_high = 0;
    for (auto g : out.groups) n_high += g == RiskGroup::high ? 1 : 0;
    nlohmann::ordered_json j;
    j["subset"] = which;
    j["n"] = out.sample_ids.size();
    j["cindex"] = to_json(out.cindex);
    j["row"] = format_cindex_row(out.cindex);
    j["stratification"] = {{"threshold", config.evaluation.stratification_threshold},
                           {"n_high", n_high},
                           {"n_low", out.sample_ids.size() - n_high}};
    if (out.log_rank) {
        j["log_rank"] = {{"statistic", out.log_rank->statistic},
                         {"p_value", out.log_rank->p_value},
                         {"p_display", format_p_value(out.log_rank->p_value)}};
    } else {
        j["log_rank"] = "not applicable";
    }
    j["seeds"] = seeds_json(config);

    const auto& dir = config.out_dir;
    io::write_atomic(dir / "eval_metrics.json", j.dump(2) + "\n");
    std::string scores = "sample_id,score,group\n";
    for (std::size_t i = 0; i < out.sample_ids.size(); ++i) {
        scores += io::csv_escape(out.sample_ids[i]) + "," + io::format_double(out.scores[i]) + "," +
                  (out.groups[i] == RiskGroup::high ? "high" : "low") + "\n";
    }
    io::write_atomic(dir / "scores.csv", scores);
    km_export(out.curves, dir / "km.csv");
    const std::string p_text = out.log_rank ? format_p_value(out.log_rank->p_value) : "not applicable";
    io::write_atomic(dir / "eval_table.md",
                     "| Subset | C-index | Log-rank p |\n|---|---|---|\n| " + which + " | " +
                         format_cindex_row(out.cindex) + " | " + p_text + " |\n");
    io::write_atomic(dir / "eval_table.csv", "subset,cindex,log_rank_p\n" + which + ",\"" +
                                                 format_cindex_row(out.cindex) + "\"," + p_text + "\n");
    return out;
}

std::vector<std::optional<double>> default_thresholds() {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, std::nullopt};
}

std::vector<std::vector<std::string>> default_section_combinations() {
    return {{"impressions"},
            {"findings"},
            {"pancreas"},
            {"indications"},
            {"indications", "findings"},
            {"indications", "impressions"},
            {"indications", "pancreas"},
            {"indications", "pancreas", "impressions"},
            {"indications", "pancreas", "findings"},
            {"indications", "findings", "impressions", "pancreas"}};
}

std::vector<SweepPoint> threshold_sweep(const std::vector<std::optional<double>>& thresholds) {
    std::vector<SweepPoint> out;
    for (const auto& t : thresholds) {
        SweepPoint p;
        p.threshold = t;
        if (t) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "threshold < %g", *t);
            p.label = buf;
        } else {
            p.label = "all";
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<SweepPoint> section_sweep(const std::vector<std::vector<std::string>>& combinations) {
    std::vector<SweepPoint> out;
    for (const auto& combo : combinations) {
        SweepPoint p;
        p.blocks = combo;
        for (const auto& b : combo) {
            std::string name = b;
            if (!name.empty()) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
            p.label += (p.label.empty() ? "" : ", ") + name;
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& config, const ExperimentData& data,
                                      const std::vector<SweepPoint>& sweep) {
    if (sweep.empty()) throw ValidationError("empty sweep");
    std::vector<AblationRow> rows;
    for (const auto& point : sweep) {
        AblationRow row;
        row.point = point;
        ExperimentConfig sub = config;
        if (!point.blocks.empty()) {
            sub.blocks = point.blocks;
        } else {
            sub.correlation_threshold = point.threshold;
        }
        try {
            const auto outcome = run_training(sub, data);
            row.input_dim = outcome.input_dim;
            row.internal = outcome.internal;
            row.external = outcome.external;
            if (point.blocks.empty()) {
                // Features that went through the correlation filter (or would have).
                std::size_t retained = 0;
                bool check = true;
                const auto train_ids = data.split.samples(data.cohort, Split::train);
                for (const auto& b : sub.blocks) {
                    if (!contains(sub.selection_blocks, b)) continue;
                    auto it = outcome.preprocessing.selections.find(b);
                    if (it == outcome.preprocessing.selections.end()) {
                        retained += static_cast<std::size_t>(block_of(data.blocks, b).cols());
                        continue;
                    }
                    retained += it->second.retained.size();
                    const auto table = prepare_block(outcome.preprocessing, block_of(data.blocks, b), b);
                    const auto rows_idx = table.row_indices(train_ids);
                    for (Eigen::Index a = 0; a < table.cols() && check; ++a) {
                        for (Eigen::Index c = a + 1; c < table.cols(); ++c) {
                            if (std::abs(pearson(table.values(), a, c, rows_idx)) >= *point.threshold) {
                                check = false;
                                break;
                            }
                        }
                    }
                }
                row.retained = retained;
                if (point.threshold) row.pairwise_check = check;
            }
        } catch (const std::exception& e) {
            row.status = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = "features,num_features,input_dim,internal_cindex,internal_lower,internal_upper,"
                      "external_cindex,external_lower,external_upper,pairwise_check,status\n";
    auto num = [](const std::optional<CIndexResult>& r, int which) -> std::string {
        if (!r) return "";
        char buf[32];
        const double v = which == 0 ? r->value : which == 1 ? r->ci->lower : r->ci->upper;
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return buf;
    };
    for (const auto& r : rows) {
        out += io::csv_escape(r.point.label) + ",";
        out += (r.retained ? std::to_string(*r.retained) : std::string()) + ",";
        out += std::to_string(r.input_dim) + ",";
        out += num(r.internal, 0) + "," + num(r.internal, 1) + "," + num(r.internal, 2) + ",";
        out += num(r.external, 0) + "," + num(r.external, 1) + "," + num(r.external, 2) + ",";
        out += r.pairwise_check ? (*r.pairwise_check ? "pass" : "fail") : "";
        out += "," + io::csv_escape(r.status) + "\n";
    }
    return out;
}

std::string ablation_markdown(const std::vector<AblationRow>& rows) {
    std::string out = "| Features | Internal Validation | External Validation |\n|---|---|---|\n";
    for (const auto& r : rows) {
        std::string label = r.point.label;
        if (r.retained) label = "Num. features: " + std::to_string(*r.retained) + (r.point.threshold ? ", " + label : "");
        std::string internal = r.internal ? format_cindex_row(*r.internal) : "failed: " + r.status;
        std::string external = r.external ? format_cindex_row(*r.external) : (r.internal ? "n/a" : "failed");
        out += "| " + label + " | " + internal + " | " + external + " |\n";
    }
    return out;
}

std::vector<AblationRow> cmd_ablate(const ExperimentConfig& config, const std::vector<SweepPoint>& sweep) {
    const auto data = load_experiment_data(config);
    auto rows = run_ablation(config, data, sweep);
    io::write_atomic(config.out_dir / "ablation.csv", ablation_csv(rows));
    io::write_atomic(config.out_dir / "ablation.md", ablation_markdown(rows));
    return rows;
}

SectionSummary cmd_sections(const std::filesystem::path& input, const ReportConfig& config,
                            const std::vector<Category>& categories,
                            const std::filesystem::path& out_dir) {
    const auto docs = load_reports(input);
    std::vector<SectionedReport> reports;
    reports.reserve(docs.size());
    SectionSummary summary;
    for (const auto& d : docs) {
        auto r = process_report(d, config);
        for (auto c : kAllCategories) {
            const auto k = static_cast<std::size_t>(c);
            if (r.is_placeholder(c)) {
                ++summary.placeholders[k];
            } else {
                summary.sentences[k] += r[c].size();
            }
        }
        reports.push_back(std::move(r));
    }
    summary.reports = reports.size();
    export_sentence_bundles(reports, categories, out_dir / "bundles.jsonl");
    io::write_atomic(out_dir / "section_summary.md", format_section_summary(summary));
    return summary;
}

std::string format_section_summary(const SectionSummary& s) {
    std::ostringstream out;
    out << "| Category | Sentences | Placeholder rate |\n|---|---|---|\n";
    for (auto c : kAllCategories) {
        const auto k = static_cast<std::size_t>(c);
        char rate[32];
        std::snprintf(rate, sizeof(rate), "%.1f%%",
                      s.reports ? 100.0 * static_cast<double>(s.placeholders[k]) / static_cast<double>(s.reports) : 0.0);
        out << "| " << to_string(c) << " | " << s.sentences[k] << " | " << rate << " (" << s.placeholders[k]
            << "/" << s.reports << ") |\n";
    }
    return out.str();
}

}  // namespace survfuse
