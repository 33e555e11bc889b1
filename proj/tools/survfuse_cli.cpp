// survfuse command-line entry point.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "survfuse/error.hpp"
#include "survfuse/io.hpp"
#include "survfuse/pipeline.hpp"
#include "survfuse/simdata.hpp"

namespace sf = survfuse;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> bootstrap;
    std::string threshold;
    std::string blocks;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_config_required) {
    auto* opt = cmd->add_option("--config", o.config, "experiment config (JSON)");
    if (with_config_required) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed (split, init, training, bootstrap)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--bootstrap", o.bootstrap, "bootstrap replicates");
    cmd->add_option("--threshold", o.threshold, "correlation threshold, or 'all'");
    cmd->add_option("--blocks", o.blocks, "comma-separated feature blocks to fuse");
}

std::optional<double> parse_threshold(const std::string& text) {
    if (text == "all") return std::nullopt;
    auto v = sf::io::parse_double(text);
    if (!v) throw sf::ValidationError("--threshold expects a number or 'all', got '" + text + "'");
    return *v;
}

sf::ExperimentConfig resolve_config(const Overrides& o) {
    auto c = sf::load_experiment_config(o.config);
    if (o.seed) sf::apply_master_seed(c, *o.seed);
    if (!o.out.empty()) c.out_dir = o.out;
    if (o.bootstrap) c.evaluation.bootstrap = *o.bootstrap;
    if (!o.threshold.empty()) c.correlation_threshold = parse_threshold(o.threshold);
    if (!o.blocks.empty()) c.blocks = sf::io::split(o.blocks, ',');
    return c;
}

void print_cindex(const char* label, const sf::CIndexResult& r) {
    std::printf("%s C-index: %s\n", label, sf::format_cindex_row(r).c_str());
}

int run_sections(const std::string& input, const std::string& report_config, const std::string& categories,
                 const std::string& out) {
    sf::ReportConfig rc = sf::ReportConfig::defaults();
    if (!report_config.empty()) {
        try {
            rc = sf::report_config_from_json(nlohmann::json::parse(sf::io::read_text(report_config)));
        } catch (const nlohmann::json::exception& e) {
            throw sf::ValidationError("malformed report config: " + std::string(e.what()));
        }
    }
    std::vector<sf::Category> cats(sf::kAllCategories.begin(), sf::kAllCategories.end());
    if (!categories.empty()) {
        cats.clear();
        for (const auto& name : sf::io::split(categories, ',')) {
            auto c = sf::parse_category(name);
            if (!c) throw sf::ValidationError("unknown category " + name);
            cats.push_back(*c);
        }
    }
    const auto summary = sf::cmd_sections(input, rc, cats, out.empty() ? "out" : out);
    std::cout << sf::format_section_summary(summary);
    return 0;
}

int run_simulate(const Overrides& o) {
    sf::SyntheticSpec spec;
    if (!o.config.empty()) {
        try {
            spec = sf::synthetic_spec_from_json(nlohmann::json::parse(sf::io::read_text(o.config)));
        } catch (const nlohmann::json::exception& e) {
            throw sf::ValidationError("malformed simulation spec: " + std::string(e.what()));
        }
    }
    if (o.seed) spec.seed = *o.seed;
    const auto cohort = sf::generate(spec);
    const std::string out = o.out.empty() ? "out" : o.out;
    sf::write_synthetic(cohort, out);
    std::printf("wrote %zu samples (%.1f%% censored) to %s\n", cohort.cohort.size(),
                100.0 * cohort.cohort.censorship_rate(), out.c_str());
    print_cindex("oracle", sf::oracle_metrics(cohort));
    return 0;
}

int run_train(const Overrides& o) {
    const auto c = resolve_config(o);
    const auto outcome = sf::cmd_train(c);
    std::printf("input_dim: %zu\n", outcome.input_dim);
    if (outcome.history) {
        std::printf("stopped after %zu epochs (%s), best epoch %d\n", outcome.history->val_loss.size(),
                    std::string(sf::to_string(outcome.history->stop_reason)).c_str(),
                    outcome.history->best_epoch);
    }
    print_cindex("internal", outcome.internal);
    if (outcome.external) print_cindex("external", *outcome.external);
    return 0;
}

int run_eval(const Overrides& o, const std::string& checkpoint, const std::string& subset) {
    const auto c = resolve_config(o);
    const auto path = checkpoint.empty() ? c.out_dir / "checkpoint.json" : std::filesystem::path(checkpoint);
    const auto out = sf::cmd_eval(c, path, subset);
    print_cindex(subset.c_str(), out.cindex);
    if (out.log_rank) {
        std::printf("log-rank p: %s\n", sf::format_p_value(out.log_rank->p_value).c_str());
    } else {
        std::printf("log-rank: not applicable (one-sided stratification)\n");
    }
    return 0;
}

int run_ablate(const Overrides& o, const std::string& sweep, const std::string& values) {
    const auto c = resolve_config(o);
    std::vector<sf::SweepPoint> points;
    if (sweep == "threshold") {
        auto thresholds = sf::default_thresholds();
        if (!values.empty()) {
            thresholds.clear();
            for (const auto& v : sf::io::split(values, ',')) thresholds.push_back(parse_threshold(v));
        }
        points = sf::threshold_sweep(thresholds);
    } else if (sweep == "sections") {
        auto combos = sf::default_section_combinations();
        if (!values.empty()) {
            combos.clear();
            for (const auto& combo : sf::io::split(values, ';')) combos.push_back(sf::io::split(combo, '+'));
        }
        points = sf::section_sweep(combos);
    } else {
        throw sf::ValidationError("--sweep must be 'threshold' or 'sections'");
    }
    const auto rows = sf::cmd_ablate(c, points);
    std::cout << sf::ablation_markdown(rows);
    return 0;
}

int run_km_export(const Overrides& o, const std::string& scores_path) {
    const auto c = resolve_config(o);
    const auto cohort = sf::load_cohort(c.cohort, c.horizon_months);
    const auto table = sf::io::read_csv(scores_path);
    if (table.header.size() < 2 || table.header[0] != "sample_id" || table.header[1] != "score") {
        throw sf::ValidationError(scores_path + ": expected columns sample_id,score");
    }
    std::vector<double> times, scores;
    std::vector<std::uint8_t> events;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto idx = cohort.index_of(row.at(0));
        if (!idx) throw sf::ValidationError("sample " + row.at(0) + " not in cohort");
        auto s = sf::io::parse_double(row.at(1));
        if (!s) throw sf::ValidationError("non-numeric score at row " + std::to_string(table.line_numbers[r]));
        const auto& rec = cohort.records()[*idx];
        times.push_back(rec.time_months);
        events.push_back(rec.event ? 1 : 0);
        scores.push_back(*s);
    }
    const auto groups = sf::stratify(scores, c.evaluation.stratification_threshold);
    std::vector<std::pair<std::string, sf::KmCurve>> curves;
    for (auto g : {sf::RiskGroup::low, sf::RiskGroup::high}) {
        std::vector<double> t;
        std::vector<std::uint8_t> e;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i] == g) {
                t.push_back(times[i]);
                e.push_back(events[i]);
            }
        }
        if (!t.empty()) curves.emplace_back(g == sf::RiskGroup::low ? "low" : "high", sf::kaplan_meier(t, e));
    }
    sf::km_export(curves, c.out_dir / "km.csv");
    if (curves.size() == 2) {
        const auto lr = sf::log_rank_test(groups, times, events);
        std::printf("log-rank p: %s\n", sf::format_p_value(lr.p_value).c_str());
    } else {
        std::printf("log-rank: not applicable (one-sided stratification)\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survival modelling with fused report and radiomics features"};
    app.require_subcommand(1);

    Overrides o;
    std::string input, report_config, categories, checkpoint, subset = "all", sweep = "threshold", values,
                                                                  scores;

    auto* sections = app.add_subcommand("sections", "split radiology reports into sentence bundles");
    sections->add_option("input", input, "reports (.csv or .jsonl)")->required();
    sections->add_option("--config", report_config, "report grammar (JSON)");
    sections->add_option("--categories", categories, "comma-separated categories to export");
    sections->add_option("--out", o.out, "output directory");

    auto* simulate = app.add_subcommand("simulate", "write a synthetic cohort and feature table");
    add_common(simulate, o, false);

    auto* train_cmd = app.add_subcommand("train", "train and evaluate on the internal validation split");
    add_common(train_cmd, o, true);

    auto* eval_cmd = app.add_subcommand("eval", "score a cohort with a checkpoint");
    add_common(eval_cmd, o, true);
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint.json (default: <out>/checkpoint.json)");
    eval_cmd->add_option("--subset", subset, "all, train, validation or test")
        ->check(CLI::IsMember({"all", "train", "validation", "test"}));

    auto* ablate = app.add_subcommand("ablate", "run a threshold or section sweep");
    add_common(ablate, o, true);
    ablate->add_option("--sweep", sweep, "threshold or sections")->check(CLI::IsMember({"threshold", "sections"}));
    ablate->add_option("--values", values,
                       "thresholds (comma list) or combinations (';' between, '+' within)");

    auto* km = app.add_subcommand("km-export", "Kaplan-Meier curves for stratified scores");
    add_common(km, o, true);
    km->add_option("--scores", scores, "CSV with sample_id,score")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sections) return run_sections(input, report_config, categories, o.out);
        if (*simulate) return run_simulate(o);
        if (*train_cmd) return run_train(o);
        if (*eval_cmd) return run_eval(o, checkpoint, subset);
        if (*ablate) return run_ablate(o, sweep, values);
        if (*km) return run_km_export(o, scores);
    } catch (const sf::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
