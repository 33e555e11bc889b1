#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "survfuse/coxmath.hpp"
#include "survfuse/error.hpp"
#include "survfuse/io.hpp"
#include "survfuse/metrics.hpp"
#include "survfuse/pipeline.hpp"
#include "survfuse/reports.hpp"
#include "survfuse/simdata.hpp"

namespace py = pybind11;
namespace sf = survfuse;

namespace {

std::vector<std::uint8_t> flags(const std::vector<int>& events) {
    return {events.begin(), events.end()};
}

py::dict cindex_dict(const sf::CIndexResult& r) {
    py::dict d;
    d["value"] = r.value;
    d["concordant"] = r.concordant;
    d["discordant"] = r.discordant;
    d["tied_score"] = r.tied_score;
    d["comparable_pairs"] = r.comparable_pairs;
    if (r.ci) {
        d["lower"] = r.ci->lower;
        d["upper"] = r.ci->upper;
        d["replicates"] = r.ci->replicates;
    }
    return d;
}

sf::ExperimentConfig config_for(const std::filesystem::path& path, std::optional<std::uint64_t> seed,
                                std::optional<std::filesystem::path> out) {
    auto c = sf::load_experiment_config(path);
    if (seed) sf::apply_master_seed(c, *seed);
    if (out) c.out_dir = *out;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Survival modelling from fused report and radiomics features";

    py::register_exception<sf::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<sf::ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<sf::SingularHessianError>(m, "SingularHessianError", PyExc_RuntimeError);

    m.def("cox_npll",
          [](const std::vector<double>& scores, const std::vector<double>& times, const std::vector<int>& events) {
              return sf::cox_npll(scores, times, flags(events));
          },
          py::arg("scores"), py::arg("times"), py::arg("events"),
          "Negative Cox partial log-likelihood (Breslow ties), divided by the number of events.");
    m.def("cox_npll_gradient",
          [](const std::vector<double>& scores, const std::vector<double>& times, const std::vector<int>& events) {
              return sf::cox_npll_gradient(scores, times, flags(events));
          },
          py::arg("scores"), py::arg("times"), py::arg("events"));

    m.def("concordance_index",
          [](const std::vector<double>& times, const std::vector<int>& events, const std::vector<double>& scores,
             int bootstrap, std::uint64_t seed) {
              const auto e = flags(events);
              auto r = sf::concordance_index(times, e, scores);
              if (bootstrap > 0) {
                  sf::BootstrapOptions o;
                  o.replicates = bootstrap;
                  o.seed = seed;
                  r.ci = sf::bootstrap_ci(times, e, scores, o);
              }
              return cindex_dict(r);
          },
          py::arg("times"), py::arg("events"), py::arg("scores"), py::arg("bootstrap") = 0, py::arg("seed") = 0,
          "Harrell's C-index; with bootstrap > 0 also a percentile interval.");

    m.def("kaplan_meier",
          [](const std::vector<double>& times, const std::vector<int>& events) {
              const auto km = sf::kaplan_meier(times, flags(events));
              py::dict d;
              d["times"] = km.times;
              d["survival"] = km.survival;
              d["at_risk"] = km.at_risk;
              d["events"] = km.events;
              return d;
          },
          py::arg("times"), py::arg("events"));

    m.def("log_rank",
          [](const std::vector<double>& scores, const std::vector<double>& times, const std::vector<int>& events,
             double threshold) {
              const auto r = sf::log_rank_test(sf::stratify(scores, threshold), times, flags(events));
              py::dict d;
              d["statistic"] = r.statistic;
              d["p_value"] = r.p_value;
              d["p_text"] = sf::format_p_value(r.p_value);
              return d;
          },
          py::arg("scores"), py::arg("times"), py::arg("events"), py::arg("threshold") = 0.0,
          "Log-rank test between high (score > threshold) and low risk groups.");

    m.def("fit_linear_cox",
          [](const sf::Matrix& x, const std::vector<double>& times, const std::vector<int>& events) {
              const auto fit = sf::fit_linear_coxph(x, times, flags(events));
              py::dict d;
              d["beta"] = fit.beta;
              d["iterations"] = fit.iterations;
              d["grad_norm"] = fit.grad_norm;
              return d;
          },
          py::arg("x"), py::arg("times"), py::arg("events"));

    m.def("simulate",
          [](const std::string& spec_json, const std::filesystem::path& out) {
              const auto s = sf::generate(sf::synthetic_spec_from_json(nlohmann::json::parse(spec_json)));
              sf::write_synthetic(s, out);
              py::dict d;
              d["n"] = s.cohort.size();
              d["censored_fraction"] = s.cohort.censorship_rate();
              d["oracle_cindex"] = sf::oracle_metrics(s).value;
              return d;
          },
          py::arg("spec_json"), py::arg("out"), "Write a synthetic cohort described by a JSON spec.");

    m.def("process_report",
          [](const std::string& text) {
              const auto r = sf::process_report({"", "", text});
              py::dict d;
              for (auto c : sf::kAllCategories) d[py::str(std::string(sf::to_string(c)))] = r[c];
              return d;
          },
          py::arg("text"), "Clean, section and placeholder-fill one report.");
    m.def("clean_report", [](const std::string& raw) { return sf::clean_report(raw); }, py::arg("raw"));

    m.def("train",
          [](const std::filesystem::path& config, std::optional<std::uint64_t> seed,
             std::optional<std::filesystem::path> out) {
              const auto c = config_for(config, seed, out);
              const auto outcome = sf::cmd_train(c);
              py::dict d;
              d["input_dim"] = outcome.input_dim;
              d["internal"] = cindex_dict(outcome.internal);
              if (outcome.external) d["external"] = cindex_dict(*outcome.external);
              d["out"] = c.out_dir;
              return d;
          },
          py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none(),
          "Train per the experiment config; writes checkpoint and metrics to the output directory.");

    m.def("evaluate",
          [](const std::filesystem::path& config, const std::string& subset,
             std::optional<std::filesystem::path> checkpoint, std::optional<std::uint64_t> seed,
             std::optional<std::filesystem::path> out) {
              const auto c = config_for(config, seed, out);
              const auto e = sf::cmd_eval(c, checkpoint.value_or(c.out_dir / "checkpoint.json"), subset);
              py::dict d;
              d["cindex"] = cindex_dict(e.cindex);
              d["sample_ids"] = e.sample_ids;
              d["scores"] = e.scores;
              if (e.log_rank) d["log_rank_p"] = e.log_rank->p_value;
              return d;
          },
          py::arg("config"), py::arg("subset") = "all", py::arg("checkpoint") = py::none(),
          py::arg("seed") = py::none(), py::arg("out") = py::none());
}
