#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pibench/benchmark.hpp"
#include "pibench/numerics.hpp"
#include "pibench/providers.hpp"
#include "pibench/report.hpp"
#include "pibench/runner.hpp"
#include "pibench/stats.hpp"

namespace py = pybind11;
using namespace pibench;

namespace {

py::dict interval_dict(const PredictionInterval& pi) {
  py::dict d;
  d["lower"] = pi.lower;
  d["upper"] = pi.upper;
  d["width"] = pi.width();
  d["mean"] = pi.mean;
  d["confidence"] = pi.confidence;
  d["n"] = pi.n;
  d["n_future"] = pi.n_future ? py::object(py::int_(*pi.n_future)) : py::none();
  return d;
}

// nlohmann::json -> Python via the json module; summaries are small.
py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_pibench, m) {
  m.doc() = "Prediction-interval statistics and the simulated benchmark runner";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DegenerateSamplesError>(m, "DegenerateSamplesError", PyExc_ValueError);
  py::register_exception<ProviderError>(m, "ProviderError", PyExc_RuntimeError);

  m.def("ln_gamma", &ln_gamma, py::arg("x"));
  m.def("regularized_incomplete_beta",
        py::overload_cast<double, double, double>(&regularized_incomplete_beta), py::arg("x"),
        py::arg("a"), py::arg("b"));
  m.def(
      "student_t_cdf", [](double t, double df) { return student_t_cdf(t, DegreesOfFreedom{df}); },
      py::arg("t"), py::arg("df"));
  m.def(
      "student_t_quantile",
      [](double p, double df) { return student_t_quantile(Probability{p}, DegreesOfFreedom{df}); },
      py::arg("p"), py::arg("df"));
  m.def(
      "two_sided_p_value", [](double t, double df) { return two_sided_p_value(t, DegreesOfFreedom{df}); },
      py::arg("t"), py::arg("df"));

  m.def(
      "prediction_interval",
      [](std::vector<double> means, double confidence, std::optional<std::size_t> n_future) {
        const RepeatMeans r(std::move(means));
        return interval_dict(n_future ? prediction_interval(r, Probability{confidence}, *n_future)
                                      : prediction_interval(r, Probability{confidence}));
      },
      py::arg("means"), py::arg("confidence") = 0.95, py::arg("n_future") = py::none());
  m.def(
      "confidence_interval",
      [](std::vector<double> means, double confidence) {
        return interval_dict(confidence_interval(RepeatMeans(std::move(means)), Probability{confidence}));
      },
      py::arg("means"), py::arg("confidence") = 0.95);
  m.def(
      "two_sample_t_test",
      [](std::vector<double> a, std::vector<double> b, const std::string& variant, double alpha) {
        const auto r = two_sample_t_test(RepeatMeans(std::move(a)), RepeatMeans(std::move(b)),
                                         parse_t_test_variant(variant), Probability{alpha});
        py::dict d;
        d["t"] = r.t_statistic;
        d["df"] = r.df;
        d["p_value"] = r.p_value;
        d["variant"] = std::string(to_string(r.variant));
        d["significant"] = r.significant();
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("variant") = "welch", py::arg("alpha") = 0.05);
  m.def(
      "pi_series",
      [](std::vector<double> means, double confidence) {
        py::list out;
        for (const auto& p : pi_series(RepeatMeans(std::move(means)), Probability{confidence}).points) {
          py::dict d;
          d["n"] = p.n;
          d["lower"] = p.lower;
          d["upper"] = p.upper;
          d["width"] = p.width;
          d["mean"] = p.mean;
          out.append(d);
        }
        return out;
      },
      py::arg("means"), py::arg("confidence") = 0.95);

  m.def(
      "simulate",
      [](const std::filesystem::path& runs_dir, const std::string& run_id, double accuracy,
         std::uint64_t master_seed, std::optional<double> temperature, std::optional<std::int64_t> seed,
         double threshold, std::size_t max_repeats, std::uint64_t suite_seed) {
        ExperimentPlan plan;
        plan.benchmark = std::make_shared<const Benchmark>(
            generate_benchmark(small_direction_spec(), suite_seed));
        plan.provider.name = "sim";
        plan.provider.kind = ProviderKind::simulated;
        plan.provider.model_id = "simulated";
        plan.provider.rate_limit_per_minute = 1e9;
        plan.provider.simulated.accuracy = accuracy;
        plan.provider.simulated.master_seed = master_seed;
        plan.params.temperature = temperature;
        plan.params.seed = seed;
        plan.pi_width_threshold = threshold;
        plan.max_repeats = max_repeats;
        plan.run_id = run_id;
        py::gil_scoped_release release;
        SimulatedChatProvider provider(plan.provider, plan.benchmark);
        const auto result = run_adaptive(plan, provider, runs_dir);
        py::gil_scoped_acquire acquire;
        return to_python(to_json(result));
      },
      py::arg("runs_dir"), py::arg("run_id"), py::arg("accuracy") = 0.85, py::arg("master_seed") = 0,
      py::arg("temperature") = py::none(), py::arg("seed") = py::none(), py::arg("threshold") = 0.01,
      py::arg("max_repeats") = 30, py::arg("suite_seed") = 0);

  m.def(
      "analyze_run",
      [](const std::filesystem::path& runs_dir, const std::string& run_id) {
        return to_python(to_json(analyze_run(RunStore(runs_dir).load(run_id))));
      },
      py::arg("runs_dir"), py::arg("run_id"));
}
