#include "pibench/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pibench/report.hpp"

namespace pibench {

using nlohmann::json;

namespace {

template <class T>
std::optional<T> optional_field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(line, std::string("field '") + key + "' has the wrong type");
  }
}

Duration seconds_to_duration(double s) {
  return std::chrono::duration_cast<Duration>(std::chrono::duration<double>(s));
}

SamplingParams params_from_json(const json& obj, std::size_t line) {
  SamplingParams p;
  p.temperature = optional_field<double>(obj, "temperature", line);
  p.seed = optional_field<std::int64_t>(obj, "seed", line);
  p.top_p = optional_field<double>(obj, "top_p", line);
  return p;
}

}  // namespace

ProviderConfig builtin_sim_provider() {
  ProviderConfig c;
  c.name = "sim";
  c.kind = ProviderKind::simulated;
  c.model_id = "simulated";
  c.rate_limit_per_minute = 1e9;
  c.capabilities = default_capabilities(ProviderKind::simulated);
  return c;
}

ProviderConfig provider_from_json(const json& obj, std::size_t line) {
  for (const char* secret : {"api_key", "key", "token", "password", "secret"}) {
    if (obj.contains(secret)) {
      throw ValidationError("line " + std::to_string(line) + ": config field '" + secret +
                            "' is not allowed; name an environment variable in "
                            "'credentials_env' instead");
    }
  }
  ProviderConfig c;
  c.name = optional_field<std::string>(obj, "name", line).value_or("");
  if (c.name.empty()) throw ParseError(line, "provider entry needs a 'name'");
  c.kind = parse_provider_kind(optional_field<std::string>(obj, "kind", line).value_or("openai"));
  c.capabilities = default_capabilities(c.kind);
  c.endpoint = optional_field<std::string>(obj, "endpoint", line).value_or("");
  c.model_id = optional_field<std::string>(obj, "model", line)
                   .value_or(optional_field<std::string>(obj, "model_id", line).value_or(""));
  c.api_version = optional_field<std::string>(obj, "api_version", line);
  c.credentials_env = optional_field<std::string>(obj, "credentials_env", line).value_or("");
  if (auto v = optional_field<double>(obj, "rate_limit_per_minute", line)) c.rate_limit_per_minute = *v;
  if (auto v = optional_field<int>(obj, "max_concurrency", line)) c.max_concurrency = *v;
  if (auto v = optional_field<double>(obj, "timeout_s", line)) c.timeout = seconds_to_duration(*v);
  if (const auto it = obj.find("retry"); it != obj.end() && it->is_object()) {
    if (auto v = optional_field<int>(*it, "max_attempts", line)) c.retry.max_attempts = *v;
    if (auto v = optional_field<double>(*it, "base_backoff_s", line)) {
      c.retry.base_backoff = seconds_to_duration(*v);
    }
    if (auto v = optional_field<double>(*it, "multiplier", line)) c.retry.multiplier = *v;
  }
  if (const auto it = obj.find("capabilities"); it != obj.end() && it->is_object()) {
    if (auto v = optional_field<bool>(*it, "temperature", line)) c.capabilities.temperature = *v;
    if (auto v = optional_field<bool>(*it, "seed", line)) c.capabilities.seed = *v;
    if (auto v = optional_field<bool>(*it, "top_p", line)) c.capabilities.top_p = *v;
  }
  if (const auto it = obj.find("simulated"); it != obj.end() && it->is_object()) {
    auto& s = c.simulated;
    if (auto v = optional_field<double>(*it, "accuracy", line)) s.accuracy = *v;
    if (auto v = optional_field<std::uint64_t>(*it, "master_seed", line)) s.master_seed = *v;
    if (auto v = optional_field<bool>(*it, "deterministic_at_zero", line)) s.deterministic_at_zero = *v;
    if (auto v = optional_field<std::map<std::string, double>>(*it, "per_question_accuracy", line)) {
      s.per_question_accuracy = *v;
    }
  }
  if (c.kind == ProviderKind::simulated && c.model_id.empty()) c.model_id = "simulated";
  c.validate();
  return c;
}

CliConfig load_cli_config(std::istream& in) {
  CliConfig config;
  config.providers.emplace("sim", builtin_sim_provider());
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    const auto type = optional_field<std::string>(obj, "type", line_no).value_or("");
    if (type == "provider") {
      auto provider = provider_from_json(obj, line_no);
      if (!seen.insert(provider.name).second) {
        throw ValidationError("line " + std::to_string(line_no) + ": provider '" + provider.name +
                              "' is defined twice");
      }
      config.providers.insert_or_assign(provider.name, std::move(provider));
    } else if (type == "defaults") {
      auto& d = config.defaults;
      d.confidence = optional_field<double>(obj, "confidence", line_no);
      d.threshold = optional_field<double>(obj, "threshold", line_no);
      d.min_repeats = optional_field<std::size_t>(obj, "min_repeats", line_no);
      d.max_repeats = optional_field<std::size_t>(obj, "max_repeats", line_no);
      if (auto g = optional_field<std::string>(obj, "grading", line_no)) {
        d.grading = parse_grading_mode(*g);
      }
      d.params = params_from_json(obj, line_no);
      d.provider = optional_field<std::string>(obj, "provider", line_no);
      if (auto p = optional_field<std::string>(obj, "runs_dir", line_no)) config.runs_dir = *p;
      if (auto p = optional_field<std::string>(obj, "reports_dir", line_no)) config.reports_dir = *p;
    } else {
      throw ParseError(line_no, "unknown entry type '" + type + "' (expected provider or defaults)");
    }
  }
  return config;
}

CliConfig load_cli_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  return load_cli_config(in);
}

std::string documentation_block(const RunResult& result) {
  const auto& m = result.metadata;
  auto param = [&](const char* key) -> std::string {
    const auto it = m.params.find(key);
    if (it == m.params.end()) return "provider default (not sent)";
    return it->dump();
  };
  auto echo = [&](const char* key) -> std::string {
    const auto it = m.provider_echo.find(key);
    return it == m.provider_echo.end() ? std::string("not reported") : it->second;
  };
  std::ostringstream out;
  out << "api_dialect: " << m.provider_kind << "\n";
  out << "api_version: " << m.api_version.value_or("n/a") << "\n";
  out << "model_id: " << m.model_id << "\n";
  out << "model_reported: " << echo("model") << "\n";
  out << "model_version: "
      << (m.provider_echo.contains("version") ? echo("version") : echo("system_fingerprint")) << "\n";
  out << "temperature: " << param("temperature") << "\n";
  out << "seed: " << param("seed") << "\n";
  out << "top_p: " << param("top_p") << "\n";
  out << "n: " << result.matrix.repeat_count() << "\n";
  out << "date_utc: " << (m.finished_utc.empty() ? std::string("unknown") : m.finished_utc) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

struct PlanFlags {
  std::string config;
  std::string benchmark;
  std::string provider;
  std::optional<double> temperature;
  std::optional<std::int64_t> seed;
  std::optional<double> top_p;
  std::optional<double> threshold;
  std::optional<double> confidence;
  std::optional<std::size_t> min_repeats;
  std::optional<std::size_t> max_repeats;
  std::optional<std::string> grading;
  std::optional<int> max_concurrency;
  std::string run_id;
  std::string runs_dir;
  bool resume = false;
};

void add_plan_flags(CLI::App& cmd, PlanFlags& f, bool with_provider) {
  cmd.add_option("--config", f.config, "Line-oriented JSON config file");
  cmd.add_option("--benchmark", f.benchmark, "Benchmark file (JSONL)");
  if (with_provider) cmd.add_option("--provider", f.provider, "Provider name from the config (built-in: sim)");
  cmd.add_option("--temperature", f.temperature, "Sampling temperature (unset: not sent)");
  cmd.add_option("--seed", f.seed, "Sampling seed (unset: not sent)");
  cmd.add_option("--top-p", f.top_p, "Nucleus sampling mass (unset: not sent)");
  cmd.add_option("--threshold", f.threshold, "Stop once the prediction interval is narrower (default 0.01)");
  cmd.add_option("--confidence", f.confidence, "Interval confidence (default 0.95)");
  cmd.add_option("--min-repeats", f.min_repeats, "Minimum repeats before stopping (default 2)");
  cmd.add_option("--max-repeats", f.max_repeats, "Maximum repeats (default 30)");
  cmd.add_option("--grading", f.grading, "strict or lenient (default strict)");
  cmd.add_option("--max-concurrency", f.max_concurrency, "In-flight requests per repeat");
  cmd.add_option("--run-id", f.run_id, "Run identifier (default derived from provider and time)");
  cmd.add_option("--runs-dir", f.runs_dir, "Directory holding run logs and summaries");
  cmd.add_flag("--resume", f.resume, "Continue the stored run named by --run-id");
}

CliConfig config_for(const std::string& path) {
  if (path.empty()) {
    CliConfig config;
    config.providers.emplace("sim", builtin_sim_provider());
    return config;
  }
  return load_cli_config(std::filesystem::path(path));
}

std::string compact_utc_now() {
  std::string iso = format_utc_iso8601(std::chrono::system_clock::now());
  iso.erase(std::remove_if(iso.begin(), iso.end(), [](char c) { return c == '-' || c == ':'; }),
            iso.end());
  return iso;
}

struct PreparedPlan {
  ExperimentPlan plan;
  std::filesystem::path runs_dir;
};

PreparedPlan prepare_plan(const PlanFlags& f, const CliConfig& config, ProviderConfig provider,
                          std::shared_ptr<const Benchmark> benchmark) {
  const auto& d = config.defaults;
  ExperimentPlan plan;
  plan.benchmark = std::move(benchmark);
  if (f.max_concurrency) provider.max_concurrency = *f.max_concurrency;
  plan.provider = std::move(provider);
  plan.params.temperature = f.temperature ? f.temperature : d.params.temperature;
  plan.params.seed = f.seed ? f.seed : d.params.seed;
  plan.params.top_p = f.top_p ? f.top_p : d.params.top_p;
  plan.pi_width_threshold = f.threshold.value_or(d.threshold.value_or(0.01));
  plan.confidence = f.confidence.value_or(d.confidence.value_or(0.95));
  plan.min_repeats = f.min_repeats.value_or(d.min_repeats.value_or(2));
  plan.max_repeats = f.max_repeats.value_or(d.max_repeats.value_or(30));
  plan.grading = f.grading ? parse_grading_mode(*f.grading) : d.grading.value_or(GradingMode::strict);
  if (f.resume && f.run_id.empty()) throw ValidationError("--resume needs --run-id");
  plan.run_id = f.run_id.empty() ? plan.provider.name + "-" + compact_utc_now() : f.run_id;
  plan.validate();
  return {std::move(plan), f.runs_dir.empty() ? config.runs_dir : std::filesystem::path(f.runs_dir)};
}

int execute_plan(PreparedPlan prepared, bool resume, std::ostream& out, std::ostream& err) {
  auto& plan = prepared.plan;
  for (const auto& name : unsupported_params(plan.provider, plan.params)) {
    err << "warning: provider '" << plan.provider.name << "' does not support '" << name
        << "'; it will not be sent\n";
  }
  auto provider = make_provider(plan.provider, plan.benchmark, plan.clock);
  const RunResult result = resume ? pibench::resume(plan.run_id, plan, *provider, prepared.runs_dir)
                                  : pibench::run_adaptive(plan, *provider, prepared.runs_dir);
  RunStore store(prepared.runs_dir);
  out << documentation_block(result) << "\n";
  out << render(result, RenderFormat::text, plan.pi_width_threshold);
  out << "run log: " << store.log_path(plan.run_id).string() << "\n";
  out << "summary: " << store.summary_path(plan.run_id).string() << "\n";
  return 0;
}

std::shared_ptr<const Benchmark> require_benchmark(const std::string& path) {
  if (path.empty()) throw ValidationError("missing --benchmark <file>");
  if (!std::filesystem::exists(path)) {
    throw ValidationError("benchmark file '" + path + "' not found");
  }
  return std::make_shared<const Benchmark>(load_benchmark(std::filesystem::path(path)));
}

void emit(const std::string& text, const std::string& output, std::ostream& out) {
  if (output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(output, std::ios::binary);
  if (!file) throw ValidationError("cannot write '" + output + "'");
  file << text;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Repeat LLM benchmark runs until the score is pinned down by a prediction interval",
               "pibench"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  PlanFlags run_flags;
  auto* run = app.add_subcommand("run", "Run a benchmark adaptively against a provider");
  add_plan_flags(*run, run_flags, true);

  PlanFlags sim_flags;
  double sim_accuracy = 0.85;
  std::uint64_t sim_master_seed = 0;
  bool sim_stochastic_at_zero = false;
  std::uint64_t suite_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run against the seeded simulated model");
  add_plan_flags(*simulate, sim_flags, false);
  simulate->add_option("--accuracy", sim_accuracy, "Per-question probability of a correct answer");
  simulate->add_option("--master-seed", sim_master_seed, "Simulator master seed");
  simulate->add_flag("--stochastic-at-zero", sim_stochastic_at_zero,
                     "Keep sampling at temperature 0 even with a fixed seed");
  simulate->add_option("--suite-seed", suite_seed,
                       "Seed for the built-in suite used when --benchmark is absent");

  std::string stats_run, stats_dir = "runs", stats_format = "text", stats_view = "pi", stats_output;
  double bin_width = 0.01;
  std::optional<double> stats_threshold;
  auto* stats = app.add_subcommand("stats", "Recompute statistics from a stored run log");
  stats->add_option("--run", stats_run, "Run id")->required();
  stats->add_option("--runs-dir", stats_dir, "Directory holding run logs")->capture_default_str();
  stats->add_option("--format", stats_format, "text, csv, svg or json");
  stats->add_option("--view", stats_view, "pi, histogram or summary");
  stats->add_option("--bin-width", bin_width, "Histogram bin width");
  stats->add_option("--threshold", stats_threshold, "Width marker (default: the run's threshold)");
  stats->add_option("--output", stats_output, "Write to a file instead of stdout");

  std::string run_a, run_b, cmp_dir = "runs", cmp_variant = "welch", cmp_format = "text", cmp_output;
  double alpha = 0.05;
  auto* compare = app.add_subcommand("compare", "t-test between the repeat means of two runs");
  compare->add_option("--run-a", run_a, "First run id")->required();
  compare->add_option("--run-b", run_b, "Second run id")->required();
  compare->add_option("--runs-dir", cmp_dir, "Directory holding run logs")->capture_default_str();
  compare->add_option("--alpha", alpha, "Significance level");
  compare->add_option("--variant", cmp_variant, "welch or pooled");
  compare->add_option("--format", cmp_format, "text or csv");
  compare->add_option("--output", cmp_output, "Write to a file instead of stdout");

  std::string gen_spec, gen_builtin, gen_output;
  std::uint64_t gen_seed = 0;
  auto* generate = app.add_subcommand("generate", "Expand a template spec into a benchmark file");
  auto* spec_opt = generate->add_option("--spec", gen_spec, "Template spec (JSON)");
  generate->add_option("--builtin", gen_builtin, "small or large")->excludes(spec_opt);
  generate->add_option("--seed", gen_seed, "Filler selection seed");
  generate->add_option("--output", gen_output, "Benchmark file to write")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << " (see pibench --help)\n";
    return 1;
  }

  try {
    if (run->parsed()) {
      const CliConfig config = config_for(run_flags.config);
      const std::string name = !run_flags.provider.empty()
                                   ? run_flags.provider
                                   : config.defaults.provider.value_or("sim");
      const auto it = config.providers.find(name);
      if (it == config.providers.end()) {
        throw ValidationError("unknown provider '" + name + "'; define it in the --config file");
      }
      auto prepared = prepare_plan(run_flags, config, it->second, require_benchmark(run_flags.benchmark));
      return execute_plan(std::move(prepared), run_flags.resume, out, err);
    }

    if (simulate->parsed()) {
      const CliConfig config = config_for(sim_flags.config);
      ProviderConfig provider = builtin_sim_provider();
      provider.simulated.accuracy = sim_accuracy;
      provider.simulated.master_seed = sim_master_seed;
      provider.simulated.deterministic_at_zero = !sim_stochastic_at_zero;
      provider.validate();
      auto benchmark = sim_flags.benchmark.empty()
                           ? std::make_shared<const Benchmark>(
                                 generate_benchmark(small_direction_spec(), suite_seed))
                           : require_benchmark(sim_flags.benchmark);
      auto prepared = prepare_plan(sim_flags, config, std::move(provider), std::move(benchmark));
      return execute_plan(std::move(prepared), sim_flags.resume, out, err);
    }

    if (stats->parsed()) {
      RunStore store(stats_dir);
      if (!store.exists(stats_run)) {
        throw ValidationError("no run log for '" + stats_run + "' in " + store.dir().string());
      }
      const StoredRun stored = store.load(stats_run);
      const RunResult result = analyze_run(stored);
      const double threshold =
          stats_threshold.value_or(stored.plan.value("pi_width_threshold", 0.01));
      if (stats_format == "json") {
        emit(to_json(result).dump(2) + "\n", stats_output, out);
        return 0;
      }
      const RenderFormat format = parse_render_format(stats_format);
      std::string text;
      if (stats_view == "summary") {
        text = render(result, format, threshold);
      } else if (stats_view == "histogram") {
        text = render(histogram(result.means, bin_width), format);
      } else if (stats_view == "pi") {
        if (result.trace.empty()) {
          throw ValidationError("run '" + stats_run + "' has fewer than 2 complete repeats");
        }
        const PiSeries series{result.trace};
        text = format == RenderFormat::text
                   ? render(result, format, threshold) + render(series, format, threshold)
                   : render(series, format, threshold);
      } else {
        throw ValidationError("unknown view '" + stats_view + "' (expected pi, histogram or summary)");
      }
      emit(text, stats_output, out);
      return 0;
    }

    if (compare->parsed()) {
      RunStore store(cmp_dir);
      for (const auto* id : {&run_a, &run_b}) {
        if (!store.exists(*id)) {
          throw ValidationError("no run log for '" + *id + "' in " + store.dir().string());
        }
      }
      const auto a = analyze_run(store.load(run_a));
      const auto b = analyze_run(store.load(run_b));
      if (a.means.size() < 2 || b.means.size() < 2) {
        throw ValidationError("both runs need at least 2 complete repeats");
      }
      const auto report =
          compare_runs(a, b, Probability{alpha}, parse_t_test_variant(cmp_variant));
      emit(render(report, parse_render_format(cmp_format)), cmp_output, out);
      return 0;
    }

    if (generate->parsed()) {
      TemplateSpec spec;
      if (!gen_spec.empty()) {
        std::ifstream in(gen_spec);
        if (!in) throw ValidationError("cannot open template spec '" + gen_spec + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        spec = parse_template_spec(buf.str());
      } else if (gen_builtin == "small" || gen_builtin.empty()) {
        spec = small_direction_spec();
      } else if (gen_builtin == "large") {
        spec = large_direction_spec();
      } else {
        throw ValidationError("unknown built-in suite '" + gen_builtin + "' (expected small or large)");
      }
      const Benchmark benchmark = generate_benchmark(spec, gen_seed);
      save_benchmark(gen_output, benchmark);
      out << "wrote " << benchmark.size() << " questions to " << gen_output << "\n";
      return 0;
    }
  } catch (const ProviderError& e) {
    err << "provider error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 2;
  } catch (const PlanMismatchError& e) {
    err << "error: " << e.what() << "; rerun with the original flags or choose a new --run-id\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace pibench
