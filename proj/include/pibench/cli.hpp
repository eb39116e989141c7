#pragma once

// Command-line front end. `dispatch` is the whole program minus main(), so
// tests can drive it with captured streams.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pibench/providers.hpp"
#include "pibench/runner.hpp"

namespace pibench {

/// Plan defaults from a config file; anything absent falls through to the
/// built-in values (0.95 confidence, 0.01 threshold, 2..30 repeats).
struct PlanDefaults {
  std::optional<double> confidence;
  std::optional<double> threshold;
  std::optional<std::size_t> min_repeats;
  std::optional<std::size_t> max_repeats;
  std::optional<GradingMode> grading;
  SamplingParams params;
  std::optional<std::string> provider;
};

struct CliConfig {
  std::map<std::string, ProviderConfig> providers;
  PlanDefaults defaults;
  std::filesystem::path runs_dir = "runs";
  std::filesystem::path reports_dir = "reports";
};

/// Provider entry of a config file. Rejects inline secrets.
ProviderConfig provider_from_json(const nlohmann::json& obj, std::size_t line);

/// Line-oriented JSON, one object per line:
///   {"type":"defaults", "confidence":0.95, "threshold":0.01, "max_repeats":30, ...}
///   {"type":"provider", "name":"azure-gpt4", "kind":"azure", "endpoint":"https://...",
///    "model":"gpt-4", "api_version":"2024-02-01", "credentials_env":"AZURE_OPENAI_KEY"}
/// Always contains the built-in simulated provider "sim" unless overridden.
CliConfig load_cli_config(std::istream& in);
CliConfig load_cli_config(const std::filesystem::path& path);

/// The built-in simulated provider.
ProviderConfig builtin_sim_provider();

/// Experiment documentation, one "key: value" per line: dialect, model,
/// reported model version, every sampling parameter, n and the UTC date.
std::string documentation_block(const RunResult& result);

/// Exit codes: 0 success, 1 validation or usage error, 2 provider failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pibench
