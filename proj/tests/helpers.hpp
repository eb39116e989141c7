#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "pibench/benchmark.hpp"
#include "pibench/runner.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("pibench-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::shared_ptr<const pibench::Benchmark> small_suite(std::uint64_t seed = 0) {
  return std::make_shared<const pibench::Benchmark>(
      pibench::generate_benchmark(pibench::small_direction_spec(), seed));
}

inline pibench::Benchmark tiny_benchmark(std::size_t q = 3) {
  using pibench::Direction;
  pibench::Benchmark b;
  b.name = "tiny";
  b.system_prompt = "Answer with one word: north, south, east or west.";
  b.vocabulary = {Direction::north, Direction::south, Direction::east, Direction::west};
  const Direction cycle[] = {Direction::north, Direction::east, Direction::south, Direction::west};
  for (std::size_t i = 0; i < q; ++i) {
    b.questions.push_back({"t-" + std::to_string(i), "Which way is question " + std::to_string(i) + "?",
                           {cycle[i % 4]}, std::nullopt});
  }
  return b;
}

inline pibench::ExperimentPlan sim_plan(std::shared_ptr<const pibench::Benchmark> benchmark,
                                        std::string run_id, double accuracy = 0.85,
                                        std::uint64_t master_seed = 0) {
  pibench::ExperimentPlan plan;
  plan.benchmark = std::move(benchmark);
  plan.provider.name = "sim";
  plan.provider.kind = pibench::ProviderKind::simulated;
  plan.provider.model_id = "simulated";
  plan.provider.simulated.accuracy = accuracy;
  plan.provider.simulated.master_seed = master_seed;
  plan.run_id = std::move(run_id);
  plan.clock = std::make_shared<pibench::ManualClock>(
      std::chrono::system_clock::time_point(std::chrono::seconds(1760486400)));
  return plan;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Digest of the score matrix: question ids plus every column as a 0/1 string.
inline std::uint64_t matrix_hash(const pibench::ScoreMatrix& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const auto& id : m.question_ids()) {
    for (char c : id) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  for (std::size_t j = 0; j < m.repeat_count(); ++j) {
    for (auto v : m.column(j)) mix(v ? '1' : '0');
    mix('|');
  }
  return h;
}

}  // namespace testing
