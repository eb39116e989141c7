#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "pibench/runner.hpp"

using namespace pibench;
using nlohmann::json;

namespace {

// Answers every question through a fixed function of (question id, repeat).
class ScriptedProvider final : public ChatProvider {
 public:
  using Reply = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedProvider(Reply reply) : reply_(std::move(reply)) {
    config_.name = "scripted";
    config_.kind = ProviderKind::simulated;
    config_.model_id = "scripted";
  }
  ChatExchange complete(const ChatRequest& req) override {
    ChatExchange ex;
    ex.system_prompt = req.system_prompt;
    ex.user_prompt = req.user_prompt;
    ex.params = req.params;
    ex.response_text = reply_(req);
    return ex;
  }
  const ProviderConfig& config() const override { return config_; }

 private:
  Reply reply_;
  ProviderConfig config_;
};

class FailingProvider final : public ChatProvider {
 public:
  explicit FailingProvider(ProviderErrorKind kind) : kind_(kind) {}
  ChatExchange complete(const ChatRequest&) override { throw ProviderError(kind_, "down", 3); }
  const ProviderConfig& config() const override { return config_; }

 private:
  ProviderErrorKind kind_;
  ProviderConfig config_;
};

class NorthTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest&, Duration) override {
    return {200, R"({"model":"m-1","choices":[{"message":{"content":"North"}}]})", {}};
  }
};

std::shared_ptr<const Benchmark> tiny(std::size_t q = 3) {
  return std::make_shared<const Benchmark>(testing::tiny_benchmark(q));
}

RunResult run_sim(const ExperimentPlan& plan, const std::filesystem::path& dir) {
  SimulatedChatProvider provider(plan.provider, plan.benchmark);
  return run_adaptive(plan, provider, dir);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("plan validation") {
  auto plan = testing::sim_plan(tiny(), "v");
  CHECK_NOTHROW(plan.validate());
  auto bad = plan;
  bad.min_repeats = 1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = plan;
  bad.max_repeats = 1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = plan;
  bad.pi_width_threshold = -0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = plan;
  bad.confidence = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = plan;
  bad.run_id = "../escape";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = plan;
  bad.benchmark = nullptr;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("single repeat scoring") {
  testing::TempDir dir;
  SUBCASE("perfect simulator gives a column of ones") {
    auto plan = testing::sim_plan(tiny(), "r1", 1.0);
    SimulatedChatProvider provider(plan.provider, plan.benchmark);
    Runner runner(plan, provider, dir.path());
    CHECK(runner.run_repeat(1) == std::vector<std::uint8_t>{1, 1, 1});
    CHECK(runner.requests_made() == 3);
    // Already on record: no new requests.
    CHECK(runner.run_repeat(1) == std::vector<std::uint8_t>{1, 1, 1});
    CHECK(runner.requests_made() == 3);
    CHECK_THROWS_AS(runner.run_repeat(0), ValidationError);
  }
  SUBCASE("unparseable reply scores zero and is flagged") {
    auto plan = testing::sim_plan(tiny(), "r2");
    ScriptedProvider provider([](const ChatRequest& r) {
      return r.question_id == "t-1" ? std::string("I don't know") : std::string("North");
    });
    Runner runner(plan, provider, dir.path());
    CHECK(runner.run_repeat(1) == std::vector<std::uint8_t>{1, 0, 0});
    const auto stored = RunStore(dir.path()).load("r2");
    REQUIRE(stored.records.size() == 3);
    for (const auto& r : stored.records) {
      CHECK(r.raw_response.has_value());
      if (r.question_id == "t-1") {
        CHECK(r.flag == "unparseable");
        CHECK(!r.normalized_answer);
      } else {
        CHECK(!r.flag);
        CHECK(r.normalized_answer == "north");
      }
    }
  }
  SUBCASE("empty and ambiguous replies") {
    auto plan = testing::sim_plan(tiny(), "r3");
    plan.grading = GradingMode::lenient;
    ScriptedProvider provider([](const ChatRequest& r) {
      if (r.question_id == "t-0") return std::string("  ");
      if (r.question_id == "t-1") return std::string("east or west");
      return std::string("It is south.");
    });
    Runner runner(plan, provider, dir.path());
    CHECK(runner.run_repeat(1) == std::vector<std::uint8_t>{0, 0, 1});
    std::map<std::string, std::optional<std::string>> flags;
    for (const auto& r : RunStore(dir.path()).load("r3").records) flags[r.question_id] = r.flag;
    CHECK(flags["t-0"] == "empty_response");
    CHECK(flags["t-1"] == "ambiguous");
    CHECK(!flags["t-2"]);
  }
}

TEST_CASE("adaptive stopping") {
  testing::TempDir dir;
  SUBCASE("frozen simulator stops at two repeats with zero width") {
    auto plan = testing::sim_plan(testing::small_suite(), "frozen");
    plan.params.temperature = 0.0;
    plan.params.seed = 42;
    const auto result = run_sim(plan, dir.path());
    CHECK(result.stop_reason == StopReason::threshold_met);
    CHECK(result.matrix.repeat_count() == 2);
    REQUIRE(result.interval);
    CHECK(result.interval->width() == 0.0);
    CHECK(result.means[0] == result.means[1]);
    CHECK(result.trace.size() == 1);
  }
  SUBCASE("threshold zero runs to max_repeats") {
    auto plan = testing::sim_plan(tiny(4), "zero");
    plan.params.temperature = 0.0;
    plan.params.seed = 42;
    plan.pi_width_threshold = 0.0;
    plan.max_repeats = 6;
    const auto result = run_sim(plan, dir.path());
    CHECK(result.stop_reason == StopReason::max_repeats);
    CHECK(result.matrix.repeat_count() == 6);
    CHECK(result.trace.size() == 5);
  }
  SUBCASE("min_repeats holds off an early stop") {
    auto plan = testing::sim_plan(tiny(4), "min");
    plan.params.temperature = 0.0;
    plan.params.seed = 1;
    plan.min_repeats = 5;
    CHECK(run_sim(plan, dir.path()).matrix.repeat_count() == 5);
  }
  SUBCASE("every request failing is degenerate") {
    auto plan = testing::sim_plan(tiny(), "dead");
    FailingProvider provider(ProviderErrorKind::exhausted);
    const auto result = run_adaptive(plan, provider, dir.path());
    CHECK(result.stop_reason == StopReason::degenerate);
    CHECK(result.matrix.repeat_count() == 1);
    CHECK(!result.interval);
    CHECK(result.metadata.flagged_records == 3);
    for (const auto& r : RunStore(dir.path()).load("dead").records) {
      CHECK(r.flag == "transport_exhausted");
      CHECK(!r.raw_response);
      CHECK(r.attempt_count == 3);
    }
  }
  SUBCASE("authentication failure aborts the run") {
    auto plan = testing::sim_plan(tiny(), "auth");
    FailingProvider provider(ProviderErrorKind::auth);
    CHECK_THROWS_AS(run_adaptive(plan, provider, dir.path()), ProviderError);
  }
  SUBCASE("an existing run id is not overwritten") {
    auto plan = testing::sim_plan(tiny(), "dup");
    plan.params.temperature = 0.0;
    plan.params.seed = 1;
    run_sim(plan, dir.path());
    CHECK_THROWS_AS(run_sim(plan, dir.path()), ValidationError);
  }
}

TEST_CASE("request count never exceeds q times max_repeats") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    testing::TempDir dir;
    auto plan = testing::sim_plan(tiny(5), "calls", 0.6, seed);
    plan.max_repeats = 7;
    plan.pi_width_threshold = 0.05;
    SimulatedChatProvider provider(plan.provider, plan.benchmark);
    Runner runner(plan, provider, dir.path());
    const auto result = runner.run_adaptive();
    CHECK(runner.requests_made() <= 5 * 7);
    CHECK(runner.requests_made() == 5 * result.matrix.repeat_count());
  }
}

TEST_CASE("seeded simulator regression") {
  // Frozen outputs of the seeded simulator; a change here means the RNG
  // stream, the generator or the stopping rule changed.
  testing::TempDir dir;
  auto plan = testing::sim_plan(testing::small_suite(), "seed7", 0.85, 7);
  plan.params.temperature = 1.0;
  SUBCASE("default threshold") {
    // Repeats 1 and 2 both score 0.86, so the two-point interval has zero
    // width and the rule stops immediately.
    const auto result = run_sim(plan, dir.path());
    CHECK(result.stop_reason == StopReason::threshold_met);
    CHECK(result.matrix.repeat_count() == 2);
    CHECK(testing::matrix_hash(result.matrix) == 6498527782356778194ull);
    CHECK(result.summary.mean == doctest::Approx(0.86).epsilon(1e-12));
  }
  SUBCASE("all thirty repeats") {
    plan.pi_width_threshold = 0.0;
    const auto result = run_sim(plan, dir.path());
    CHECK(result.stop_reason == StopReason::max_repeats);
    CHECK(result.matrix.repeat_count() == 30);
    CHECK(testing::matrix_hash(result.matrix) == 12148500296313595765ull);
    CHECK(result.summary.mean == doctest::Approx(0.857).epsilon(1e-12));
    REQUIRE(result.interval);
    CHECK(result.interval->width() == doctest::Approx(0.046174253715008051).epsilon(1e-12));
  }
}

TEST_CASE("concurrency does not change results") {
  testing::TempDir a, b;
  auto plan = testing::sim_plan(testing::small_suite(), "conc", 0.7, 11);
  plan.max_repeats = 5;
  plan.provider.max_concurrency = 1;
  const auto serial = run_sim(plan, a.path());
  plan.provider.max_concurrency = 8;
  const auto parallel = run_sim(plan, b.path());
  CHECK(serial.matrix == parallel.matrix);
  CHECK(to_json(serial, false).dump() == to_json(parallel, false).dump());
}

TEST_CASE("resume") {
  auto bench = testing::small_suite();
  auto plan = testing::sim_plan(bench, "res", 0.8, 5);
  plan.max_repeats = 8;
  testing::TempDir ref_dir;
  const auto reference = run_sim(plan, ref_dir.path());
  REQUIRE(reference.matrix.repeat_count() == 8);
  const std::string expected = to_json(reference, false).dump();

  SUBCASE("after an interrupted loop") {
    testing::TempDir dir;
    SimulatedChatProvider provider(plan.provider, bench);
    {
      Runner runner(plan, provider, dir.path());
      runner.set_observer([](std::size_t j) { return j < 3; });
      CHECK_THROWS_AS(runner.run_adaptive(), RunInterrupted);
    }
    CHECK(analyze_run(RunStore(dir.path()).load("res")).stop_reason == StopReason::incomplete);
    Runner again(plan, provider, dir.path());
    const auto resumed = again.resume();
    CHECK(to_json(resumed, false).dump() == expected);
    CHECK(again.requests_made() == bench->size() * 5);
    // Workers append in completion order, so compare the logs as line sets.
    auto got = lines_of(testing::read_file(dir / "res.jsonl"));
    auto want = lines_of(testing::read_file(ref_dir / "res.jsonl"));
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
  }
  SUBCASE("after a crash mid-repeat with a torn final line") {
    testing::TempDir dir;
    const auto lines = lines_of(testing::read_file(ref_dir / "res.jsonl"));
    const std::size_t keep = 1 + bench->size() * 2 + 5;  // header, two repeats, part of a third
    {
      std::ofstream out(dir / "res.jsonl", std::ios::binary);
      for (std::size_t i = 0; i < keep; ++i) out << lines[i] << '\n';
      out << lines[keep].substr(0, lines[keep].size() / 2);
    }
    SimulatedChatProvider provider(plan.provider, bench);
    Runner runner(plan, provider, dir.path());
    const auto resumed = runner.resume();
    CHECK(to_json(resumed, false).dump() == expected);
    CHECK(runner.requests_made() == bench->size() * 8 - (keep - 1));
    // The torn fragment is gone and the log parses cleanly.
    CHECK(RunStore(dir.path()).load("res").records.size() == bench->size() * 8);
  }
  SUBCASE("a finished run makes no further requests") {
    SimulatedChatProvider provider(plan.provider, bench);
    Runner runner(plan, provider, ref_dir.path());
    const auto resumed = runner.resume();
    CHECK(runner.requests_made() == 0);
    CHECK(to_json(resumed, false).dump() == expected);
  }
  SUBCASE("a changed plan is refused") {
    auto changed = plan;
    changed.params.temperature = 0.3;
    SimulatedChatProvider provider(changed.provider, bench);
    Runner runner(changed, provider, ref_dir.path());
    try {
      runner.resume();
      FAIL("expected a plan mismatch");
    } catch (const PlanMismatchError& e) {
      CHECK(std::string(e.what()).find("temperature") != std::string::npos);
    }
  }
  SUBCASE("a missing run cannot be resumed") {
    testing::TempDir dir;
    SimulatedChatProvider provider(plan.provider, bench);
    Runner runner(plan, provider, dir.path());
    CHECK_THROWS_AS(runner.resume(), ValidationError);
  }
}

TEST_CASE("run log parsing") {
  testing::TempDir dir;
  auto plan = testing::sim_plan(tiny(), "log", 0.5, 3);
  plan.max_repeats = 3;
  plan.pi_width_threshold = 0.0;
  run_sim(plan, dir.path());
  const std::string text = testing::read_file(dir / "log.jsonl");
  auto lines = lines_of(text);
  REQUIRE(lines.size() == 1 + 3 * 3);
  CHECK(json::parse(lines[0])["type"] == "plan");

  SUBCASE("intact log") {
    std::istringstream in(text);
    const auto run = parse_run_log(in);
    CHECK(run.records.size() == 9);
    CHECK(run.intact_bytes == text.size());
  }
  SUBCASE("corrupt middle line reports its line number") {
    lines[4] = "{\"type\":\"record\", garbage";
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    std::istringstream in(joined);
    try {
      parse_run_log(in);
      FAIL("expected corruption");
    } catch (const CorruptRecordError& e) {
      CHECK(std::string(e.what()).find("5") != std::string::npos);
    }
  }
  SUBCASE("record with a missing field") {
    auto obj = json::parse(lines[2]);
    obj.erase("score");
    lines[2] = obj.dump();
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    std::istringstream in(joined);
    CHECK_THROWS_AS(parse_run_log(in), CorruptRecordError);
  }
  SUBCASE("duplicate record") {
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    joined += lines[3] + "\n";
    std::istringstream in(joined);
    CHECK_THROWS_AS(parse_run_log(in), CorruptRecordError);
  }
  SUBCASE("torn final line is dropped") {
    const std::string torn = text + lines[1].substr(0, 20);
    std::istringstream in(torn);
    const auto run = parse_run_log(in);
    CHECK(run.records.size() == 9);
    CHECK(run.intact_bytes == text.size());
  }
  SUBCASE("missing header") {
    std::istringstream in(lines[1] + "\n");
    CHECK_THROWS_AS(parse_run_log(in), CorruptRecordError);
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_run_log(empty), CorruptRecordError);
  }
  SUBCASE("record round trip") {
    const auto obj = json::parse(lines[1]);
    CHECK(to_json(record_from_json(obj, 2)) == obj);
  }
}

TEST_CASE("analysis of a stored log reproduces the summary file") {
  testing::TempDir dir;
  auto plan = testing::sim_plan(testing::small_suite(), "an", 0.75, 9);
  plan.max_repeats = 6;
  const auto result = run_sim(plan, dir.path());
  const auto stored = RunStore(dir.path()).load("an");
  const auto again = analyze_run(stored);
  CHECK(to_json(again).dump(2) + "\n" == testing::read_file(dir / "an.summary.json"));
  CHECK(to_json(again).dump() == to_json(result).dump());
  CHECK(again.metadata.plan_hash == plan_hash(plan));
  CHECK(again.metadata.provider_echo.at("model") == "simulated");
}

TEST_CASE("plan identity") {
  auto plan = testing::sim_plan(tiny(), "id");
  const auto h = plan_hash(plan);
  CHECK(h.size() == 16);
  auto other = plan;
  other.run_id = "another";
  other.provider.max_concurrency = 16;
  CHECK(plan_hash(other) == h);
  other.params.seed = 3;
  CHECK(plan_hash(other) != h);
  other = plan;
  other.confidence = 0.9;
  CHECK(plan_hash(other) != h);
  CHECK(plan_to_json(plan).at("question_ids").size() == 3);
}

TEST_CASE("credentials never reach the run log or summary") {
  testing::TempDir dir;
  ::setenv("PIBENCH_RUNNER_KEY", "sk-very-secret-value", 1);
  auto plan = testing::sim_plan(tiny(), "cred");
  plan.provider.kind = ProviderKind::openai_dialect;
  plan.provider.name = "oa";
  plan.provider.endpoint = "https://api.example.com/v1";
  plan.provider.model_id = "m";
  plan.provider.credentials_env = "PIBENCH_RUNNER_KEY";
  plan.params.temperature = 0.0;
  HttpChatProvider provider(plan.provider, std::make_shared<NorthTransport>(), plan.clock);
  const auto result = run_adaptive(plan, provider, dir.path());
  CHECK(result.stop_reason == StopReason::threshold_met);
  CHECK(result.metadata.provider_echo.at("model") == "m-1");
  const auto log = testing::read_file(dir / "cred.jsonl");
  const auto summary = testing::read_file(dir / "cred.summary.json");
  CHECK(log.find("sk-very-secret-value") == std::string::npos);
  CHECK(summary.find("sk-very-secret-value") == std::string::npos);
  CHECK(log.find("PIBENCH_RUNNER_KEY") != std::string::npos);
}

TEST_CASE("stop reason names") {
  for (auto r : {StopReason::threshold_met, StopReason::max_repeats, StopReason::degenerate,
                 StopReason::incomplete}) {
    CHECK(parse_stop_reason(to_string(r)) == r);
  }
  CHECK_THROWS_AS(parse_stop_reason("bored"), ValidationError);
}
