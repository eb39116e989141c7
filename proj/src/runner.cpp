#include "pibench/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "pibench/keyed_random.hpp"

namespace pibench {

using nlohmann::json;

namespace {

json params_to_json(const SamplingParams& p) {
  json out = json::object();
  if (p.temperature) out["temperature"] = *p.temperature;
  if (p.seed) out["seed"] = *p.seed;
  if (p.top_p) out["top_p"] = *p.top_p;
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json capabilities_to_json(const Capabilities& c) {
  return {{"temperature", c.temperature}, {"seed", c.seed}, {"top_p", c.top_p}};
}

json simulated_to_json(const SimulatedModelSpec& s) {
  return {{"accuracy", s.accuracy},
          {"per_question_accuracy", s.per_question_accuracy},
          {"deterministic_at_zero", s.deterministic_at_zero},
          {"master_seed", s.master_seed}};
}

}  // namespace

void ExperimentPlan::validate() const {
  if (!benchmark) throw ValidationError("plan has no benchmark");
  pibench::validate(*benchmark);
  provider.validate();
  params.validate();
  if (min_repeats < 2) throw ValidationError("min_repeats must be at least 2");
  if (max_repeats < min_repeats) throw ValidationError("max_repeats must be >= min_repeats");
  if (!(pi_width_threshold >= 0.0)) throw ValidationError("pi_width_threshold must be >= 0");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ValidationError("confidence must lie strictly in (0, 1)");
  }
  if (run_id.empty()) throw ValidationError("plan has no run id");
  if (run_id.find_first_of("/\\") != std::string::npos || run_id == "." || run_id == "..") {
    throw ValidationError("run id '" + run_id + "' must not contain path separators");
  }
  if (!clock) throw ValidationError("plan has no clock");
}

json plan_identity(const ExperimentPlan& plan) {
  json provider = {{"kind", to_string(plan.provider.kind)},
                   {"model_id", plan.provider.model_id},
                   {"capabilities", capabilities_to_json(plan.provider.capabilities)}};
  if (plan.provider.kind == ProviderKind::simulated) {
    provider["simulated"] = simulated_to_json(plan.provider.simulated);
  } else {
    provider["endpoint"] = plan.provider.endpoint;
    provider["api_version"] = plan.provider.api_version ? json(*plan.provider.api_version) : json();
  }
  return {
      {"benchmark",
       {{"name", plan.benchmark->name},
        {"question_count", plan.benchmark->size()},
        {"content_hash", hex64(content_hash(*plan.benchmark))}}},
      {"provider", provider},
      {"params", params_to_json(plan.params)},
      {"min_repeats", plan.min_repeats},
      {"max_repeats", plan.max_repeats},
      {"pi_width_threshold", plan.pi_width_threshold},
      {"confidence", plan.confidence},
      {"grading", to_string(plan.grading)},
  };
}

std::string plan_hash(const ExperimentPlan& plan) {
  return hex64(fnv1a64(plan_identity(plan).dump()));
}

json plan_to_json(const ExperimentPlan& plan) {
  json out = plan_identity(plan);
  const auto& p = plan.provider;
  out["run_id"] = plan.run_id;
  out["provider"]["name"] = p.name;
  out["provider"]["credentials_env"] = p.credentials_env;
  out["provider"]["rate_limit_per_minute"] = p.rate_limit_per_minute;
  out["provider"]["max_concurrency"] = p.max_concurrency;
  out["provider"]["retry"] = {
      {"max_attempts", p.retry.max_attempts},
      {"base_backoff_ms",
       std::chrono::duration<double, std::milli>(p.retry.base_backoff).count()},
      {"multiplier", p.retry.multiplier}};
  out["provider"]["timeout_ms"] = std::chrono::duration<double, std::milli>(p.timeout).count();
  out["question_ids"] = plan.benchmark->question_ids();
  out["warnings"] = json::array();
  for (const auto& name : unsupported_params(p, plan.params)) {
    out["warnings"].push_back("parameter '" + name + "' is not supported by provider '" + p.name +
                              "' and was not sent");
  }
  return out;
}

// ---------------------------------------------------------------------------

json to_json(const RunRecord& r) {
  json out = {{"type", "record"},
              {"run_id", r.run_id},
              {"repeat_index", r.repeat_index},
              {"question_id", r.question_id},
              {"raw_response", r.raw_response ? json(*r.raw_response) : json()},
              {"normalized_answer", r.normalized_answer ? json(*r.normalized_answer) : json()},
              {"score", r.score},
              {"attempt_count", r.attempt_count},
              {"latency_ms", r.latency_ms},
              {"timestamp", r.timestamp}};
  if (r.flag) out["flag"] = *r.flag;
  if (!r.provider_echo.empty()) out["provider_echo"] = r.provider_echo;
  return out;
}

RunRecord record_from_json(const json& obj, std::size_t line) {
  try {
    RunRecord r;
    r.run_id = obj.at("run_id").get<std::string>();
    r.repeat_index = obj.at("repeat_index").get<std::size_t>();
    r.question_id = obj.at("question_id").get<std::string>();
    if (const auto& raw = obj.at("raw_response"); !raw.is_null()) r.raw_response = raw.get<std::string>();
    if (const auto& n = obj.at("normalized_answer"); !n.is_null()) r.normalized_answer = n.get<std::string>();
    r.score = obj.at("score").get<int>();
    r.attempt_count = obj.at("attempt_count").get<int>();
    r.latency_ms = obj.at("latency_ms").get<double>();
    r.timestamp = obj.at("timestamp").get<std::string>();
    if (auto it = obj.find("flag"); it != obj.end()) r.flag = it->get<std::string>();
    if (auto it = obj.find("provider_echo"); it != obj.end()) {
      r.provider_echo = it->get<std::map<std::string, std::string>>();
    }
    if (r.score != 0 && r.score != 1) throw CorruptRecordError(line, "score must be 0 or 1");
    if (r.repeat_index == 0) throw CorruptRecordError(line, "repeat_index must be >= 1");
    return r;
  } catch (const json::exception& e) {
    throw CorruptRecordError(line, std::string("invalid run record: ") + e.what());
  }
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::threshold_met:
      return "threshold_met";
    case StopReason::max_repeats:
      return "max_repeats";
    case StopReason::degenerate:
      return "degenerate";
    case StopReason::incomplete:
      return "incomplete";
  }
  return "unknown";
}

StopReason parse_stop_reason(std::string_view text) {
  for (auto r : {StopReason::threshold_met, StopReason::max_repeats, StopReason::degenerate,
                 StopReason::incomplete}) {
    if (text == to_string(r)) return r;
  }
  throw ValidationError("unknown stop reason '" + std::string(text) + "'");
}

json to_json(const RunResult& result, bool include_volatile) {
  const auto& m = result.metadata;
  json columns = json::array();
  for (std::size_t j = 0; j < result.matrix.repeat_count(); ++j) {
    std::string col;
    for (auto v : result.matrix.column(j)) col.push_back(v ? '1' : '0');
    columns.push_back(std::move(col));
  }
  json summary = {{"mean", result.summary.mean},
                  {"std_dev", result.summary.std_dev ? json(*result.summary.std_dev) : json()},
                  {"min", result.summary.min_score},
                  {"max", result.summary.max_score},
                  {"range", result.summary.range()},
                  {"repeats", result.summary.repeats}};
  json interval;
  if (result.interval) {
    const auto& pi = *result.interval;
    interval = {{"lower", pi.lower},         {"upper", pi.upper}, {"width", pi.width()},
                {"mean", pi.mean},           {"confidence", pi.confidence},
                {"n", pi.n},                 {"n_future", pi.n_future ? json(*pi.n_future) : json()}};
  }
  json trace = json::array();
  for (const auto& p : result.trace) {
    trace.push_back(
        {{"n", p.n}, {"lower", p.lower}, {"upper", p.upper}, {"width", p.width}, {"mean", p.mean}});
  }
  json out = {
      {"run_id", m.run_id},
      {"plan_hash", m.plan_hash},
      {"benchmark", m.benchmark_name},
      {"provider",
       {{"name", m.provider_name},
        {"kind", m.provider_kind},
        {"model_id", m.model_id},
        {"api_version", m.api_version ? json(*m.api_version) : json()}}},
      {"params", m.params},
      {"provider_echo", m.provider_echo},
      {"warnings", m.warnings},
      {"flagged_records", m.flagged_records},
      {"question_count", result.matrix.question_count()},
      {"repeats", result.matrix.repeat_count()},
      {"repeat_means", result.means.values()},
      {"summary", summary},
      {"prediction_interval", interval},
      {"stop_reason", to_string(result.stop_reason)},
      {"pi_trace", trace},
      {"score_matrix", {{"question_ids", result.matrix.question_ids()}, {"columns", columns}}},
  };
  if (include_volatile) {
    out["started_utc"] = m.started_utc;
    out["finished_utc"] = m.finished_utc;
  }
  return out;
}

// ---------------------------------------------------------------------------

RunStore::RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path RunStore::log_path(const std::string& run_id) const {
  return dir_ / (run_id + ".jsonl");
}

std::filesystem::path RunStore::summary_path(const std::string& run_id) const {
  return dir_ / (run_id + ".summary.json");
}

bool RunStore::exists(const std::string& run_id) const {
  return std::filesystem::exists(log_path(run_id));
}

StoredRun parse_run_log(std::istream& in) {
  StoredRun run;
  std::size_t line_no = 0;
  std::uintmax_t offset = 0;
  std::set<std::pair<std::size_t, std::string>> seen;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const bool terminated = !in.eof();
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      // An unterminated final line is a write cut short by a crash.
      if (!terminated) break;
      throw CorruptRecordError(line_no, "run log line is not valid JSON");
    }
    if (!terminated && line_no > 1) {
      // Parsed but unterminated: still a torn write (the newline never landed).
      break;
    }
    if (line_no == 1) {
      if (!obj.is_object() || obj.value("type", "") != "plan" || !obj.contains("plan") ||
          !obj.contains("plan_hash")) {
        throw CorruptRecordError(line_no, "run log does not start with a plan header");
      }
      run.plan = obj["plan"];
      run.plan_hash = obj["plan_hash"].get<std::string>();
    } else {
      if (!obj.is_object() || obj.value("type", "") != "record") {
        throw CorruptRecordError(line_no, "expected a run record");
      }
      auto record = record_from_json(obj, line_no);
      if (!seen.emplace(record.repeat_index, record.question_id).second) {
        throw CorruptRecordError(line_no, "duplicate record for repeat " +
                                              std::to_string(record.repeat_index) +
                                              ", question '" + record.question_id + "'");
      }
      run.records.push_back(std::move(record));
    }
    offset += line.size() + 1;
  }
  if (line_no == 0 || run.plan.is_null()) throw CorruptRecordError(1, "run log is empty");
  run.intact_bytes = offset;
  return run;
}

StoredRun RunStore::load(const std::string& run_id) const {
  std::ifstream in(log_path(run_id), std::ios::binary);
  if (!in) throw ValidationError("no run log for run '" + run_id + "' in " + dir_.string());
  return parse_run_log(in);
}

void RunStore::create(const std::string& run_id, const json& plan, const std::string& hash) {
  std::lock_guard lock(mutex_);
  std::filesystem::create_directories(dir_);
  const auto path = log_path(run_id);
  if (std::filesystem::exists(path)) {
    throw ValidationError("run '" + run_id + "' already exists; use resume to continue it");
  }
  out_.open(path, std::ios::binary | std::ios::out | std::ios::trunc);
  if (!out_) throw ValidationError("cannot create run log '" + path.string() + "'");
  out_ << json{{"type", "plan"}, {"plan", plan}, {"plan_hash", hash}}.dump() << '\n';
  out_.flush();
}

void RunStore::reopen(const std::string& run_id, std::uintmax_t intact_bytes) {
  std::lock_guard lock(mutex_);
  const auto path = log_path(run_id);
  if (std::filesystem::file_size(path) > intact_bytes) {
    std::filesystem::resize_file(path, intact_bytes);
  }
  out_.open(path, std::ios::binary | std::ios::out | std::ios::app);
  if (!out_) throw ValidationError("cannot reopen run log '" + path.string() + "'");
}

void RunStore::append(const RunRecord& record) {
  std::lock_guard lock(mutex_);
  if (!out_.is_open()) throw ValidationError("run log is not open");
  out_ << to_json(record).dump() << '\n';
  out_.flush();
  if (!out_) throw ValidationError("failed to append to run log for '" + record.run_id + "'");
}

void RunStore::write_summary(const RunResult& result) const {
  const auto path = summary_path(result.metadata.run_id);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << to_json(result).dump(2) << '\n';
    if (!out) throw ValidationError("cannot write summary '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------

namespace {

// Paths of fields in `now` whose stored counterpart differs.
void collect_changes(const json& now, const json& stored, const std::string& prefix,
                     std::vector<std::string>& out) {
  for (const auto& [key, value] : now.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    const auto it = stored.find(key);
    if (it == stored.end()) {
      out.push_back(path);
    } else if (value.is_object() && it->is_object()) {
      collect_changes(value, *it, path, out);
    } else if (value != *it) {
      out.push_back(path);
    }
  }
}

bool transport_failed(const RunRecord& r) {
  return r.flag && r.flag->rfind("transport_", 0) == 0;
}

struct StopRule {
  std::size_t min_repeats;
  std::size_t max_repeats;
  double threshold;
  double confidence;
};

// Decision after repeat n given the means so far; nullopt means keep going.
std::optional<StopReason> decide(const StopRule& rule, const RepeatMeans& means,
                                 bool repeat_all_failed) {
  const std::size_t n = means.size();
  if (repeat_all_failed) return StopReason::degenerate;
  if (n >= rule.min_repeats && n >= 2) {
    const auto pi = prediction_interval(means, Probability{rule.confidence});
    if (pi.width() < rule.threshold) return StopReason::threshold_met;
  }
  if (n >= rule.max_repeats) return StopReason::max_repeats;
  return std::nullopt;
}

}  // namespace

RunResult analyze_run(const StoredRun& run) {
  const json& plan = run.plan;
  StopRule rule;
  std::vector<std::string> ids;
  try {
    rule = {plan.at("min_repeats").get<std::size_t>(), plan.at("max_repeats").get<std::size_t>(),
            plan.at("pi_width_threshold").get<double>(), plan.at("confidence").get<double>()};
    ids = plan.at("question_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw CorruptRecordError(1, std::string("plan header is incomplete: ") + e.what());
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

  // repeat -> question index -> record
  std::map<std::size_t, std::map<std::size_t, const RunRecord*>> by_repeat;
  for (const auto& r : run.records) {
    const auto it = index.find(r.question_id);
    if (it == index.end()) {
      throw ValidationError("run record names unknown question '" + r.question_id + "'");
    }
    by_repeat[r.repeat_index][it->second] = &r;
  }

  std::vector<std::vector<std::uint8_t>> columns;
  std::vector<double> means;
  std::optional<StopReason> stop;
  std::vector<const RunRecord*> included;
  for (std::size_t j = 1; !stop; ++j) {
    const auto it = by_repeat.find(j);
    if (it == by_repeat.end() || it->second.size() != ids.size()) break;
    std::vector<std::uint8_t> col(ids.size());
    bool all_failed = true;
    std::size_t correct = 0;
    for (const auto& [i, rec] : it->second) {
      col[i] = static_cast<std::uint8_t>(rec->score);
      correct += static_cast<std::size_t>(rec->score);
      all_failed = all_failed && transport_failed(*rec);
      included.push_back(rec);
    }
    columns.push_back(std::move(col));
    means.push_back(static_cast<double>(correct) / static_cast<double>(ids.size()));
    stop = decide(rule, RepeatMeans(means), all_failed);
  }
  if (columns.empty()) throw ValidationError("run has no complete repeat to analyse");

  RunResult result{ScoreMatrix(ids, std::move(columns)), {}, {}, {}, {}, {}, {}};
  result.means = per_repeat_means(result.matrix);
  result.summary = summarize(result.means);
  result.stop_reason = stop.value_or(StopReason::incomplete);
  if (result.means.size() >= 2) {
    result.interval = prediction_interval(result.means, Probability{rule.confidence});
    result.trace = prefix_intervals(result.means, Probability{rule.confidence});
  }

  auto& m = result.metadata;
  m.run_id = plan.value("run_id", "");
  m.plan_hash = run.plan_hash;
  m.benchmark_name = plan.at("benchmark").value("name", "");
  const auto& provider = plan.at("provider");
  m.provider_name = provider.value("name", "");
  m.provider_kind = provider.value("kind", "");
  m.model_id = provider.value("model_id", "");
  if (auto it = provider.find("api_version"); it != provider.end() && it->is_string()) {
    m.api_version = it->get<std::string>();
  }
  m.params = plan.value("params", json::object());
  m.warnings = plan.value("warnings", std::vector<std::string>{});
  for (const auto* rec : included) {
    if (rec->flag) ++m.flagged_records;
    if (m.provider_echo.empty() && !rec->provider_echo.empty()) m.provider_echo = rec->provider_echo;
    if (m.started_utc.empty() || rec->timestamp < m.started_utc) m.started_utc = rec->timestamp;
    if (rec->timestamp > m.finished_utc) m.finished_utc = rec->timestamp;
  }
  return result;
}

// ---------------------------------------------------------------------------

Runner::Runner(ExperimentPlan plan, ChatProvider& provider, std::filesystem::path runs_dir)
    : plan_(std::move(plan)), provider_(provider), store_(std::move(runs_dir)) {
  plan_.validate();
  plan_json_ = plan_to_json(plan_);
  hash_ = plan_hash(plan_);
}

RunRecord Runner::ask(const Question& question, std::size_t repeat_index) {
  ChatRequest request{plan_.benchmark->system_prompt, question.prompt, plan_.params, question.id,
                      repeat_index};
  RunRecord record;
  record.run_id = plan_.run_id;
  record.repeat_index = repeat_index;
  record.question_id = question.id;
  requests_.fetch_add(1);
  try {
    const ChatExchange ex = provider_.complete(request);
    record.raw_response = ex.response_text.value_or("");
    record.attempt_count = ex.attempt_count;
    record.latency_ms = std::chrono::duration<double, std::milli>(ex.latency).count();
    record.provider_echo = ex.provider_echo;
    const std::string& text = *record.raw_response;
    record.score = grade(text, question, plan_.grading);
    if (const auto norm = normalize_answer(text)) {
      record.normalized_answer = std::string(to_string(*norm));
    }
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      record.flag = "empty_response";
    } else if (plan_.grading == GradingMode::strict && !record.normalized_answer) {
      record.flag = "unparseable";
    } else if (plan_.grading == GradingMode::lenient && find_directions(text).size() != 1) {
      record.flag = find_directions(text).empty() ? "unparseable" : "ambiguous";
    }
  } catch (const ProviderError& e) {
    if (e.kind() == ProviderErrorKind::auth) throw;
    record.score = 0;
    record.attempt_count = e.attempts();
    record.flag = "transport_" + std::string(to_string(e.kind()));
  }
  record.timestamp = format_utc_iso8601(plan_.clock->utc_now());
  return record;
}

std::vector<std::uint8_t> Runner::run_repeat(std::size_t repeat_index) {
  if (repeat_index == 0) throw ValidationError("repeat index is 1-based");
  if (!std::filesystem::exists(store_.log_path(plan_.run_id))) {
    store_.create(plan_.run_id, plan_json_, hash_);
  }
  const auto& questions = plan_.benchmark->questions;
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (!records_.contains({repeat_index, questions[i].id})) missing.push_back(i);
  }

  std::mutex mutex;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= missing.size()) return;
      try {
        RunRecord record = ask(questions[missing[k]], repeat_index);
        store_.append(record);
        std::lock_guard lock(mutex);
        records_.insert_or_assign({repeat_index, record.question_id}, std::move(record));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        abort.store(true);
        return;
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(plan_.provider.max_concurrency), missing.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::uint8_t> column;
  column.reserve(questions.size());
  for (const auto& q : questions) {
    column.push_back(static_cast<std::uint8_t>(records_.at({repeat_index, q.id}).score));
  }
  return column;
}

RunResult Runner::loop() {
  const StopRule rule{plan_.min_repeats, plan_.max_repeats, plan_.pi_width_threshold,
                      plan_.confidence};
  std::vector<double> means;
  const double q = static_cast<double>(plan_.benchmark->size());
  for (std::size_t j = 1;; ++j) {
    const auto column = run_repeat(j);
    std::size_t correct = 0;
    for (auto v : column) correct += v;
    means.push_back(static_cast<double>(correct) / q);
    bool all_failed = true;
    for (const auto& question : plan_.benchmark->questions) {
      all_failed = all_failed && transport_failed(records_.at({j, question.id}));
    }
    if (decide(rule, RepeatMeans(means), all_failed)) break;
    if (observer_ && !observer_(j)) throw RunInterrupted(j);
  }

  StoredRun stored{plan_json_, hash_, {}, 0};
  stored.records.reserve(records_.size());
  for (const auto& [key, record] : records_) stored.records.push_back(record);
  RunResult result = analyze_run(stored);
  store_.write_summary(result);
  return result;
}

RunResult Runner::run_adaptive() {
  store_.create(plan_.run_id, plan_json_, hash_);
  return loop();
}

RunResult Runner::resume() {
  StoredRun stored = store_.load(plan_.run_id);
  if (stored.plan_hash != hash_) {
    std::vector<std::string> changed;
    collect_changes(plan_identity(plan_), stored.plan, "", changed);
    std::string fields;
    for (const auto& c : changed) fields += (fields.empty() ? "" : ", ") + c;
    throw PlanMismatchError("plan for run '" + plan_.run_id +
                            "' differs from the stored run (changed: " +
                            (fields.empty() ? std::string("plan hash") : fields) + ")");
  }
  records_.clear();
  for (auto& r : stored.records) {
    auto key = std::make_pair(r.repeat_index, r.question_id);
    records_.insert_or_assign(std::move(key), std::move(r));
  }
  store_.reopen(plan_.run_id, stored.intact_bytes);
  return loop();
}

RunResult run_adaptive(const ExperimentPlan& plan, ChatProvider& provider,
                       const std::filesystem::path& runs_dir) {
  Runner runner(plan, provider, runs_dir);
  return runner.run_adaptive();
}

RunResult resume(const std::string& run_id, const ExperimentPlan& plan, ChatProvider& provider,
                 const std::filesystem::path& runs_dir) {
  ExperimentPlan p = plan;
  p.run_id = run_id;
  Runner runner(std::move(p), provider, runs_dir);
  return runner.resume();
}

}  // namespace pibench
