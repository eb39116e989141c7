#include "pibench/benchmark.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "pibench/keyed_random.hpp"

namespace pibench {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kDirectionNames = {
    "north", "north-east", "east", "south-east", "south", "south-west", "west", "north-west",
};

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Compact spelling with separators removed ("north-east" -> "northeast").
std::optional<Direction> from_compact(std::string_view compact) {
  for (std::size_t k = 0; k < kDirectionNames.size(); ++k) {
    std::string name;
    for (char c : kDirectionNames[k]) {
      if (c != '-') name.push_back(c);
    }
    if (compact == name) return static_cast<Direction>(k);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Direction d) { return kDirectionNames[static_cast<std::size_t>(d)]; }

std::optional<Direction> parse_canonical(std::string_view text) {
  for (std::size_t k = 0; k < kDirectionNames.size(); ++k) {
    if (text == kDirectionNames[k]) return static_cast<Direction>(k);
  }
  return std::nullopt;
}

int bearing(Direction d) { return 45 * static_cast<int>(d); }

Direction from_bearing(int degrees) {
  if (degrees % 45 != 0) {
    throw ValidationError("bearing " + std::to_string(degrees) + " is not a multiple of 45");
  }
  const int normalized = ((degrees % 360) + 360) % 360;
  return static_cast<Direction>(normalized / 45);
}

Direction opposite(Direction d) { return from_bearing(bearing(d) + 180); }

const std::vector<Direction>& cardinal_directions() {
  static const std::vector<Direction> dirs = {Direction::north, Direction::east, Direction::south,
                                              Direction::west};
  return dirs;
}

const std::vector<Direction>& all_directions() {
  static const std::vector<Direction> dirs = {
      Direction::north, Direction::north_east, Direction::east, Direction::south_east,
      Direction::south, Direction::south_west, Direction::west, Direction::north_west,
  };
  return dirs;
}

std::vector<std::string> Benchmark::question_ids() const {
  std::vector<std::string> ids;
  ids.reserve(questions.size());
  for (const auto& q : questions) ids.push_back(q.id);
  return ids;
}

void validate(const Benchmark& benchmark) {
  if (benchmark.questions.empty()) {
    throw ValidationError("benchmark '" + benchmark.name + "' has no questions");
  }
  if (benchmark.vocabulary.empty()) {
    throw ValidationError("benchmark '" + benchmark.name + "' has an empty answer vocabulary");
  }
  std::set<std::string_view> seen;
  for (const auto& q : benchmark.questions) {
    if (q.id.empty()) throw ValidationError("question with empty id");
    if (!seen.insert(q.id).second) throw ValidationError("duplicate question id '" + q.id + "'");
    if (q.expected.empty()) {
      throw ValidationError("question '" + q.id + "' has no expected answer");
    }
    for (Direction d : q.expected) {
      if (!benchmark.vocabulary.contains(d)) {
        throw ValidationError("question '" + q.id + "': expected answer '" +
                              std::string(to_string(d)) + "' is not in the answer vocabulary");
      }
    }
  }
}

std::optional<Direction> normalize_answer(std::string_view text) {
  std::string s = ascii_lower(text);

  constexpr std::string_view kTrailing = ".,;:!?\"'`*)]";
  constexpr std::string_view kLeading = "\"'`*([";
  std::size_t begin = 0;
  std::size_t end = s.size();
  for (bool changed = true; changed;) {
    changed = false;
    while (begin < end && is_space(s[begin])) ++begin;
    while (end > begin && is_space(s[end - 1])) --end;
    if (end > begin && kTrailing.find(s[end - 1]) != std::string_view::npos) {
      --end;
      changed = true;
    }
    if (end > begin && kLeading.find(s[begin]) != std::string_view::npos) {
      ++begin;
      changed = true;
    }
  }

  // Collapse whitespace, then fold separators.
  std::string collapsed;
  for (std::size_t k = begin; k < end; ++k) {
    if (is_space(s[k])) {
      if (!collapsed.empty() && collapsed.back() != ' ') collapsed.push_back(' ');
    } else {
      collapsed.push_back(s[k]);
    }
  }
  // Pieces separated by spaces; a lone hyphen between words is a separator.
  std::vector<std::string> pieces;
  std::istringstream words(collapsed);
  for (std::string w; words >> w;) {
    if (w != "-") pieces.push_back(std::move(w));
  }
  auto strip = [](std::string w) {
    std::erase_if(w, [](char c) { return c == '-' || c == '_'; });
    return w;
  };
  if (pieces.size() == 1) return from_compact(strip(pieces[0]));
  if (pieces.size() == 2 && (pieces[0] == "north" || pieces[0] == "south") &&
      (pieces[1] == "east" || pieces[1] == "west")) {
    return from_compact(pieces[0] + pieces[1]);
  }
  return std::nullopt;
}

std::string_view to_string(GradingMode mode) {
  return mode == GradingMode::strict ? "strict" : "lenient";
}

GradingMode parse_grading_mode(std::string_view text) {
  if (text == "strict") return GradingMode::strict;
  if (text == "lenient") return GradingMode::lenient;
  throw ValidationError("unknown grading mode '" + std::string(text) + "'");
}

std::vector<Direction> find_directions(std::string_view text) {
  struct Token {
    std::string word;
    std::string gap_before;
  };
  std::vector<Token> tokens;
  std::string gap;
  std::string word;
  const std::string lower = ascii_lower(text);
  for (char c : lower) {
    if (c >= 'a' && c <= 'z') {
      word.push_back(c);
    } else {
      if (!word.empty()) {
        tokens.push_back({std::move(word), std::move(gap)});
        word.clear();
        gap.clear();
      }
      gap.push_back(c);
    }
  }
  if (!word.empty()) tokens.push_back({std::move(word), std::move(gap)});

  auto joins = [](std::string_view g) {
    return !g.empty() && std::all_of(g.begin(), g.end(), [](char c) {
      return c == ' ' || c == '-' || c == '_';
    }) && std::count(g.begin(), g.end(), '-') <= 1;
  };

  std::vector<Direction> found;
  auto add = [&](Direction d) {
    if (std::find(found.begin(), found.end(), d) == found.end()) found.push_back(d);
  };
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto& w = tokens[k].word;
    if ((w == "north" || w == "south") && k + 1 < tokens.size() &&
        (tokens[k + 1].word == "east" || tokens[k + 1].word == "west") &&
        joins(tokens[k + 1].gap_before)) {
      add(*from_compact(w + tokens[k + 1].word));
      ++k;
      continue;
    }
    if (auto d = from_compact(w)) add(*d);
  }
  return found;
}

int grade(std::string_view response, const Question& question, GradingMode mode) {
  if (mode == GradingMode::strict) {
    const auto answer = normalize_answer(response);
    return answer && question.expected.contains(*answer) ? 1 : 0;
  }
  const auto found = find_directions(response);
  return found.size() == 1 && question.expected.contains(found.front()) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// File format

namespace {

std::set<Direction> parse_direction_list(const json& list, std::size_t line,
                                         const std::string& what) {
  if (!list.is_array()) throw ParseError(line, "'" + what + "' must be an array of strings");
  std::set<Direction> out;
  for (const auto& item : list) {
    if (!item.is_string()) throw ParseError(line, "'" + what + "' must be an array of strings");
    const auto text = item.get<std::string>();
    const auto d = parse_canonical(text);
    if (!d) {
      throw ValidationError(what + " entry '" + text + "' on line " + std::to_string(line) +
                            " is not a canonical direction");
    }
    out.insert(*d);
  }
  return out;
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(line, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

json direction_array(const std::set<Direction>& dirs) {
  json arr = json::array();
  for (Direction d : dirs) arr.push_back(std::string(to_string(d)));
  return arr;
}

}  // namespace

Benchmark load_benchmark(std::istream& in) {
  Benchmark bench;
  bool have_header = false;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");

    if (!have_header) {
      bench.name = required_string(obj, "name", line_no);
      bench.system_prompt = required_string(obj, "system_prompt", line_no);
      if (!obj.contains("vocabulary")) throw ParseError(line_no, "header is missing 'vocabulary'");
      bench.vocabulary = parse_direction_list(obj["vocabulary"], line_no, "vocabulary");
      have_header = true;
      continue;
    }

    Question q;
    q.id = required_string(obj, "id", line_no);
    q.prompt = required_string(obj, "prompt", line_no);
    if (!obj.contains("expected")) throw ParseError(line_no, "question is missing 'expected'");
    const auto& expected = obj["expected"];
    if (!expected.is_array()) throw ParseError(line_no, "'expected' must be an array of strings");
    for (const auto& item : expected) {
      if (!item.is_string()) throw ParseError(line_no, "'expected' must be an array of strings");
      const auto text = item.get<std::string>();
      const auto d = parse_canonical(text);
      if (!d || !bench.vocabulary.contains(*d)) {
        throw ValidationError("question '" + q.id + "': expected answer '" + text +
                              "' is not in the answer vocabulary");
      }
      q.expected.insert(*d);
    }
    if (auto it = obj.find("category"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(line_no, "'category' must be a string");
      q.category = it->get<std::string>();
    }
    bench.questions.push_back(std::move(q));
  }
  if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "benchmark file has no header");
  validate(bench);
  return bench;
}

Benchmark load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open benchmark file '" + path.string() + "'");
  return load_benchmark(in);
}

void write_benchmark(std::ostream& out, const Benchmark& benchmark) {
  json header = {{"name", benchmark.name},
                 {"system_prompt", benchmark.system_prompt},
                 {"vocabulary", direction_array(benchmark.vocabulary)}};
  out << header.dump() << '\n';
  for (const auto& q : benchmark.questions) {
    json obj = {{"id", q.id}, {"prompt", q.prompt}, {"expected", direction_array(q.expected)}};
    if (q.category) obj["category"] = *q.category;
    out << obj.dump() << '\n';
  }
}

void save_benchmark(const std::filesystem::path& path, const Benchmark& benchmark) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write benchmark file '" + path.string() + "'");
  write_benchmark(out, benchmark);
  if (!out) throw ValidationError("failed while writing '" + path.string() + "'");
}

std::uint64_t content_hash(const Benchmark& benchmark) {
  std::ostringstream out;
  write_benchmark(out, benchmark);
  return fnv1a64(out.str());
}

// ---------------------------------------------------------------------------
// Templated generation

namespace {

Direction direction_value(const std::string& value, const std::string& role) {
  if (auto d = normalize_answer(value)) return *d;
  throw ValidationError("rule argument '" + role + "' has value '" + value +
                        "', which is not a direction");
}

const std::string& rule_value(const AnswerRule& rule,
                              const std::map<std::string, std::string>& values,
                              const std::string& role) {
  const auto arg = rule.args.find(role);
  if (arg == rule.args.end()) {
    throw ValidationError("rule '" + rule.name + "' needs argument '" + role + "'");
  }
  const auto it = values.find(arg->second);
  if (it == values.end()) {
    throw ValidationError("rule '" + rule.name + "' references undefined parameter '" +
                          arg->second + "'");
  }
  return it->second;
}

// Signed clockwise rotation in degrees for phrases like "left",
// "around", "45 degrees to the right".
int turn_degrees(const std::string& phrase) {
  const std::string p = ascii_lower(phrase);
  if (p == "left") return -90;
  if (p == "right") return 90;
  if (p == "around" || p == "round" || p == "half a turn") return 180;
  if (p == "a full circle" || p == "all the way around") return 360;
  static const std::regex kDegrees(R"((\d+) degrees (?:to the )?(left|right)(?: of that)?)");
  std::smatch m;
  if (std::regex_match(p, m, kDegrees)) {
    const int deg = std::stoi(m[1].str());
    return m[2].str() == "left" ? -deg : deg;
  }
  throw ValidationError("cannot interpret turn '" + phrase + "'");
}

std::string substitute(const std::string& text, const std::map<std::string, std::string>& values,
                       const std::string& template_id) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos);
      break;
    }
    const auto close = text.find('}', open);
    if (close == std::string::npos) {
      throw ValidationError("template '" + template_id + "' has an unterminated placeholder");
    }
    out.append(text, pos, open - pos);
    const std::string key = text.substr(open + 1, close - open - 1);
    const auto it = values.find(key);
    if (it == values.end()) {
      throw ValidationError("template '" + template_id + "' references undefined parameter '" +
                            key + "'");
    }
    out += it->second;
    pos = close + 1;
  }
  // Sentence-initial capitalization after substitution.
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::vector<std::string> placeholders(const std::string& text) {
  std::vector<std::string> keys;
  static const std::regex kPlaceholder(R"(\{([^{}]*)\})");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kPlaceholder);
       it != std::sregex_iterator(); ++it) {
    keys.push_back((*it)[1].str());
  }
  return keys;
}

std::map<std::string, std::vector<std::string>> string_lists(const json& obj, const char* key) {
  std::map<std::string, std::vector<std::string>> out;
  if (auto it = obj.find(key); it != obj.end()) {
    for (const auto& [name, values] : it->items()) {
      out[name] = values.get<std::vector<std::string>>();
    }
  }
  return out;
}

}  // namespace

Direction apply_rule(const AnswerRule& rule, const std::map<std::string, std::string>& values) {
  if (rule.name == "same_as") {
    return direction_value(rule_value(rule, values, "direction"), "direction");
  }
  if (rule.name == "opposite_of") {
    return opposite(direction_value(rule_value(rule, values, "direction"), "direction"));
  }
  if (rule.name == "rotate") {
    const Direction heading = direction_value(rule_value(rule, values, "heading"), "heading");
    int total = bearing(heading) + turn_degrees(rule_value(rule, values, "turn"));
    if (rule.args.contains("then")) total += turn_degrees(rule_value(rule, values, "then"));
    return from_bearing(total);
  }
  if (rule.name == "sun_position") {
    const std::string event = ascii_lower(rule_value(rule, values, "event"));
    if (event == "rise" || event == "sunrise" || event == "come up") return Direction::east;
    if (event == "set" || event == "sunset" || event == "go down") return Direction::west;
    if (event == "noon" || event == "at noon" || event == "at midday") return Direction::south;
    throw ValidationError("sun_position cannot place event '" + event + "'");
  }
  throw ValidationError("unknown answer rule '" + rule.name + "'");
}

TemplateSpec parse_template_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("invalid template spec JSON: ") + e.what());
  }
  try {
    TemplateSpec spec;
    spec.name = doc.at("name").get<std::string>();
    spec.system_prompt = doc.at("system_prompt").get<std::string>();
    spec.vocabulary = parse_direction_list(doc.at("vocabulary"), 1, "vocabulary");
    for (const auto& t : doc.at("templates")) {
      QuestionTemplate qt;
      qt.id_prefix = t.at("id_prefix").get<std::string>();
      qt.text = t.at("text").get<std::string>();
      qt.category = t.value("category", qt.id_prefix);
      qt.rule.name = t.at("rule").at("name").get<std::string>();
      qt.rule.args = t.at("rule").at("args").get<std::map<std::string, std::string>>();
      qt.params = string_lists(t, "params");
      qt.fillers = string_lists(t, "fillers");
      spec.templates.push_back(std::move(qt));
    }
    return spec;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid template spec: ") + e.what());
  }
}

std::size_t expected_question_count(const TemplateSpec& spec) {
  std::size_t total = 0;
  for (const auto& t : spec.templates) {
    std::size_t product = 1;
    for (const auto& [name, values] : t.params) product *= values.size();
    total += product;
  }
  return total;
}

Benchmark generate_benchmark(const TemplateSpec& spec, std::uint64_t seed) {
  Benchmark bench;
  bench.name = spec.name;
  bench.system_prompt = spec.system_prompt;
  bench.vocabulary = spec.vocabulary;

  for (std::size_t t_index = 0; t_index < spec.templates.size(); ++t_index) {
    const auto& tmpl = spec.templates[t_index];
    for (const auto& key : placeholders(tmpl.text)) {
      if (!tmpl.params.contains(key) && !tmpl.fillers.contains(key)) {
        throw ValidationError("template '" + tmpl.id_prefix +
                              "' references undefined parameter '" + key + "'");
      }
    }
    for (const auto& [role, param] : tmpl.rule.args) {
      if (!tmpl.params.contains(param)) {
        throw ValidationError("template '" + tmpl.id_prefix + "' rule argument '" + role +
                              "' references undefined parameter '" + param + "'");
      }
    }
    for (const auto& [name, values] : tmpl.fillers) {
      if (values.empty()) {
        throw ValidationError("template '" + tmpl.id_prefix + "' filler '" + name + "' is empty");
      }
    }

    std::vector<std::pair<std::string, const std::vector<std::string>*>> grid;
    for (const auto& [name, values] : tmpl.params) grid.emplace_back(name, &values);
    std::size_t total = 1;
    for (const auto& g : grid) total *= g.second->size();
    for (std::size_t index = 0; index < total; ++index) {
      // Mixed-radix decode, last parameter fastest.
      std::map<std::string, std::string> values;
      std::size_t rest = index;
      for (std::size_t g = grid.size(); g-- > 0;) {
        const auto& options = *grid[g].second;
        values[grid[g].first] = options[rest % options.size()];
        rest /= options.size();
      }
      const std::size_t count = index + 1;
      const auto key = KeyedStream(seed).add(t_index).add(count);
      std::uint64_t draw = 0;
      for (const auto& [name, options] : tmpl.fillers) {
        values[name] = options[key.below(options.size(), draw++)];
      }

      Question q;
      char suffix[24];
      std::snprintf(suffix, sizeof suffix, "-%04zu", count);
      q.id = tmpl.id_prefix + suffix;
      q.prompt = substitute(tmpl.text, values, tmpl.id_prefix);
      q.category = tmpl.category;
      const Direction answer = apply_rule(tmpl.rule, values);
      if (!spec.vocabulary.contains(answer)) {
        throw ValidationError("template '" + tmpl.id_prefix + "' derived answer '" +
                              std::string(to_string(answer)) +
                              "', which is outside the answer vocabulary");
      }
      q.expected = {answer};
      bench.questions.push_back(std::move(q));
    }
  }
  validate(bench);
  return bench;
}

// ---------------------------------------------------------------------------
// Built-in suites

namespace {

const std::vector<std::string> kCardinalWords = {"north", "east", "south", "west"};
const std::vector<std::string> kAllWords = {"north",      "north-east", "east",
                                            "south-east", "south",      "south-west",
                                            "west",       "north-west"};

}  // namespace

TemplateSpec small_direction_spec() {
  TemplateSpec spec;
  spec.name = "small-directions";
  spec.system_prompt =
      "You are a helpful assistant. I will give you a question about directions. The answer is "
      "either north, south, east, or west. Please only reply with the answer. No yapping.";
  spec.vocabulary = {Direction::north, Direction::east, Direction::south, Direction::west};
  spec.templates = {
      {"sun", "You are {place} watching the sun {event}. Which direction are you facing?", "sun",
       {"sun_position", {{"event", "event"}}},
       {{"event", {"rise", "set", "at noon"}},
        {"place", {"on a beach", "in a field", "on a hilltop", "on your balcony"}}},
       {}},
      {"shore",
       "You are walking {heading} along the {shore} shore of a {water}; in which direction is the "
       "{water}?",
       "shore", {"opposite_of", {{"direction", "shore"}}},
       {{"heading", kCardinalWords}, {"shore", kCardinalWords}},
       {{"water", {"lake", "pond", "reservoir"}}}},
      {"turn", "{setting}, you are facing {heading}. You turn {turn}. Which direction are you facing now?",
       "turn", {"rotate", {{"heading", "heading"}, {"turn", "turn"}}},
       {{"heading", kCardinalWords}, {"turn", {"left", "right", "around"}}},
       {{"setting", {"in a car park", "on a quiet street", "in an empty hall"}}}},
      {"turn2",
       "You are facing {heading}. You turn {turn}, and then you turn {then}. Which direction are "
       "you facing now?",
       "turn", {"rotate", {{"heading", "heading"}, {"turn", "turn"}, {"then", "then"}}},
       {{"heading", kCardinalWords},
        {"turn", {"left", "right", "around"}},
        {"then", {"left", "right", "around"}}},
       {}},
      {"behind",
       "You are facing {heading} with {object} directly behind you. In which direction is {object} "
       "from you?",
       "behind", {"opposite_of", {{"direction", "heading"}}},
       {{"heading", kCardinalWords},
        {"object", {"the door", "a tall tree", "the mountain", "the river"}}},
       {}},
      {"straight",
       "You leave the {place} heading {heading} and never change direction. Which direction are you "
       "travelling?",
       "straight", {"same_as", {{"direction", "heading"}}},
       {{"heading", kCardinalWords}, {"place", {"station", "library"}}},
       {}},
  };
  return spec;
}

TemplateSpec large_direction_spec() {
  TemplateSpec spec;
  spec.name = "large-directions";
  spec.system_prompt =
      "You are a helpful assistant. I will give you a question about directions. The answer is "
      "either north, south, east, west. north-east, north-west, south-east or south-west. Please "
      "only reply with the answer. No yapping.";
  spec.vocabulary = {all_directions().begin(), all_directions().end()};
  const std::vector<std::string> turns = {
      "left", "right", "around", "45 degrees to the left", "45 degrees to the right",
      "135 degrees to the left", "135 degrees to the right"};
  spec.templates = {
      {"shore",
       "You are walking {heading} along the {shore} shore of a {water}; in which direction is the "
       "{water}?",
       "shore", {"opposite_of", {{"direction", "shore"}}},
       {{"heading", kAllWords}, {"shore", kAllWords}},
       {{"water", {"lake", "pond", "reservoir", "loch"}}}},
      {"turn",
       "{setting}, you are facing {heading}. You turn {turn}. Which direction are you facing now?",
       "turn", {"rotate", {{"heading", "heading"}, {"turn", "turn"}}},
       {{"heading", kAllWords}, {"turn", turns}},
       {{"setting", {"In a car park", "On a quiet street", "In an empty hall", "On a ship deck"}}}},
      {"turn2",
       "You are facing {heading}. You turn {turn}, and then you turn {then}. Which direction are "
       "you facing now?",
       "turn", {"rotate", {{"heading", "heading"}, {"turn", "turn"}, {"then", "then"}}},
       {{"heading", kAllWords}, {"turn", turns}, {"then", turns}},
       {}},
      {"behind",
       "You are facing {heading} with {object} directly behind you. In which direction is {object} "
       "from you?",
       "behind", {"opposite_of", {{"direction", "heading"}}},
       {{"heading", kAllWords},
        {"object", {"the door", "a tall tree", "the mountain", "the river", "the tower",
                    "the harbour"}}},
       {}},
  };
  return spec;
}

}  // namespace pibench
