#pragma once

// Question suites, answer normalization, grading, and a templated
// generator for direction-reasoning benchmarks.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pibench/error.hpp"

namespace pibench {

/// The eight compass answers, in canonical lowercase hyphenated form.
enum class Direction : std::uint8_t {
  north,
  north_east,
  east,
  south_east,
  south,
  south_west,
  west,
  north_west,
};

std::string_view to_string(Direction d);

/// Exact canonical spelling only ("north-east"), no normalization.
std::optional<Direction> parse_canonical(std::string_view text);

/// Compass bearing in degrees, clockwise from north.
int bearing(Direction d);
Direction from_bearing(int degrees);
Direction opposite(Direction d);

const std::vector<Direction>& cardinal_directions();
const std::vector<Direction>& all_directions();

struct Question {
  std::string id;
  std::string prompt;
  std::set<Direction> expected;
  std::optional<std::string> category;

  friend bool operator==(const Question&, const Question&) = default;
};

struct Benchmark {
  std::string name;
  std::string system_prompt;
  std::set<Direction> vocabulary;
  std::vector<Question> questions;

  std::size_t size() const noexcept { return questions.size(); }
  std::vector<std::string> question_ids() const;

  friend bool operator==(const Benchmark&, const Benchmark&) = default;
};

/// Checks id uniqueness, q >= 1, nonempty expectations, expected ⊆ vocabulary.
/// Throws ValidationError naming the offending question.
void validate(const Benchmark& benchmark);

/// Lowercase, trim, strip trailing punctuation, collapse whitespace, and fold
/// spellings such as "NorthEast" / "north east" into the canonical token.
/// Returns nullopt ("unparseable") when the result is not a direction.
std::optional<Direction> normalize_answer(std::string_view text);

enum class GradingMode { strict, lenient };

std::string_view to_string(GradingMode mode);
GradingMode parse_grading_mode(std::string_view text);

/// Every distinct direction mentioned anywhere in `text`, in order of first
/// appearance. "north east" counts once, as north-east.
std::vector<Direction> find_directions(std::string_view text);

/// 1 if the response is correct for the question, else 0. Strict mode needs
/// the whole response to normalize to an expected answer; lenient mode needs
/// exactly one distinct direction in the response, and that one expected.
int grade(std::string_view response, const Question& question,
          GradingMode mode = GradingMode::strict);

/// Reads the line-oriented JSON benchmark format: a header object
/// {"name", "system_prompt", "vocabulary"} followed by one question object
/// per line {"id", "prompt", "expected", "category"?}.
Benchmark load_benchmark(std::istream& in);
Benchmark load_benchmark(const std::filesystem::path& path);

void write_benchmark(std::ostream& out, const Benchmark& benchmark);
void save_benchmark(const std::filesystem::path& path, const Benchmark& benchmark);

/// Deterministic 64-bit digest of a benchmark's content (used in plan hashes).
std::uint64_t content_hash(const Benchmark& benchmark);

// ---------------------------------------------------------------------------
// Templated generation

/// How the expected answer of a templated question is derived from its
/// parameter values.
///   same_as       args: {direction}           answer = direction
///   opposite_of   args: {direction}           answer = opposite(direction)
///   rotate        args: {heading, turn}       answer = heading turned by turn
///   sun_position  args: {event}               sunrise/sunset/noon as seen from
///                                             the northern hemisphere
struct AnswerRule {
  std::string name;
  std::map<std::string, std::string> args;  ///< role -> template parameter name
};

struct QuestionTemplate {
  std::string id_prefix;
  std::string text;  ///< "{param}" placeholders
  std::string category;
  AnswerRule rule;
  /// Grid parameters; the template expands to the cartesian product, in
  /// lexicographic order of parameter names.
  std::map<std::string, std::vector<std::string>> params;
  /// Filler lexicons; one alternative is drawn per question from the seed.
  std::map<std::string, std::vector<std::string>> fillers;
};

struct TemplateSpec {
  std::string name;
  std::string system_prompt;
  std::set<Direction> vocabulary;
  std::vector<QuestionTemplate> templates;
};

TemplateSpec parse_template_spec(std::string_view json_text);

/// Expected number of questions: Σ over templates of the product of grid sizes.
std::size_t expected_question_count(const TemplateSpec& spec);

/// Expands every template over its parameter grid. Same spec and seed give
/// identical output.
Benchmark generate_benchmark(const TemplateSpec& spec, std::uint64_t seed);

/// Direction for one rule applied to concrete parameter values.
/// Throws ValidationError when the rule cannot derive an answer.
Direction apply_rule(const AnswerRule& rule, const std::map<std::string, std::string>& values);

/// Small cardinal-answer suite (100 questions) with the four-answer system prompt.
TemplateSpec small_direction_spec();
/// Larger cardinal + intercardinal suite with the eight-answer system prompt.
TemplateSpec large_direction_spec();

}  // namespace pibench
