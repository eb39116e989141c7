#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "pibench/stats.hpp"

using namespace pibench;

namespace {

const Probability k95{0.95};

RepeatMeans means(std::vector<double> v) { return RepeatMeans(std::move(v)); }

ScoreMatrix random_matrix(std::mt19937_64& rng, std::size_t q, std::size_t n, double p) {
  std::bernoulli_distribution bit(p);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < q; ++i) ids.push_back("q" + std::to_string(i));
  std::vector<std::vector<std::uint8_t>> cols(n, std::vector<std::uint8_t>(q));
  for (auto& c : cols) {
    for (auto& v : c) v = bit(rng) ? 1 : 0;
  }
  return ScoreMatrix(ids, cols);
}

}  // namespace

TEST_CASE("score matrix invariants") {
  CHECK_THROWS_AS(ScoreMatrix({}, {{}}), ValidationError);
  CHECK_THROWS_AS(ScoreMatrix({"a"}, {}), ValidationError);
  CHECK_THROWS_AS(ScoreMatrix({"a", "b"}, {{1}}), ValidationError);
  CHECK_THROWS_AS(ScoreMatrix({"a"}, {{2}}), ValidationError);

  const ScoreMatrix m({"a", "b"}, {{1, 1}, {0, 1}});
  CHECK(m.question_count() == 2);
  CHECK(m.repeat_count() == 2);
  CHECK(m.at(0, 1) == 0);
  CHECK(m.at(1, 1) == 1);
  CHECK(m.prefix(1).repeat_count() == 1);
  CHECK_THROWS(m.at(2, 0));
}

TEST_CASE("per-repeat and grand means") {
  // rows [[1,0],[1,1]]: question 0 scores 1 then 0, question 1 scores 1 then 1
  const ScoreMatrix m({"a", "b"}, {{1, 1}, {0, 1}});
  CHECK(per_repeat_means(m).values() == std::vector<double>{1.0, 0.5});
  CHECK(per_repeat_means(ScoreMatrix({"a", "b", "c"}, {{1, 1, 1}, {1, 1, 1}})).values() ==
        std::vector<double>{1.0, 1.0});
  CHECK(per_repeat_means(ScoreMatrix({"a", "b", "c", "d"}, {{1, 0, 0, 1}}))[0] == 0.5);

  CHECK(grand_mean(means({1.0, 0.5})) == 0.75);
  CHECK(grand_mean(means({0.833})) == 0.833);
  CHECK_THROWS_AS(grand_mean(RepeatMeans{}), ValidationError);
  CHECK_THROWS_AS(means({1.2}), ValidationError);

  SUBCASE("equals the flat mean of all entries") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 200; ++k) {
      const auto m2 = random_matrix(rng, 1 + rng() % 50, 1 + rng() % 30, 0.7);
      double flat = 0.0;
      for (std::size_t j = 0; j < m2.repeat_count(); ++j) {
        for (auto v : m2.column(j)) flat += v;
      }
      flat /= static_cast<double>(m2.repeat_count() * m2.question_count());
      CHECK(std::abs(grand_mean(per_repeat_means(m2)) - flat) < 1e-12);
    }
  }
}

TEST_CASE("sample standard deviation") {
  CHECK(sample_std(means({0.8, 0.8, 0.8})) == 0.0);
  CHECK(std::abs(sample_std(means({0.8, 0.9})) - 0.07071068) < 1e-8);
  CHECK(std::abs(sample_std(means({0.5, 0.6, 0.7})) - 0.1) < 1e-15);
  CHECK_THROWS_AS(sample_std(means({0.5})), ValidationError);
}

TEST_CASE("prediction interval") {
  SUBCASE("two-point example (50-digit reference)") {
    const auto pi = prediction_interval(means({0.8, 0.9}), k95, 2);
    CHECK(std::abs(pi.lower - -0.0484643532093750353) < 1e-13);
    CHECK(std::abs(pi.upper - 1.7484643532093751019) < 1e-13);
    CHECK(pi.upper > 1.0);  // not clamped
    // scipy reference values
    CHECK(std::abs(pi.lower - -0.04846435322757603) < 1e-9);
    CHECK(std::abs(pi.upper - 1.7484643532275763) < 1e-9);
    CHECK(pi.n == 2);
    CHECK(pi.n_future == 2u);
  }
  SUBCASE("three-point example") {
    const auto pi = prediction_interval(means({0.5, 0.6, 0.7}), k95);
    CHECK(std::abs(pi.lower - 0.248689) < 1e-6);
    CHECK(std::abs(pi.upper - 0.951311) < 1e-6);
    CHECK(std::abs(pi.lower - 0.24868987572402178029) < 1e-13);
    CHECK(std::abs(pi.upper - 0.9513101242759781753) < 1e-13);
  }
  SUBCASE("constant sample has exactly zero width") {
    const auto pi = prediction_interval(means({0.7, 0.7, 0.7, 0.7}), k95, 4);
    CHECK(pi.lower == 0.7);
    CHECK(pi.upper == 0.7);
    CHECK(pi.width() == 0.0);
  }
  SUBCASE("n_future and confidence") {
    const auto one = prediction_interval(means({0.5, 0.6, 0.7}), k95, 1);
    CHECK(std::abs(one.lower - 0.10317245764993411211) < 1e-13);
    CHECK(std::abs(one.upper - 1.0968275423500658435) < 1e-13);
    const auto ninety = prediction_interval(means({0.5, 0.6, 0.7}), Probability{0.90});
    CHECK(std::abs(ninety.lower - 0.36158417572829226939) < 1e-13);
    CHECK(std::abs(ninety.upper - 0.8384158242717076862) < 1e-13);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(prediction_interval(means({0.5}), k95), ValidationError);
    CHECK_THROWS_AS(prediction_interval(means({0.5, 0.6}), k95, 0), ValidationError);
    CHECK_THROWS(prediction_interval(means({0.5, 0.6}), Probability{1.0}));
    CHECK_THROWS(prediction_interval(means({0.5, 0.6}), Probability{0.0}));
  }
  SUBCASE("matches the scipy oracle on 100 random samples") {
    std::ifstream in(PIBENCH_TEST_DATA "/scipy_pi_oracle.json");
    REQUIRE(in);
    const auto doc = nlohmann::json::parse(in);
    REQUIRE(doc.at("cases").size() == 100);
    for (const auto& c : doc.at("cases")) {
      const auto pi = prediction_interval(RepeatMeans(c.at("sample").get<std::vector<double>>()), k95);
      CHECK(std::abs(pi.lower - c.at("lower").get<double>()) < 1e-9);
      CHECK(std::abs(pi.upper - c.at("upper").get<double>()) < 1e-9);
    }
  }
}

TEST_CASE("interval properties") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 2 + rng() % 29;
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    const RepeatMeans m(v);
    const auto pi = prediction_interval(m, k95);
    const auto ci = confidence_interval(m, k95);
    const double mean = grand_mean(m);
    const double s = sample_std(m);
    const double t = student_t_quantile(Probability{0.975}, DegreesOfFreedom{n - 1.0});
    CHECK(std::abs((pi.lower + pi.upper) / 2 - mean) < 1e-12);
    CHECK(std::abs(pi.width() - 2 * t * s * std::sqrt(2.0 / n)) < 1e-12);
    CHECK(pi.width() > ci.width());
    CHECK(pi.lower <= pi.upper);
  }

  SUBCASE("width with n' = n decreases in n at fixed s") {
    double prev = INFINITY;
    for (std::size_t n = 2; n <= 60; ++n) {
      // alternating 0.4 / 0.6 with n even keeps s close to constant; use the formula directly
      const double t = student_t_quantile(Probability{0.975}, DegreesOfFreedom{n - 1.0});
      const double w = 2 * t * 0.1 * std::sqrt(2.0 / n);
      CHECK(w < prev);
      prev = w;
    }
  }
}

TEST_CASE("confidence interval") {
  const auto ci = confidence_interval(means({0.8, 0.9}), k95);
  CHECK(std::abs(ci.lower - 0.214698) < 1e-5);
  CHECK(std::abs(ci.upper - 1.485302) < 1e-5);
  CHECK(std::abs(ci.lower - 0.21468976319126550867) < 1e-13);
  CHECK(!ci.n_future.has_value());
  CHECK(confidence_interval(means({0.4, 0.4, 0.4}), k95).width() == 0.0);
}

TEST_CASE("two-sample t-test") {
  SUBCASE("identical samples") {
    const auto r = two_sample_t_test(means({0.8, 0.9, 0.7}), means({0.8, 0.9, 0.7}));
    CHECK(r.t_statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(!r.significant());
  }
  SUBCASE("synthetic example, both variants") {
    const auto a = means({0.8, 0.8, 0.9});
    const auto b = means({0.6, 0.7, 0.6});
    for (auto variant : {TTestVariant::welch, TTestVariant::pooled}) {
      const auto r = two_sample_t_test(a, b, variant);
      CHECK(std::abs(r.t_statistic - 4.242640687119287) < 1e-9);
      CHECK(std::abs(r.df - 4.0) < 1e-9);
      CHECK(std::abs(r.p_value - 0.01323559956368267) < 1e-10);
      CHECK(r.significant());
      CHECK(r.variant == variant);
    }
    const auto swapped = two_sample_t_test(b, a);
    CHECK(swapped.t_statistic == -two_sample_t_test(a, b).t_statistic);
    CHECK(swapped.p_value == two_sample_t_test(a, b).p_value);
  }
  SUBCASE("unequal variances: Welch and pooled diverge (scipy oracle)") {
    const auto a = means({0.55, 0.59, 0.57, 0.60});
    const auto b = means({0.50, 0.52, 0.58});
    const auto w = two_sample_t_test(a, b, TTestVariant::welch);
    CHECK(std::abs(w.t_statistic - 1.6685156575544824) < 1e-10);
    CHECK(std::abs(w.df - 2.855326667695025) < 1e-10);
    CHECK(std::abs(w.p_value - 0.1983921885669287) < 1e-10);
    const auto p = two_sample_t_test(a, b, TTestVariant::pooled);
    CHECK(std::abs(p.t_statistic - 1.839435251070622) < 1e-10);
    CHECK(p.df == 5.0);
    CHECK(std::abs(p.p_value - 0.1252385273075052) < 1e-10);
  }
  SUBCASE("shift invariance") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.2, 0.7);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> a(5), b(7);
      for (auto& x : a) x = u(rng);
      for (auto& x : b) x = u(rng);
      const auto base = two_sample_t_test(RepeatMeans(a), RepeatMeans(b));
      for (auto& x : a) x += 0.25;
      for (auto& x : b) x += 0.25;
      const auto shifted = two_sample_t_test(RepeatMeans(a), RepeatMeans(b));
      CHECK(std::abs(base.t_statistic - shifted.t_statistic) < 1e-9);
      CHECK(std::abs(base.df - shifted.df) < 1e-9);
      CHECK(std::abs(base.p_value - shifted.p_value) < 1e-9);
    }
  }
  SUBCASE("degenerate samples") {
    CHECK_THROWS_AS(two_sample_t_test(means({0.5, 0.5}), means({0.5, 0.5, 0.5})),
                    DegenerateSamplesError);
    const auto r = two_sample_t_test(means({0.6, 0.6}), means({0.5, 0.5}));
    CHECK(std::isinf(r.t_statistic));
    CHECK(r.t_statistic > 0);
    CHECK(r.p_value == 0.0);
    CHECK_THROWS_AS(two_sample_t_test(means({0.6}), means({0.5, 0.4})), ValidationError);
  }
  SUBCASE("variant names") {
    CHECK(parse_t_test_variant("welch") == TTestVariant::welch);
    CHECK(parse_t_test_variant("pooled") == TTestVariant::pooled);
    CHECK_THROWS_AS(parse_t_test_variant("paired"), ValidationError);
  }
}

TEST_CASE("summaries") {
  const auto s = summarize(ScoreMatrix({"a", "b"}, {{1, 1}, {0, 1}}));
  CHECK(s.mean == 0.75);
  CHECK(s.min_score == 0.5);
  CHECK(s.max_score == 1.0);
  CHECK(s.repeats == 2);
  CHECK(s.std_dev.has_value());

  const auto one = summarize(means({0.83}));
  CHECK(one.mean == 0.83);
  CHECK(!one.std_dev.has_value());

  const auto three = summarize(means({0.55, 0.59, 0.57}));
  CHECK(std::abs(three.mean - 0.57) < 1e-15);
  CHECK(three.min_score == 0.55);
  CHECK(three.max_score == 0.59);
  CHECK(three.min_score <= three.mean);
  CHECK(three.mean <= three.max_score);
  CHECK(summarize(means({0.4, 0.4})).std_dev == 0.0);
}

TEST_CASE("prefix intervals") {
  const auto pts = prefix_intervals(means({0.5, 0.6, 0.7, 0.65}), k95);
  REQUIRE(pts.size() == 3);
  CHECK(pts.front().n == 2);
  CHECK(pts.back().n == 4);
  const auto full = prediction_interval(means({0.5, 0.6, 0.7, 0.65}), k95);
  CHECK(pts.back().lower == full.lower);
  CHECK(pts.back().upper == full.upper);
  CHECK(pts.back().width == full.width());
  CHECK(pts[1].lower == prediction_interval(means({0.5, 0.6, 0.7}), k95).lower);
}
