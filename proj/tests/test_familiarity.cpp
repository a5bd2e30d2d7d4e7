#include <catch2/catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <random>

#include "ickem/familiarity.hpp"
#include "support.hpp"

using namespace ickem;
using familiarity::compensate;
using familiarity::FactorMode;
using familiarity::familiarity_ceiling;
using familiarity::retention;
using familiarity::SiblingCompensation;
using ickem::testing::epoch;
using ickem::testing::experience;
using Catch::Approx;

namespace {

using big = boost::multiprecision::cpp_bin_float_50;

double retention_big(double minutes) {
  const big t = big(minutes) + 1;
  const big k("1.84"), c("1.25");
  const big lg = log10(t);
  return static_cast<double>(k / (pow(lg, c) + k));
}

constexpr Seconds kHour{3600};
constexpr Seconds kDay{86400};

}  // namespace

TEST_CASE("retention anchors") {
  CHECK(retention(0.0) == 1.0);
  CHECK(retention(1440.0) == Approx(retention_big(1440.0)).epsilon(1e-12));
  CHECK(std::abs(retention(1440.0) - 0.304) < 1e-3);
  CHECK(retention(1440.0) > retention(30.0 * 1440.0));
  CHECK(retention(30.0 * 1440.0) > retention(365.0 * 1440.0));
  CHECK_THROWS_AS(retention(-1.0), ValidationError);
  CHECK_THROWS_AS(retention(1.0, {0.0, 1.25}), ValidationError);
}

TEST_CASE("retention matches a 50-digit evaluation across a grid") {
  for (double m = 0.0; m < 1e7; m = m * 1.7 + 1.0) {
    REQUIRE(retention(m) == Approx(retention_big(m)).epsilon(1e-12));
  }
}

TEST_CASE("retention is strictly decreasing over ten years") {
  double prev = retention(0.0);
  for (double m = 1.0; m <= 10.0 * 365.25 * 1440.0; m += 97.0) {
    const double b = retention(m);
    REQUIRE(b < prev);
    REQUIRE(b > 0.0);
    prev = b;
  }
}

TEST_CASE("familiarity of a single experience") {
  history::LearningHistory h{"A", {experience(epoch(), 60, 0.5, 0.7, 0.8)}};
  CHECK(familiarity::familiarity(h, epoch(), {}, FactorMode::Ignore).value == Approx(30.0).epsilon(1e-15));
  CHECK(familiarity::familiarity(h, epoch(), {}, FactorMode::Apply).value == Approx(30.0 * 0.56).epsilon(1e-15));

  history::LearningHistory unit{"A", {experience(epoch(), 60, 0.5)}};
  CHECK(familiarity::familiarity(unit, epoch() + kDay, {}, FactorMode::Apply).value ==
        familiarity::familiarity(unit, epoch() + kDay, {}, FactorMode::Ignore).value);
  CHECK(familiarity::familiarity(history::LearningHistory{"A", {}}, epoch()).value == 0.0);
  CHECK_THROWS_AS(familiarity::familiarity(h, epoch() - kHour), ValidationError);
  CHECK(familiarity_ceiling(h) == Approx(30.0));
}

TEST_CASE("familiarity agrees with a long double re-evaluation") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> n(1, 30);
  for (int round = 0; round < 1000; ++round) {
    const auto h = ickem::testing::random_history(rng, "A", n(rng), epoch());
    const TimePoint at = epoch() + Seconds{static_cast<std::int64_t>(rng() % 100000000)};
    for (bool factors : {false, true}) {
      const double got = familiarity::familiarity(h, at, {}, factors ? FactorMode::Apply : FactorMode::Ignore).value;
      const double want = static_cast<double>(ickem::testing::familiarity_oracle(h, at, factors));
      REQUIRE(ickem::testing::close_rel(got, want, 1e-12));
    }
  }
}

TEST_CASE("familiarity properties") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> n(1, 20);
  std::uniform_int_distribution<std::int64_t> offset(0, 400LL * 86400);
  for (int round = 0; round < 1000; ++round) {
    const auto first = ickem::testing::random_history(rng, "A", n(rng), epoch());
    const auto second = ickem::testing::random_history(rng, "A", n(rng), epoch() + kDay * 500);
    history::LearningHistory both{"A", first.experiences};
    both.experiences.insert(both.experiences.end(), second.experiences.begin(), second.experiences.end());
    const TimePoint at = epoch() + kDay * 500 + Seconds{offset(rng)};

    const double whole = familiarity::familiarity(both, at).value;
    const double parts = familiarity::familiarity(first, at).value + familiarity::familiarity(second, at).value;
    REQUIRE(ickem::testing::close_rel(whole, parts, 1e-9));

    REQUIRE(whole >= 0.0);
    REQUIRE(whole <= familiarity_ceiling(both) * (1 + 1e-12));

    history::LearningHistory shifted = both;
    const Seconds shift{offset(rng)};
    for (auto& e : shifted.experiences) e.lct += shift;
    REQUIRE(ickem::testing::close_rel(familiarity::familiarity(shifted, at + shift).value, whole, 1e-12));
  }
}

TEST_CASE("scores fall from one hour to ten years and the simplified form dominates") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> n(2, 12);
  const std::array<Seconds, 5> after{kHour, kDay, kDay * 30, kDay * 365, kDay * 3652};
  for (int round = 0; round < 1000; ++round) {
    const auto h = ickem::testing::random_history(rng, "A", n(rng), epoch());
    double prev_full = std::numeric_limits<double>::infinity();
    double prev_simple = prev_full;
    for (Seconds dt : after) {
      const double full = familiarity::familiarity(h, epoch() + dt, {}, FactorMode::Apply).value;
      const double simple = familiarity::familiarity(h, epoch() + dt, {}, FactorMode::Ignore).value;
      REQUIRE(simple < prev_simple);
      REQUIRE(simple >= full);
      if (full > 0.0) REQUIRE(full < prev_full);
      prev_full = full;
      prev_simple = simple;
    }
  }
}

TEST_CASE("sibling compensation") {
  const std::map<KpId, double> scores{{"A", 20.0}, {"B", 50.0}, {"C", 0.0}};
  CHECK(compensate(scores, {}) == scores);

  const SiblingCompensation one{{"A", {{"B", 5.0}}}};
  CHECK(compensate(scores, one).at("A") == Approx(30.0));

  const SiblingCompensation mutual{{"A", {{"B", 2.0}}}, {"B", {{"A", 2.0}}}};
  const auto m = compensate(scores, mutual);
  CHECK(m.at("A") == Approx(45.0));
  CHECK(m.at("B") == Approx(60.0));

  const SiblingCompensation missing{{"C", {{"Z", 3.0}}}};
  CHECK(compensate(scores, missing).at("C") == 0.0);

  CHECK_THROWS_AS(compensate(scores, {{"A", {{"A", 2.0}}}}), ValidationError);
  CHECK_THROWS_AS(compensate(scores, {{"A", {{"B", 0.0}}}}), ValidationError);
  CHECK_THROWS_AS(compensate(scores, {{"A", {{"B", -1.0}}}}), ValidationError);
}

TEST_CASE("compensation never decreases a score") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> f(0.0, 200.0), c(0.5, 10.0);
  for (int round = 0; round < 1000; ++round) {
    std::map<KpId, double> scores;
    for (int i = 0; i < 6; ++i) scores["K" + std::to_string(i)] = f(rng);
    SiblingCompensation comp;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        if (i != j && rng() % 3 == 0) comp["K" + std::to_string(i)].push_back({"K" + std::to_string(j), c(rng)});
      }
    }
    const auto out = compensate(scores, comp);
    for (const auto& [kp, v] : scores) REQUIRE(out.at(kp) >= v);
  }
}
