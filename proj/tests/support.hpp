#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string_view>

#include "ickem/common.hpp"
#include "ickem/history.hpp"

namespace ickem::testing {

inline TimePoint ts(std::string_view iso) { return parse_iso8601(iso); }

inline TimePoint epoch() { return ts("2026-01-01T00:00:00Z"); }

inline history::LearningExperience experience(TimePoint lct, std::int64_t minutes, double share, double pps = 1.0,
                                              double lm = 1.0) {
  history::LearningExperience e;
  e.lct = lct;
  e.duration = Seconds{minutes * 60};
  e.proportion = share;
  e.pps_factor = pps;
  e.lm_factor = lm;
  return e;
}

/// Random multi-session history with lct ordered, all ending at or before `last`.
inline history::LearningHistory random_history(std::mt19937_64& rng, const KpId& kp, std::size_t n, TimePoint last) {
  std::uniform_int_distribution<std::int64_t> gap(0, 60 * 24 * 40);
  std::uniform_int_distribution<std::int64_t> minutes(1, 180);
  std::uniform_real_distribution<double> share(0.01, 1.0);
  std::uniform_real_distribution<double> factor(0.0, 1.0);
  history::LearningHistory h{kp, {}};
  TimePoint t = last;
  for (std::size_t i = 0; i < n; ++i) {
    h.experiences.push_back(experience(t, minutes(rng), share(rng), factor(rng), factor(rng)));
    t -= Seconds{gap(rng) * 60};
  }
  std::reverse(h.experiences.begin(), h.experiences.end());
  return h;
}

/// Forgetting curve evaluated directly in long double, without the library.
inline long double retention_ld(long double minutes, long double k = 1.84L, long double c = 1.25L) {
  const long double lg = std::log10(minutes + 1.0L);
  return k / (std::pow(lg, c) + k);
}

/// Sum over the history evaluated from scratch in long double.
inline long double familiarity_oracle(const history::LearningHistory& h, TimePoint at, bool factors) {
  long double total = 0.0L;
  for (const auto& e : h.experiences) {
    const long double elapsed = static_cast<long double>((at - e.lct).count()) / 60.0L;
    long double term = static_cast<long double>(e.duration.count()) / 60.0L * e.proportion * retention_ld(elapsed);
    if (factors) term *= static_cast<long double>(e.pps_factor) * e.lm_factor;
    total += term;
  }
  return total;
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace ickem::testing
