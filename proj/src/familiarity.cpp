#include "ickem/familiarity.hpp"

#include <cmath>

#include <fmt/format.h>

namespace ickem::familiarity {

void RetentionParams::validate() const {
  if (!(k > 0.0)) throw ValidationError("retention k must be positive");
  if (!(c > 0.0)) throw ValidationError("retention c must be positive");
}

double retention(double minutes_since_learning, const RetentionParams& params) {
  params.validate();
  if (!(minutes_since_learning >= 0.0)) throw ValidationError("elapsed minutes must be non-negative");
  const double t = minutes_since_learning + 1.0;
  return params.k / (std::pow(std::log10(t), params.c) + params.k);
}

FamiliarityScore familiarity(const history::LearningHistory& history, TimePoint at, const RetentionParams& params,
                             FactorMode mode) {
  params.validate();
  FamiliarityScore score{history.kp, 0.0, at};
  for (const history::LearningExperience& e : history.experiences) {
    if (e.lct > at) {
      throw ValidationError(fmt::format("experience of '{}' ends at {}, after evaluation time {}", history.kp,
                                        format_iso8601(e.lct), format_iso8601(at)));
    }
    double term = to_minutes(e.duration) * e.proportion * retention(to_minutes(at - e.lct), params);
    if (mode == FactorMode::Apply) term *= e.pps_factor * e.lm_factor;
    score.value += term;
  }
  return score;
}

double familiarity_ceiling(const history::LearningHistory& history) {
  double total = 0.0;
  for (const auto& e : history.experiences) total += to_minutes(e.duration) * e.proportion;
  return total;
}

void validate(const SiblingCompensation& comp) {
  for (const auto& [kp, siblings] : comp) {
    for (const Sibling& s : siblings) {
      if (s.id == kp) throw ValidationError(fmt::format("KP '{}' lists itself as a sibling", kp));
      if (!(s.coefficient > 0.0)) {
        throw ValidationError(fmt::format("sibling coefficient for '{}' -> '{}' must be positive", kp, s.id));
      }
    }
  }
}

std::map<KpId, double> compensate(const std::map<KpId, double>& scores, const SiblingCompensation& comp) {
  validate(comp);
  const auto old_score = [&](const KpId& id) {
    auto it = scores.find(id);
    return it == scores.end() ? 0.0 : it->second;
  };
  std::map<KpId, double> out = scores;
  for (const auto& [kp, siblings] : comp) {
    double bonus = 0.0;
    for (const Sibling& s : siblings) bonus += old_score(s.id) / s.coefficient;
    out[kp] = old_score(kp) + bonus;
  }
  return out;
}

}  // namespace ickem::familiarity
