#pragma once

#include <map>
#include <vector>

#include "ickem/common.hpp"
#include "ickem/history.hpp"

namespace ickem::familiarity {

/// Constants of the Ebbinghaus savings curve b(t) = k / ((log10 t)^c + k).
struct RetentionParams {
  double k = 1.84;
  double c = 1.25;

  void validate() const;
};

/// Fraction of a learning experience retained `minutes_since_learning`
/// minutes after it ended. The clock starts one minute before the end of
/// learning, so t = minutes + 1 and retention(0) == 1.
double retention(double minutes_since_learning, const RetentionParams& params = {});

enum class FactorMode {
  Ignore,  // simplified score: d * share * b
  Apply,   // full score: d * share * b * pps * lm
};

/// Familiarity Measure in gl.
struct FamiliarityScore {
  KpId kp;
  double value = 0.0;
  TimePoint eval_time;
};

/// Sum over the history of duration (minutes) * share * retention, with the
/// state and method factors when `mode` is Apply. Throws on experiences that
/// end after `at`.
FamiliarityScore familiarity(const history::LearningHistory& history, TimePoint at,
                             const RetentionParams& params = {}, FactorMode mode = FactorMode::Apply);

/// Upper bound reached with no forgetting and unit factors: sum of d * share.
double familiarity_ceiling(const history::LearningHistory& history);

struct Sibling {
  KpId id;
  double coefficient = 1.0;  // sibling contributes 1/coefficient of its score
};

using SiblingCompensation = std::map<KpId, std::vector<Sibling>>;

void validate(const SiblingCompensation& comp);

/// F_new(k) = F_old(k) + sum over siblings j of F_old(j) / c_j.
/// All reads come from the input snapshot, so order of evaluation does not
/// matter and compensation never cascades. Missing scores count as 0.
std::map<KpId, double> compensate(const std::map<KpId, double>& scores, const SiblingCompensation& comp);

}  // namespace ickem::familiarity
