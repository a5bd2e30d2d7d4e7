#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ickem/common.hpp"
#include "ickem/textshare.hpp"

namespace ickem::tree {

/// One authoritative definition of `subject` and the KPs it references.
struct Definition {
  KpId subject;
  std::string text;
  std::set<KpId> referenced;  // never contains subject
};

/// Definition whose references come from the dictionary's alias matcher.
Definition extract_definition(KpId subject, std::string text, const textshare::KpDictionary& dict);

struct CycleBreak {
  KpId from;
  KpId to;  // an ancestor of `from`; the edge was not added
  bool operator==(const CycleBreak&) const = default;
};

/// Deduplicated prerequisite closure of a root KP.
///
/// Every KP appears once in `nodes` however many parents reference it.
/// Leaves are BKPs except where expansion stopped at a recorded cycle break
/// or at a KP that has no definition (`undefined_leaves`).
struct UnderstandingTree {
  KpId root;
  std::map<KpId, std::vector<KpId>> children;  // sorted by id
  std::set<KpId> nodes;
  std::set<KpId> bkp_nodes;
  std::set<KpId> undefined_leaves;
  std::vector<CycleBreak> cycle_breaks;

  const std::vector<KpId>& children_of(const KpId& kp) const;
  /// Unique non-root nodes.
  std::vector<KpId> descendants() const;
  std::vector<KpId> leaves() const;
  /// Longest root-to-leaf path, in edges.
  std::size_t height() const;
};

inline constexpr double kDefaultMajority = 0.5;

/// Builds `root`'s tree. A KP becomes a child of x when strictly more than
/// `majority` of x's definitions reference it; selected non-BKP children are
/// expanded the same way.
UnderstandingTree build_tree(const KpId& root, std::span<const Definition> corpus, const std::set<KpId>& bkps,
                             double majority = kDefaultMajority);

inline constexpr double kDefaultThreshold = 100.0;

/// F / f_T, capped at 1.
double percent_familiarity(double familiarity, double threshold);

enum class Classification { Understood, NotUnderstood };

std::string_view to_string(Classification c);

struct UnderstandingReport {
  double root_pf = 0.0;
  double mean_descendant_pf = 0.0;
  double pu = 0.0;
  Classification classification = Classification::NotUnderstood;
  std::optional<double> magnitude;  // only when Understood
  bool degenerate = false;          // the tree has no descendants; PU = PF(root)

  /// PU as a whole percentage.
  int percent() const;
};

/// PU = PF(root) * mean PF of the unique descendants. Understood iff PU == 1.
/// Missing scores count as 0.
UnderstandingReport percent_understanding(const UnderstandingTree& tree, const std::map<KpId, double>& scores,
                                          double threshold = kDefaultThreshold, bool exclude_bkps = true);

/// Mean Familiarity Measure over the tree's nodes divided by the threshold,
/// optionally leaving BKP nodes out. Only defined for Understood trees.
double magnitude(const UnderstandingTree& tree, const std::map<KpId, double>& scores, double threshold,
                 bool exclude_bkps);

}  // namespace ickem::tree
