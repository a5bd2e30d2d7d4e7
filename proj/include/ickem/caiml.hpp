#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ickem/common.hpp"
#include "ickem/familiarity.hpp"
#include "ickem/history.hpp"
#include "ickem/textshare.hpp"
#include "ickem/tree.hpp"

namespace ickem::caiml {

struct DocumentProfile {
  DocId id;
  textshare::ShareVector kp_shares;
  std::optional<KpId> defines;

  void validate() const;
  std::set<KpId> referenced() const;
};

/// Uniform shares over `refs`, for manifests that list KPs without text.
DocumentProfile profile_from_refs(DocId id, const std::vector<KpId>& refs, std::optional<KpId> defines = {});

/// Which KPs count as Understood, and the PU values behind that.
struct KnowledgeState {
  std::set<KpId> understood;
  std::map<KpId, double> pu;

  bool is_understood(const KpId& kp) const { return understood.contains(kp); }
  void mark_understood(const KpId& kp);

  /// Understood exactly where pu == 1.
  static KnowledgeState from_pu(std::map<KpId, double> pu);
  /// Only the given KPs (typically the BKPs) are understood.
  static KnowledgeState with_understood(const std::set<KpId>& kps);
};

/// Understanding Trees of every non-BKP KP plus the BKP set.
struct TreeIndex {
  std::map<KpId, tree::UnderstandingTree> trees;
  std::set<KpId> bkps;

  /// Every KP appearing in a tree or in the BKP set.
  std::set<KpId> all_kps() const;
};

/// Treats each document that defines a KP as a definition of it (references
/// = its KPs minus the defined one), adds `extra` definitions, and builds a
/// tree for every defined KP. When `bkps` is absent, every KP without a
/// definition is a BKP.
TreeIndex build_index(std::span<const DocumentProfile> docs, std::span<const tree::Definition> extra = {},
                      std::optional<std::set<KpId>> bkps = std::nullopt,
                      double majority = tree::kDefaultMajority);

/// Unique Not-Understood KPs among the document's KPs and their trees.
std::set<KpId> not_understood_kps(const DocumentProfile& doc, const KnowledgeState& state, const TreeIndex& index);

std::size_t not_understood_count(const DocumentProfile& doc, const KnowledgeState& state, const TreeIndex& index);

/// Documents tied at the fewest Not-Understood KPs, in ascending id order.
std::vector<DocId> recommend(std::span<const DocumentProfile> docs, const KnowledgeState& state,
                             const TreeIndex& index);

/// Share-weighted mean PU of the document's KPs, as a fraction in [0, 1].
double doc_understanding(const DocumentProfile& doc, const std::map<KpId, double>& pu);

/// The alternative recommender: documents whose understanding is closest to
/// (but below) 100%. If every document is at 100%, all of them tie.
std::vector<DocId> recommend_by_understanding(std::span<const DocumentProfile> docs,
                                              const std::map<KpId, double>& pu);

/// Estimated state from Familiarity Measures: PU through each tree for
/// non-BKPs, PF for BKPs.
KnowledgeState estimate_state(const TreeIndex& index, const std::map<KpId, double>& scores,
                              double threshold = tree::kDefaultThreshold);

/// Rows: counts before learning, then after each step. Columns follow the
/// document order passed to the planner.
struct LearningPlan {
  std::vector<DocId> columns;
  std::vector<DocId> sequence;
  std::vector<std::vector<std::size_t>> matrix;
  KnowledgeState final_state;
};

class PlanDeadlock : public ValidationError {
 public:
  PlanDeadlock(const DocId& doc, const std::set<KpId>& blocking);
  const std::set<KpId>& blocking() const { return blocking_; }

 private:
  std::set<KpId> blocking_;
};

/// Greedy CAIML sequence under idealized learning: the chosen document's
/// defined KP becomes Understood once nothing else in it is Not Understood.
/// With `forced_order`, that order is replayed instead of the greedy choice.
LearningPlan plan_sequence(std::span<const DocumentProfile> docs, const KnowledgeState& initial,
                           const TreeIndex& index, std::optional<std::span<const DocId>> forced_order = std::nullopt);

struct SequenceCheck {
  bool valid = true;
  std::optional<std::size_t> failed_step;
  std::string reason;
};

/// Whether `order` is a permutation of the documents in which every step
/// picks a document that was minimal at that point.
SequenceCheck check_sequence(std::span<const DocumentProfile> docs, const KnowledgeState& initial,
                             const TreeIndex& index, std::span<const DocId> order);

struct CoupledOptions {
  TimePoint start;
  Seconds session_length{3600};
  Seconds spacing{86400};
  double threshold = tree::kDefaultThreshold;
  familiarity::RetentionParams retention;
  std::map<KpId, history::LearningHistory> histories;  // prior learning
};

/// Planning that accrues familiarity instead of flipping KPs to Understood:
/// learning a document adds one experience per KP it contains, and the
/// state is re-estimated one `spacing` later.
LearningPlan plan_sequence_coupled(std::span<const DocumentProfile> docs, const TreeIndex& index,
                                   CoupledOptions opts);

}  // namespace ickem::caiml
