#include "ickem/caiml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace ickem::caiml {
namespace {

constexpr double kShareTolerance = 1e-9;

std::vector<std::size_t> count_row(std::span<const DocumentProfile> docs, const KnowledgeState& state,
                                   const TreeIndex& index) {
  std::vector<std::size_t> row;
  row.reserve(docs.size());
  for (const DocumentProfile& d : docs) row.push_back(not_understood_count(d, state, index));
  return row;
}

const DocumentProfile& find_doc(std::span<const DocumentProfile> docs, const DocId& id) {
  auto it = std::find_if(docs.begin(), docs.end(), [&](const DocumentProfile& d) { return d.id == id; });
  if (it == docs.end()) throw ValidationError(fmt::format("unknown document '{}'", id));
  return *it;
}

void check_unique_ids(std::span<const DocumentProfile> docs) {
  std::set<DocId> seen;
  for (const DocumentProfile& d : docs) {
    d.validate();
    if (!seen.insert(d.id).second) throw ValidationError(fmt::format("duplicate document id '{}'", d.id));
  }
}

/// Idealized learning of one document. Returns the KPs still blocking its
/// defined KP (empty when it became, or already was, Understood).
std::set<KpId> learn(const DocumentProfile& doc, KnowledgeState& state, const TreeIndex& index) {
  if (!doc.defines || state.is_understood(*doc.defines)) return {};
  std::set<KpId> blocking = not_understood_kps(doc, state, index);
  blocking.erase(*doc.defines);
  if (blocking.empty()) state.mark_understood(*doc.defines);
  return blocking;
}

std::vector<DocumentProfile> without(std::vector<DocumentProfile> docs, const DocId& id) {
  std::erase_if(docs, [&](const DocumentProfile& d) { return d.id == id; });
  return docs;
}

}  // namespace

void DocumentProfile::validate() const {
  if (id.empty()) throw ValidationError("document with empty id");
  if (kp_shares.empty()) throw ValidationError(fmt::format("document '{}' has no KPs", id));
  double total = 0.0;
  for (const auto& [kp, share] : kp_shares) {
    if (!(share >= 0.0)) throw ValidationError(fmt::format("document '{}': negative share for '{}'", id, kp));
    total += share;
  }
  if (std::abs(total - 1.0) > kShareTolerance) {
    throw ValidationError(fmt::format("document '{}': shares sum to {} (expected 1)", id, total));
  }
  if (defines && !kp_shares.contains(*defines)) {
    throw ValidationError(fmt::format("document '{}' defines '{}' but does not contain it", id, *defines));
  }
}

std::set<KpId> DocumentProfile::referenced() const {
  std::set<KpId> out;
  for (const auto& [kp, share] : kp_shares) out.insert(kp);
  return out;
}

DocumentProfile profile_from_refs(DocId id, const std::vector<KpId>& refs, std::optional<KpId> defines) {
  DocumentProfile d{std::move(id), {}, std::move(defines)};
  std::set<KpId> unique(refs.begin(), refs.end());
  if (d.defines) unique.insert(*d.defines);
  for (const KpId& kp : unique) d.kp_shares[kp] = 1.0 / static_cast<double>(unique.size());
  return d;
}

void KnowledgeState::mark_understood(const KpId& kp) {
  understood.insert(kp);
  pu[kp] = 1.0;
}

KnowledgeState KnowledgeState::from_pu(std::map<KpId, double> pu) {
  KnowledgeState s;
  for (const auto& [kp, v] : pu) {
    if (v == 1.0) s.understood.insert(kp);
  }
  s.pu = std::move(pu);
  return s;
}

KnowledgeState KnowledgeState::with_understood(const std::set<KpId>& kps) {
  KnowledgeState s;
  for (const KpId& kp : kps) s.mark_understood(kp);
  return s;
}

std::set<KpId> TreeIndex::all_kps() const {
  std::set<KpId> out = bkps;
  for (const auto& [kp, t] : trees) out.insert(t.nodes.begin(), t.nodes.end());
  return out;
}

TreeIndex build_index(std::span<const DocumentProfile> docs, std::span<const tree::Definition> extra,
                      std::optional<std::set<KpId>> bkps, double majority) {
  std::vector<tree::Definition> corpus;
  std::set<KpId> mentioned;
  for (const DocumentProfile& d : docs) {
    for (const auto& [kp, share] : d.kp_shares) mentioned.insert(kp);
    if (!d.defines) continue;
    tree::Definition def{*d.defines, {}, d.referenced()};
    def.referenced.erase(*d.defines);
    corpus.push_back(std::move(def));
  }
  for (const tree::Definition& def : extra) {
    mentioned.insert(def.subject);
    mentioned.insert(def.referenced.begin(), def.referenced.end());
    corpus.push_back(def);
  }

  std::set<KpId> defined;
  for (const tree::Definition& def : corpus) defined.insert(def.subject);

  TreeIndex index;
  if (bkps) {
    index.bkps = std::move(*bkps);
  } else {
    for (const KpId& kp : mentioned) {
      if (!defined.contains(kp)) index.bkps.insert(kp);
    }
  }
  for (const KpId& kp : defined) index.trees.emplace(kp, tree::build_tree(kp, corpus, index.bkps, majority));
  return index;
}

std::set<KpId> not_understood_kps(const DocumentProfile& doc, const KnowledgeState& state, const TreeIndex& index) {
  std::set<KpId> closure;
  for (const auto& [kp, share] : doc.kp_shares) {
    closure.insert(kp);
    if (index.bkps.contains(kp)) continue;
    auto it = index.trees.find(kp);
    if (it == index.trees.end()) {
      throw ValidationError(fmt::format("document '{}': no Understanding Tree for non-BKP '{}'", doc.id, kp));
    }
    closure.insert(it->second.nodes.begin(), it->second.nodes.end());
  }
  std::erase_if(closure, [&](const KpId& kp) { return state.is_understood(kp); });
  return closure;
}

std::size_t not_understood_count(const DocumentProfile& doc, const KnowledgeState& state, const TreeIndex& index) {
  return not_understood_kps(doc, state, index).size();
}

std::vector<DocId> recommend(std::span<const DocumentProfile> docs, const KnowledgeState& state,
                             const TreeIndex& index) {
  std::vector<DocId> best;
  std::size_t best_count = std::numeric_limits<std::size_t>::max();
  for (const DocumentProfile& d : docs) {
    const std::size_t n = not_understood_count(d, state, index);
    if (n < best_count) {
      best_count = n;
      best.clear();
    }
    if (n == best_count) best.push_back(d.id);
  }
  std::sort(best.begin(), best.end(), NaturalLess{});
  return best;
}

double doc_understanding(const DocumentProfile& doc, const std::map<KpId, double>& pu) {
  if (doc.kp_shares.empty()) throw ValidationError(fmt::format("document '{}' has no KP shares", doc.id));
  double num = 0.0, den = 0.0;
  for (const auto& [kp, share] : doc.kp_shares) {
    auto it = pu.find(kp);
    num += share * (it == pu.end() ? 0.0 : it->second);
    den += share;
  }
  if (!(den > 0.0)) throw ValidationError(fmt::format("document '{}' shares sum to zero", doc.id));
  return num / den;
}

std::vector<DocId> recommend_by_understanding(std::span<const DocumentProfile> docs,
                                              const std::map<KpId, double>& pu) {
  constexpr double kTie = 1e-12;
  std::vector<std::pair<DocId, double>> scored;
  for (const DocumentProfile& d : docs) scored.emplace_back(d.id, doc_understanding(d, pu));
  const bool any_below = std::any_of(scored.begin(), scored.end(), [](const auto& s) { return s.second < 1.0; });
  double best = -1.0;
  for (const auto& [id, v] : scored) {
    if (!any_below || v < 1.0) best = std::max(best, v);
  }
  std::vector<DocId> out;
  for (const auto& [id, v] : scored) {
    if ((!any_below || v < 1.0) && std::abs(v - best) <= kTie) out.push_back(id);
  }
  std::sort(out.begin(), out.end(), NaturalLess{});
  return out;
}

KnowledgeState estimate_state(const TreeIndex& index, const std::map<KpId, double>& scores, double threshold) {
  std::map<KpId, double> pu;
  for (const KpId& kp : index.bkps) {
    auto it = scores.find(kp);
    pu[kp] = tree::percent_familiarity(it == scores.end() ? 0.0 : it->second, threshold);
  }
  for (const auto& [kp, t] : index.trees) pu[kp] = tree::percent_understanding(t, scores, threshold).pu;
  return KnowledgeState::from_pu(std::move(pu));
}

PlanDeadlock::PlanDeadlock(const DocId& doc, const std::set<KpId>& blocking)
    : ValidationError(fmt::format("plan deadlock at '{}': Not Understood KPs block progress: {}", doc,
                                  fmt::join(blocking, ", "))),
      blocking_(blocking) {}

LearningPlan plan_sequence(std::span<const DocumentProfile> docs, const KnowledgeState& initial,
                           const TreeIndex& index, std::optional<std::span<const DocId>> forced_order) {
  check_unique_ids(docs);
  if (forced_order && forced_order->size() > docs.size()) {
    throw ValidationError("forced order is longer than the document list");
  }
  LearningPlan plan;
  for (const DocumentProfile& d : docs) plan.columns.push_back(d.id);
  KnowledgeState state = initial;
  std::vector<DocumentProfile> remaining(docs.begin(), docs.end());
  plan.matrix.push_back(count_row(docs, state, index));

  std::size_t step = 0;
  while (!remaining.empty()) {
    DocId pick;
    const bool forced = forced_order && step < forced_order->size();
    if (forced) {
      pick = (*forced_order)[step];
      if (std::none_of(remaining.begin(), remaining.end(), [&](const auto& d) { return d.id == pick; })) {
        throw ValidationError(fmt::format("forced order step {}: '{}' is unknown or already learned", step + 1, pick));
      }
    } else {
      pick = recommend(remaining, state, index).front();
    }
    const DocumentProfile& doc = find_doc(docs, pick);
    const std::set<KpId> blocking = learn(doc, state, index);
    if (!blocking.empty() && !forced) throw PlanDeadlock(pick, blocking);

    remaining = without(std::move(remaining), pick);
    plan.sequence.push_back(pick);
    plan.matrix.push_back(count_row(docs, state, index));
    ++step;
  }
  plan.final_state = std::move(state);
  return plan;
}

SequenceCheck check_sequence(std::span<const DocumentProfile> docs, const KnowledgeState& initial,
                             const TreeIndex& index, std::span<const DocId> order) {
  check_unique_ids(docs);
  SequenceCheck result;
  if (order.size() != docs.size()) {
    result.valid = false;
    result.reason = fmt::format("order has {} documents, corpus has {}", order.size(), docs.size());
    return result;
  }
  KnowledgeState state = initial;
  std::vector<DocumentProfile> remaining(docs.begin(), docs.end());
  for (std::size_t step = 0; step < order.size(); ++step) {
    const DocId& pick = order[step];
    auto it = std::find_if(remaining.begin(), remaining.end(), [&](const auto& d) { return d.id == pick; });
    if (it == remaining.end()) {
      result.valid = false;
      result.failed_step = step;
      result.reason = fmt::format("'{}' is unknown or repeated", pick);
      return result;
    }
    const std::size_t mine = not_understood_count(*it, state, index);
    std::size_t best = mine;
    for (const DocumentProfile& d : remaining) best = std::min(best, not_understood_count(d, state, index));
    if (mine != best) {
      result.valid = false;
      result.failed_step = step;
      result.reason = fmt::format("'{}' has {} Not Understood KPs, minimum is {}", pick, mine, best);
      return result;
    }
    learn(*it, state, index);
    remaining = without(std::move(remaining), pick);
  }
  return result;
}

LearningPlan plan_sequence_coupled(std::span<const DocumentProfile> docs, const TreeIndex& index,
                                   CoupledOptions opts) {
  check_unique_ids(docs);
  if (opts.session_length <= Seconds{0}) throw ValidationError("session length must be positive");
  if (opts.spacing < opts.session_length) throw ValidationError("step spacing must cover the session length");

  std::set<KpId> kps = index.all_kps();
  for (const DocumentProfile& d : docs) {
    for (const auto& [kp, s] : d.kp_shares) kps.insert(kp);
  }
  for (const KpId& kp : kps) opts.histories.try_emplace(kp, history::LearningHistory{kp, {}});

  const auto assess = [&](TimePoint at) {
    std::map<KpId, double> scores;
    for (const auto& [kp, h] : opts.histories) scores[kp] = familiarity::familiarity(h, at, opts.retention).value;
    return estimate_state(index, scores, opts.threshold);
  };

  LearningPlan plan;
  for (const DocumentProfile& d : docs) plan.columns.push_back(d.id);
  TimePoint now = opts.start;
  KnowledgeState state = assess(now);
  plan.matrix.push_back(count_row(docs, state, index));

  std::vector<DocumentProfile> remaining(docs.begin(), docs.end());
  while (!remaining.empty()) {
    const DocId pick = recommend(remaining, state, index).front();
    const DocumentProfile& doc = find_doc(docs, pick);
    for (const auto& [kp, share] : doc.kp_shares) {
      if (!(share > 0.0)) continue;
      opts.histories[kp].experiences.push_back(
          {now + opts.session_length, opts.session_length, share, 1.0, 1.0, history::LearningMethod::Read,
           "plan:" + pick});
    }
    now += opts.spacing;
    state = assess(now);
    remaining = without(std::move(remaining), pick);
    plan.sequence.push_back(pick);
    plan.matrix.push_back(count_row(docs, state, index));
  }
  plan.final_state = std::move(state);
  return plan;
}

}  // namespace ickem::caiml
