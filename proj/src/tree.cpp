#include "ickem/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

namespace ickem::tree {
namespace {

double score_of(const std::map<KpId, double>& scores, const KpId& kp) {
  auto it = scores.find(kp);
  return it == scores.end() ? 0.0 : it->second;
}

class Builder {
 public:
  Builder(std::span<const Definition> corpus, const std::set<KpId>& bkps, double majority)
      : bkps_(bkps), majority_(majority) {
    for (const Definition& d : corpus) by_subject_[d.subject].push_back(&d);
  }

  UnderstandingTree build(const KpId& root) {
    if (!by_subject_.contains(root)) throw ValidationError(fmt::format("no definition of '{}' in corpus", root));
    if (bkps_.contains(root)) throw ValidationError(fmt::format("root '{}' is a BKP", root));
    tree_.root = root;
    tree_.nodes.insert(root);
    expand(root);
    return std::move(tree_);
  }

 private:
  enum class Mark { InStack, Done };

  std::vector<KpId> select(const KpId& kp) const {
    const auto& defs = by_subject_.at(kp);
    std::map<KpId, std::size_t> votes;
    for (const Definition* d : defs) {
      for (const KpId& ref : d->referenced) {
        if (ref != kp) ++votes[ref];
      }
    }
    const double needed = majority_ * static_cast<double>(defs.size());
    std::vector<KpId> out;
    for (const auto& [ref, n] : votes) {
      if (static_cast<double>(n) > needed) out.push_back(ref);
    }
    return out;  // map order, so sorted by id
  }

  void expand(const KpId& kp) {
    mark_[kp] = Mark::InStack;
    std::vector<KpId>& kids = tree_.children[kp];
    for (const KpId& child : select(kp)) {
      auto seen = mark_.find(child);
      if (seen != mark_.end() && seen->second == Mark::InStack) {
        tree_.cycle_breaks.push_back({kp, child});
        continue;
      }
      kids.push_back(child);
      tree_.nodes.insert(child);
      if (bkps_.contains(child)) {
        tree_.bkp_nodes.insert(child);
        continue;
      }
      if (seen != mark_.end()) continue;  // already expanded elsewhere
      if (!by_subject_.contains(child)) {
        tree_.undefined_leaves.insert(child);
        mark_[child] = Mark::Done;
        continue;
      }
      expand(child);
    }
    mark_[kp] = Mark::Done;
  }

  std::map<KpId, std::vector<const Definition*>> by_subject_;
  const std::set<KpId>& bkps_;
  double majority_;
  std::map<KpId, Mark> mark_;
  UnderstandingTree tree_;
};

}  // namespace

Definition extract_definition(KpId subject, std::string text, const textshare::KpDictionary& dict) {
  Definition d{std::move(subject), std::move(text), {}};
  d.referenced = textshare::referenced_kps(d.text, dict);
  d.referenced.erase(d.subject);
  return d;
}

const std::vector<KpId>& UnderstandingTree::children_of(const KpId& kp) const {
  static const std::vector<KpId> kNone;
  auto it = children.find(kp);
  return it == children.end() ? kNone : it->second;
}

std::vector<KpId> UnderstandingTree::descendants() const {
  std::vector<KpId> out;
  for (const KpId& n : nodes) {
    if (n != root) out.push_back(n);
  }
  return out;
}

std::vector<KpId> UnderstandingTree::leaves() const {
  std::vector<KpId> out;
  for (const KpId& n : nodes) {
    if (children_of(n).empty()) out.push_back(n);
  }
  return out;
}

std::size_t UnderstandingTree::height() const {
  std::map<KpId, std::size_t> memo;
  std::function<std::size_t(const KpId&)> depth = [&](const KpId& kp) -> std::size_t {
    if (auto it = memo.find(kp); it != memo.end()) return it->second;
    std::size_t h = 0;
    for (const KpId& c : children_of(kp)) h = std::max(h, depth(c) + 1);
    memo[kp] = h;
    return h;
  };
  return depth(root);
}

UnderstandingTree build_tree(const KpId& root, std::span<const Definition> corpus, const std::set<KpId>& bkps,
                             double majority) {
  if (!(majority >= 0.0 && majority < 1.0)) throw ValidationError("majority fraction must lie in [0, 1)");
  for (const Definition& d : corpus) {
    if (bkps.contains(d.subject)) {
      throw ValidationError(fmt::format("BKP '{}' has a definition in the corpus", d.subject));
    }
  }
  return Builder(corpus, bkps, majority).build(root);
}

double percent_familiarity(double familiarity, double threshold) {
  if (!(threshold > 0.0)) throw ValidationError("threshold f_T must be positive");
  if (familiarity >= threshold) return 1.0;
  return std::max(0.0, familiarity) / threshold;
}

std::string_view to_string(Classification c) {
  return c == Classification::Understood ? "Understood" : "Not Understood";
}

int UnderstandingReport::percent() const { return static_cast<int>(std::lround(pu * 100.0)); }

UnderstandingReport percent_understanding(const UnderstandingTree& tree, const std::map<KpId, double>& scores,
                                          double threshold, bool exclude_bkps) {
  UnderstandingReport r;
  r.root_pf = percent_familiarity(score_of(scores, tree.root), threshold);
  const std::vector<KpId> desc = tree.descendants();
  if (desc.empty()) {
    r.degenerate = true;
    r.mean_descendant_pf = 1.0;
    r.pu = r.root_pf;
  } else {
    double sum = 0.0;
    for (const KpId& kp : desc) sum += percent_familiarity(score_of(scores, kp), threshold);
    r.mean_descendant_pf = sum / static_cast<double>(desc.size());
    r.pu = r.root_pf * r.mean_descendant_pf;
  }
  r.classification = r.pu == 1.0 ? Classification::Understood : Classification::NotUnderstood;
  if (r.classification == Classification::Understood) {
    r.magnitude = magnitude(tree, scores, threshold, exclude_bkps);
  }
  return r;
}

double magnitude(const UnderstandingTree& tree, const std::map<KpId, double>& scores, double threshold,
                 bool exclude_bkps) {
  if (!(threshold > 0.0)) throw ValidationError("threshold f_T must be positive");
  double sum = 0.0;
  std::size_t n = 0;
  for (const KpId& kp : tree.nodes) {
    const double f = score_of(scores, kp);
    if (f < threshold) {
      throw ValidationError(fmt::format("magnitude: '{}' is below the threshold, tree is Not Understood", kp));
    }
    if (exclude_bkps && tree.bkp_nodes.contains(kp)) continue;
    sum += f;
    ++n;
  }
  return sum / static_cast<double>(n) / threshold;
}

}  // namespace ickem::tree
