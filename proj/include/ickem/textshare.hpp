#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ickem/common.hpp"

namespace ickem::textshare {

/// Lowercases and splits on every non-alphanumeric character.
std::vector<std::string> tokenize(std::string_view text);

struct KpEntry {
  KpId id;
  std::string name;
  std::vector<std::string> aliases;  // matched case-insensitively on token boundaries
  bool is_bkp = false;
};

/// Canonical Knowledge Point ids with their surface forms.
///
/// Aliases are stored tokenized, so "Joint  Probability-Distribution" and
/// "joint probability distribution" are the same phrase. Two ids may not
/// share a phrase.
class KpDictionary {
 public:
  KpDictionary() = default;
  explicit KpDictionary(std::vector<KpEntry> entries);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<KpId, KpEntry>& entries() const { return entries_; }
  const KpEntry* find(const KpId& id) const;
  bool contains(const KpId& id) const { return entries_.contains(id); }

  /// Exact lookup of a tokenized phrase.
  std::optional<KpId> match(std::span<const std::string> tokens) const;
  std::size_t longest_alias() const { return longest_alias_; }

  std::set<KpId> bkps() const;

 private:
  std::map<KpId, KpEntry> entries_;
  std::unordered_map<std::string, KpId> phrases_;
  std::size_t longest_alias_ = 0;
};

/// Raw term frequencies of one session's text. Alias hits are attributed to
/// their KP id; every other token is counted as a plain word, since plain
/// words also compete for Max(TF).
struct TermStats {
  std::map<KpId, std::uint64_t> kp_counts;
  std::map<std::string, std::uint64_t> word_counts;
  std::uint64_t max_tf = 0;

  bool empty() const { return kp_counts.empty() && word_counts.empty(); }
};

/// Longest-match scan of `text` against the dictionary's aliases.
TermStats count_terms(std::string_view text, const KpDictionary& dict);

/// Distinct KPs mentioned in `text`.
std::set<KpId> referenced_kps(std::string_view text, const KpDictionary& dict);

struct NormalizedTf {
  std::map<KpId, double> kps;
  std::map<std::string, double> words;
};

/// Double normalization: N = alpha + (1 - alpha) * T / Max(TF).
NormalizedTf normalized_tf(const TermStats& stats, double alpha);

/// KP id -> share of the session, summing to one when non-empty.
using ShareVector = std::map<KpId, double>;

/// Normalized TF renormalized over the KP terms present. Empty if the
/// text mentions no KP.
ShareVector tf_share(const TermStats& stats, double alpha);

inline constexpr double kDefaultAlpha = 0.4;

struct TopicModelOutput {
  std::vector<std::map<std::string, double>> topics;  // p(term | topic)
  std::vector<double> coverage;                       // p(topic | session)
  std::size_t top_m = 20;

  /// Throws ValidationError naming the first failing invariant.
  void validate() const;
};

/// Top-m term shares from an imported topic model, summed over topics,
/// restricted to terms that are KP aliases and renormalized over KP ids.
ShareVector topic_share(const TopicModelOutput& tm, const KpDictionary& dict);

/// Sum of the shares (for invariant checks).
double share_total(const ShareVector& shares);

}  // namespace ickem::textshare
