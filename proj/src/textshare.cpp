#include "ickem/textshare.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace ickem::textshare {
namespace {

constexpr double kSumTolerance = 1e-9;

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

template <typename Visit>
void scan(std::string_view text, const KpDictionary& dict, Visit&& visit) {
  const std::vector<std::string> tokens = tokenize(text);
  std::span<const std::string> all(tokens);
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t max_len = std::min(dict.longest_alias(), tokens.size() - i);
    std::size_t matched = 0;
    for (std::size_t len = max_len; len >= 1; --len) {
      if (auto id = dict.match(all.subspan(i, len))) {
        visit(&*id, tokens[i]);
        matched = len;
        break;
      }
    }
    if (matched == 0) {
      visit(static_cast<const KpId*>(nullptr), tokens[i]);
      matched = 1;
    }
    i += matched;
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

KpDictionary::KpDictionary(std::vector<KpEntry> entries) {
  for (KpEntry& e : entries) {
    if (e.id.empty()) throw ValidationError("dictionary entry with empty id");
    if (e.aliases.empty()) throw ValidationError(fmt::format("KP '{}' has no aliases", e.id));
    for (const std::string& alias : e.aliases) {
      const auto tokens = tokenize(alias);
      if (tokens.empty()) throw ValidationError(fmt::format("KP '{}' has an empty alias", e.id));
      const std::string phrase = join(tokens);
      auto [it, inserted] = phrases_.emplace(phrase, e.id);
      if (!inserted && it->second != e.id) {
        throw ValidationError(
            fmt::format("alias '{}' maps to both '{}' and '{}'", alias, it->second, e.id));
      }
      longest_alias_ = std::max(longest_alias_, tokens.size());
    }
    const KpId id = e.id;
    if (!entries_.emplace(id, std::move(e)).second) {
      throw ValidationError(fmt::format("duplicate KP id '{}'", id));
    }
  }
}

const KpEntry* KpDictionary::find(const KpId& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<KpId> KpDictionary::match(std::span<const std::string> tokens) const {
  auto it = phrases_.find(join(tokens));
  if (it == phrases_.end()) return std::nullopt;
  return it->second;
}

std::set<KpId> KpDictionary::bkps() const {
  std::set<KpId> out;
  for (const auto& [id, e] : entries_) {
    if (e.is_bkp) out.insert(id);
  }
  return out;
}

TermStats count_terms(std::string_view text, const KpDictionary& dict) {
  if (dict.empty()) throw ValidationError("count_terms: empty dictionary");
  TermStats stats;
  scan(text, dict, [&](const KpId* kp, const std::string& word) {
    const std::uint64_t n = kp ? ++stats.kp_counts[*kp] : ++stats.word_counts[word];
    stats.max_tf = std::max(stats.max_tf, n);
  });
  return stats;
}

std::set<KpId> referenced_kps(std::string_view text, const KpDictionary& dict) {
  if (dict.empty()) throw ValidationError("referenced_kps: empty dictionary");
  std::set<KpId> out;
  scan(text, dict, [&](const KpId* kp, const std::string&) {
    if (kp) out.insert(*kp);
  });
  return out;
}

NormalizedTf normalized_tf(const TermStats& stats, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0, 1)");
  if (stats.empty() || stats.max_tf == 0) throw ValidationError("normalized_tf: empty term stats");
  const double max_tf = static_cast<double>(stats.max_tf);
  const auto norm = [&](std::uint64_t t) { return alpha + (1.0 - alpha) * static_cast<double>(t) / max_tf; };
  NormalizedTf out;
  for (const auto& [kp, t] : stats.kp_counts) out.kps.emplace(kp, norm(t));
  for (const auto& [w, t] : stats.word_counts) out.words.emplace(w, norm(t));
  return out;
}

ShareVector tf_share(const TermStats& stats, double alpha) {
  if (stats.kp_counts.empty()) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0, 1)");
    return {};
  }
  const NormalizedTf n = normalized_tf(stats, alpha);
  double total = 0.0;
  for (const auto& [kp, v] : n.kps) total += v;
  ShareVector shares;
  for (const auto& [kp, v] : n.kps) shares.emplace(kp, v / total);
  return shares;
}

void TopicModelOutput::validate() const {
  if (topics.empty()) throw ValidationError("topic model: k must be >= 1");
  if (top_m < 1) throw ValidationError("topic model: top_m must be >= 1");
  if (coverage.size() != topics.size()) {
    throw ValidationError(fmt::format("topic model: coverage has {} entries for {} topics", coverage.size(),
                                      topics.size()));
  }
  double cov = 0.0;
  for (std::size_t j = 0; j < coverage.size(); ++j) {
    if (!(coverage[j] >= 0.0)) throw ValidationError(fmt::format("topic model: coverage[{}] is negative", j));
    cov += coverage[j];
  }
  if (std::abs(cov - 1.0) > kSumTolerance) {
    throw ValidationError(fmt::format("topic model: coverage sums to {} (expected 1)", cov));
  }
  for (std::size_t j = 0; j < topics.size(); ++j) {
    double sum = 0.0;
    for (const auto& [term, p] : topics[j]) {
      if (!(p >= 0.0)) throw ValidationError(fmt::format("topic model: topic {} term '{}' has negative probability", j, term));
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw ValidationError(fmt::format("topic model: topic {} sums to {} (expected 1)", j, sum));
    }
    if (topics[j].size() < top_m) {
      throw ValidationError(
          fmt::format("topic model: top_m={} exceeds support {} of topic {}", top_m, topics[j].size(), j));
    }
  }
}

ShareVector topic_share(const TopicModelOutput& tm, const KpDictionary& dict) {
  tm.validate();
  if (dict.empty()) throw ValidationError("topic_share: empty dictionary");

  // weight of (term, topic) before normalization: pi_j * p(t_i | theta_j)
  std::map<std::string, double> term_weight;
  double z = 0.0;
  for (std::size_t j = 0; j < tm.topics.size(); ++j) {
    std::vector<std::pair<std::string, double>> ranked(tm.topics[j].begin(), tm.topics[j].end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(tm.top_m);
    for (const auto& [term, p] : ranked) {
      const double w = tm.coverage[j] * p;
      term_weight[term] += w;
      z += w;
    }
  }

  ShareVector shares;
  if (z <= 0.0) return shares;
  for (const auto& [term, w] : term_weight) {
    if (auto kp = dict.match(tokenize(term))) shares[*kp] += w / z;
  }
  const double total = share_total(shares);
  if (total <= 0.0) return {};
  for (auto& [kp, v] : shares) v /= total;
  std::erase_if(shares, [](const auto& kv) { return kv.second <= 0.0; });
  return shares;
}

double share_total(const ShareVector& shares) {
  return std::accumulate(shares.begin(), shares.end(), 0.0,
                         [](double acc, const auto& kv) { return acc + kv.second; });
}

}  // namespace ickem::textshare
