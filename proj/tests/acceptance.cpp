// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "corpus_oracle.hpp"
#include "ickem/caiml.hpp"
#include "ickem/familiarity.hpp"
#include "ickem/fixtures.hpp"
#include "ickem/history.hpp"
#include "ickem/io.hpp"
#include "ickem/textshare.hpp"
#include "ickem/tree.hpp"
#include "support.hpp"

using namespace ickem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome matrix_replay() {
  const auto t0 = Clock::now();
  const auto docs = fixtures::probability_profiles();
  const auto index = caiml::build_index(docs);
  const auto initial = caiml::KnowledgeState::with_understood(index.bkps);
  const auto order = fixtures::worked_example_order();
  const auto plan = caiml::plan_sequence(docs, initial, index, std::span<const DocId>(order));
  const auto csv = io::encode_matrix_csv(plan);
  const double elapsed = seconds_since(t0);

  const auto& want = ickem::testing::worked_example_matrix();
  std::size_t cells = 0, equal = 0;
  for (std::size_t r = 0; r < want.size(); ++r) {
    for (std::size_t c = 0; c < want[r].size(); ++c) {
      ++cells;
      if (r < plan.matrix.size() && c < plan.matrix[r].size() && plan.matrix[r][c] == want[r][c]) ++equal;
    }
  }
  const bool csv_ok = io::parse_matrix_csv(csv) == want;
  return {equal == 72 && cells == 72 && csv_ok && plan.matrix.size() == want.size() && elapsed < 1.0,
          fmt::format("{}/{} cells equal, csv {}, {:.4f} s", equal, cells, csv_ok ? "ok" : "differs", elapsed)};
}

Outcome initial_recommendation() {
  const auto docs = fixtures::probability_profiles();
  const auto index = caiml::build_index(docs);
  const auto rec = caiml::recommend(docs, caiml::KnowledgeState::with_understood(index.bkps), index);
  return {rec == std::vector<DocId>{"D5", "D7", "D8"}, fmt::format("{{{}}}", fmt::join(rec, ", "))};
}

Outcome clt_children() {
  const auto t = tree::build_tree(fixtures::kClt, fixtures::clt_definitions(), fixtures::clt_dictionary().bkps(),
                                  0.5);
  const auto& kids = t.children_of(fixtures::kClt);
  const std::set<KpId> got(kids.begin(), kids.end());
  const std::set<KpId> want{"sample", "distribution", "mean", "independent", "normal"};
  return {got == want && kids.size() == want.size(), fmt::format("{{{}}}", fmt::join(kids, ", "))};
}

Outcome understanding_anchor() {
  const std::vector<tree::Definition> defs{{"R", "", {"A", "B", "C"}}, {"A", "", {"D"}}};
  const auto t = tree::build_tree("R", defs, {"B", "C", "D"});
  const std::map<KpId, double> f{{"R", 85}, {"A", 100}, {"B", 100}, {"C", 100}, {"D", 56}};
  const auto r = tree::percent_understanding(t, f, 100.0);
  const bool ok = std::abs(r.root_pf - 0.85) < 1e-12 && std::abs(r.mean_descendant_pf - 0.89) < 1e-12 &&
                  r.percent() == 76 && r.classification == tree::Classification::NotUnderstood;
  return {ok, fmt::format("PF(root) {:.2f}, mean {:.2f}, PU {:.4f} -> {}%", r.root_pf, r.mean_descendant_pf, r.pu,
                          r.percent())};
}

Outcome retention_properties() {
  using big = boost::multiprecision::cpp_bin_float_50;
  const big k("1.84"), c("1.25");
  const big t = big(1441);
  const double oracle = static_cast<double>(k / (pow(log10(t), c) + k));
  const double day = familiarity::retention(1440.0);
  const bool at_zero = familiarity::retention(0.0) == 1.0;

  bool decreasing = true;
  double prev = 1.0;
  std::size_t points = 0;
  for (double m = 1.0; m <= 10.0 * 365.25 * 1440.0; m += 60.0) {
    const double b = familiarity::retention(m);
    decreasing = decreasing && b < prev;
    prev = b;
    ++points;
  }
  const double err = std::abs(day - oracle);
  return {at_zero && decreasing && err <= 1e-3,
          fmt::format("b(0)=1 {}, decreasing over {} grid points {}, b(1 day)={:.6f} vs {:.6f} (|diff| {:.1e})",
                      at_zero ? "yes" : "no", points, decreasing ? "yes" : "no", day, oracle, err)};
}

Outcome familiarity_pattern() {
  using familiarity::FactorMode;
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> n(2, 12);
  const std::array<Seconds, 5> after{Seconds{3600}, Seconds{86400}, Seconds{86400 * 30}, Seconds{86400 * 365},
                                     Seconds{86400 * 3652}};
  std::size_t failures = 0;
  const std::size_t rounds = 1000;
  for (std::size_t i = 0; i < rounds; ++i) {
    auto h = ickem::testing::random_history(rng, "A", n(rng), ickem::testing::epoch());
    for (auto& e : h.experiences) e.pps_factor = std::max(e.pps_factor, 0.05);
    double prev_full = std::numeric_limits<double>::infinity(), prev_simple = prev_full;
    for (Seconds dt : after) {
      const TimePoint at = ickem::testing::epoch() + dt;
      const double full = familiarity::familiarity(h, at, {}, FactorMode::Apply).value;
      const double simple = familiarity::familiarity(h, at, {}, FactorMode::Ignore).value;
      if (!(full < prev_full && simple < prev_simple && simple >= full)) {
        ++failures;
        break;
      }
      prev_full = full;
      prev_simple = simple;
    }
  }
  return {failures == 0, fmt::format("{} histories x 5 eval times, {} violations", rounds, failures)};
}

struct Suite {
  std::string name;
  std::function<bool(std::mt19937_64&)> instance;
};

Outcome property_suites() {
  using namespace textshare;
  std::vector<Suite> suites;

  suites.push_back({"share sums", [](std::mt19937_64& rng) {
                      std::uniform_int_distribution<std::uint64_t> cnt(1, 30);
                      TermStats s;
                      for (int i = 0, n = 1 + static_cast<int>(rng() % 6); i < n; ++i)
                        s.kp_counts["K" + std::to_string(i)] = cnt(rng);
                      for (int i = 0, n = static_cast<int>(rng() % 5); i < n; ++i)
                        s.word_counts["w" + std::to_string(i)] = cnt(rng);
                      for (const auto& [k, v] : s.kp_counts) s.max_tf = std::max(s.max_tf, v);
                      for (const auto& [k, v] : s.word_counts) s.max_tf = std::max(s.max_tf, v);
                      const double alpha = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
                      const auto sh = tf_share(s, alpha);
                      // recompute the total from raw counts
                      long double z = 0, total = 0;
                      for (const auto& [k, t] : s.kp_counts) z += alpha + (1 - alpha) * (long double)t / s.max_tf;
                      for (const auto& [k, t] : s.kp_counts)
                        total += (alpha + (1 - alpha) * (long double)t / s.max_tf) / z;
                      return std::abs(share_total(sh) - 1.0) <= 1e-9 && std::abs((double)total - 1.0) <= 1e-9;
                    }});

  suites.push_back({"familiarity additivity", [](std::mt19937_64& rng) {
                      const auto a = ickem::testing::random_history(rng, "K", 1 + rng() % 15, ickem::testing::epoch());
                      const auto b = ickem::testing::random_history(rng, "K", 1 + rng() % 15,
                                                                    ickem::testing::epoch() + Seconds{86400 * 400});
                      history::LearningHistory both{"K", a.experiences};
                      both.experiences.insert(both.experiences.end(), b.experiences.begin(), b.experiences.end());
                      const TimePoint at = ickem::testing::epoch() + Seconds{86400 * 400 + (long)(rng() % 90000000)};
                      const double whole = familiarity::familiarity(both, at).value;
                      const double oracle = (double)(ickem::testing::familiarity_oracle(a, at, true) +
                                                     ickem::testing::familiarity_oracle(b, at, true));
                      const double parts = familiarity::familiarity(a, at).value + familiarity::familiarity(b, at).value;
                      return ickem::testing::close_rel(whole, parts, 1e-9) &&
                             ickem::testing::close_rel(whole, oracle, 1e-9);
                    }});

  suites.push_back({"matrix columns non-increasing", [](std::mt19937_64& rng) {
                      std::vector<ickem::testing::RawDoc> raw;
                      const int n = 1 + static_cast<int>(rng() % 9);
                      for (int i = 0; i < n; ++i) {
                        ickem::testing::RawDoc d{"D" + std::to_string(i + 1), "K" + std::to_string(i), {}};
                        d.kps.push_back(d.defines);
                        for (int j = 0; j < i; ++j)
                          if (rng() % 3 == 0) d.kps.push_back(raw[j].defines);
                        d.kps.push_back("B" + std::to_string(rng() % 4));
                        raw.push_back(d);
                      }
                      std::shuffle(raw.begin(), raw.end(), rng);
                      std::vector<caiml::DocumentProfile> docs;
                      for (const auto& d : raw) docs.push_back(caiml::profile_from_refs(d.id, d.kps, d.defines));
                      const auto index = caiml::build_index(docs);
                      const auto plan =
                          caiml::plan_sequence(docs, caiml::KnowledgeState::with_understood(index.bkps), index);
                      if (plan.matrix != ickem::testing::CorpusOracle(raw).replay(plan.sequence)) return false;
                      for (std::size_t r = 1; r < plan.matrix.size(); ++r)
                        for (std::size_t c = 0; c < plan.matrix[r].size(); ++c)
                          if (plan.matrix[r][c] > plan.matrix[r - 1][c]) return false;
                      return true;
                    }});

  suites.push_back({"PU monotone in one node", [](std::mt19937_64& rng) {
                      std::vector<tree::Definition> defs;
                      const int n = 2 + static_cast<int>(rng() % 6);
                      std::set<KpId> bkps{"B0", "B1", "B2"};
                      for (int i = 0; i < n; ++i) {
                        tree::Definition d{"K" + std::to_string(i), "", {}};
                        for (int j = i + 1; j < n; ++j)
                          if (rng() % 2 == 0) d.referenced.insert("K" + std::to_string(j));
                        d.referenced.insert("B" + std::to_string(rng() % 3));
                        defs.push_back(d);
                      }
                      const auto t = tree::build_tree("K0", defs, bkps);
                      std::uniform_real_distribution<double> f(0.0, 160.0);
                      std::map<KpId, double> scores;
                      for (const auto& kp : t.nodes) scores[kp] = f(rng);
                      const auto pick = *std::next(t.nodes.begin(), (long)(rng() % t.nodes.size()));
                      auto raised = scores;
                      raised[pick] += f(rng);
                      // brute-force PU over unique nodes
                      const auto pu = [&](const std::map<KpId, double>& s) {
                        double sum = 0;
                        for (const auto& kp : t.nodes)
                          if (kp != t.root) sum += std::min(1.0, s.at(kp) / 100.0);
                        return std::min(1.0, s.at(t.root) / 100.0) * sum / double(t.nodes.size() - 1);
                      };
                      const double before = tree::percent_understanding(t, scores).pu;
                      const double after = tree::percent_understanding(t, raised).pu;
                      return after >= before && std::abs(before - pu(scores)) <= 1e-12 &&
                             std::abs(after - pu(raised)) <= 1e-12;
                    }});

  suites.push_back({"tf_share scale invariance", [](std::mt19937_64& rng) {
                      std::uniform_int_distribution<std::uint64_t> cnt(1, 25);
                      TermStats s;
                      for (int i = 0, n = 1 + static_cast<int>(rng() % 6); i < n; ++i)
                        s.kp_counts["K" + std::to_string(i)] = cnt(rng);
                      for (int i = 0, n = static_cast<int>(rng() % 5); i < n; ++i)
                        s.word_counts["w" + std::to_string(i)] = cnt(rng);
                      for (const auto& [k, v] : s.kp_counts) s.max_tf = std::max(s.max_tf, v);
                      for (const auto& [k, v] : s.word_counts) s.max_tf = std::max(s.max_tf, v);
                      const std::uint64_t m = 2 + rng() % 40;
                      TermStats scaled = s;
                      for (auto& [k, v] : scaled.kp_counts) v *= m;
                      for (auto& [k, v] : scaled.word_counts) v *= m;
                      scaled.max_tf *= m;
                      const auto a = tf_share(s, kDefaultAlpha), b = tf_share(scaled, kDefaultAlpha);
                      if (a.size() != b.size()) return false;
                      for (const auto& [k, v] : a)
                        if (std::abs(b.at(k) - v) > 1e-12) return false;
                      return true;
                    }});

  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  const std::size_t per_suite = 2000;
  std::vector<std::string> parts;
  bool ok = true;
  for (const auto& s : suites) {
    std::size_t passed = 0;
    for (std::size_t i = 0; i < per_suite; ++i) passed += s.instance(rng) ? 1 : 0;
    ok = ok && passed == per_suite;
    parts.push_back(fmt::format("{} {}/{}", s.name, passed, per_suite));
  }
  const double elapsed = seconds_since(t0);
  return {ok && elapsed < 30.0, fmt::format("{}; {:.2f} s", fmt::join(parts, ", "), elapsed)};
}

Outcome round_trip() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / fmt::format("ickem-accept-{}", std::random_device{}());
  fs::create_directories(dir);
  const fs::path path = dir / "profile.jsonl";
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const TimePoint eval = ickem::testing::epoch() + Seconds{86400 * 3000};

  std::string written;
  std::map<KpId, double> before;
  std::size_t experiences = 0;
  {
    auto store = history::HistoryStore::open(path);
    for (int s = 0; s < 1000; ++s) {
      ingest::LearningSession sess;
      sess.did = fmt::format("doc{}", s % 37);
      sess.start = ickem::testing::epoch() + Seconds{s * 7200LL};
      sess.duration = Seconds{60 * (5 + static_cast<std::int64_t>(rng() % 120))};
      sess.stop = sess.start + sess.duration;
      sess.pages = {{1, sess.duration}};
      textshare::ShareVector shares;
      double z = 0.0;
      for (int j = 0; j < 10; ++j) {
        const KpId kp = fmt::format("KP{:03}", (s * 10 + j * 7) % 100);
        shares[kp] += u(rng);
      }
      for (const auto& [k, v] : shares) z += v;
      for (auto& [k, v] : shares) v /= z;
      experiences += store.record_session(sess, shares, u(rng), u(rng),
                                          static_cast<history::LearningMethod>(rng() % 4));
    }
    written = store.dump();
    for (const auto& kp : store.kps()) before[kp] = familiarity::familiarity(store.load_history(kp), eval).value;
  }

  const auto reopened = history::HistoryStore::open(path);
  const bool bytes_same = reopened.dump() == written && io::read_file(path) == written;

  std::vector<std::string> original_lines, reencoded;
  std::istringstream in(written);
  for (std::string line; std::getline(in, line);) original_lines.push_back(line);
  bool scores_same = reopened.kps().size() == before.size();
  for (const auto& kp : reopened.kps()) {
    const auto h = reopened.load_history(kp);
    for (const auto& e : h.experiences) reencoded.push_back(history::encode_record(kp, e));
    scores_same = scores_same && familiarity::familiarity(h, eval).value == before.at(kp);
  }
  std::sort(original_lines.begin(), original_lines.end());
  std::sort(reencoded.begin(), reencoded.end());
  const bool records_same = original_lines == reencoded;
  fs::remove_all(dir);
  return {experiences == 10000 && before.size() == 100 && bytes_same && records_same && scores_same,
          fmt::format("{} experiences over {} KPs; log bytes {}, re-encoded records {}, scores {}", experiences,
                      before.size(), bytes_same ? "identical" : "differ", records_same ? "identical" : "differ",
                      scores_same ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 count matrix replay of the worked example", matrix_replay},
      {"2 initial recommendation set", initial_recommendation},
      {"3 CLT child selection", clt_children},
      {"4 percent understanding anchor", understanding_anchor},
      {"5 retention properties", retention_properties},
      {"6 familiarity decay pattern", familiarity_pattern},
      {"7 property suites", property_suites},
      {"8 history store round trip", round_trip},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("{} criterion {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
