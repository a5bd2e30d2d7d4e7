#include "ickem/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "CLI11.hpp"
#include "ickem/caiml.hpp"
#include "ickem/familiarity.hpp"
#include "ickem/fixtures.hpp"
#include "ickem/history.hpp"
#include "ickem/ingest.hpp"
#include "ickem/io.hpp"
#include "ickem/textshare.hpp"
#include "ickem/tree.hpp"
#include "json_codec.hpp"

namespace ickem::cli {

using io::detail::ordered_json;

void ProfileConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("config field 'alpha' must lie in [0, 1)");
  if (!(threshold > 0.0)) throw ValidationError("config field 'threshold' must be positive");
  if (!(retention.k > 0.0)) throw ValidationError("config field 'k' must be positive");
  if (!(retention.c > 0.0)) throw ValidationError("config field 'c' must be positive");
  if (merge_gap <= Seconds{0}) throw ValidationError("config field 'merge_gap_secs' must be positive");
  if (idle_timeout <= Seconds{0}) throw ValidationError("config field 'idle_timeout_secs' must be positive");
  if (poll_period <= Seconds{0}) throw ValidationError("config field 'poll_secs' must be positive");
  if (!(pps_default >= 0.0 && pps_default <= 1.0)) throw ValidationError("config field 'pps' must lie in [0, 1]");
  if (!(lm_default >= 0.0 && lm_default <= 1.0)) throw ValidationError("config field 'lm' must lie in [0, 1]");
  if (!(majority >= 0.0 && majority < 1.0)) throw ValidationError("config field 'majority' must lie in [0, 1)");
  if (tie_break != "ascending-id") throw ValidationError("config field 'tie_break' supports only 'ascending-id'");
}

ProfileConfig ProfileConfig::from_json(std::string_view text) {
  ProfileConfig c;
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(fmt::format("config: invalid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ValidationError("config: expected an object");
  const auto get = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(target);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("config field '{}' has the wrong type", key));
    }
  };
  const auto get_secs = [&](const char* key, Seconds& target) {
    std::int64_t v = target.count();
    get(key, v);
    target = Seconds{v};
  };
  static const std::set<std::string> known{"alpha", "threshold", "k", "c", "merge_gap_secs", "idle_timeout_secs",
                                           "poll_secs", "pps", "lm", "majority", "tie_break"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ValidationError(fmt::format("config: unknown field '{}'", key));
  }
  get("alpha", c.alpha);
  get("threshold", c.threshold);
  get("k", c.retention.k);
  get("c", c.retention.c);
  get_secs("merge_gap_secs", c.merge_gap);
  get_secs("idle_timeout_secs", c.idle_timeout);
  get_secs("poll_secs", c.poll_period);
  get("pps", c.pps_default);
  get("lm", c.lm_default);
  get("majority", c.majority);
  get("tie_break", c.tie_break);
  c.validate();
  return c;
}

std::string ProfileConfig::to_json() const {
  ordered_json j;
  j["alpha"] = alpha;
  j["threshold"] = threshold;
  j["k"] = retention.k;
  j["c"] = retention.c;
  j["merge_gap_secs"] = merge_gap.count();
  j["idle_timeout_secs"] = idle_timeout.count();
  j["poll_secs"] = poll_period.count();
  j["pps"] = pps_default;
  j["lm"] = lm_default;
  j["majority"] = majority;
  j["tie_break"] = tie_break;
  return j.dump();
}

namespace {

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<double> alpha;
  std::optional<double> threshold;
  std::optional<double> k;
  std::optional<double> c;
  std::optional<std::int64_t> merge_gap;
  std::optional<std::int64_t> idle_timeout;
  std::optional<std::int64_t> poll;
  std::optional<double> pps;
  std::optional<double> lm;
  std::optional<double> majority;

  ProfileConfig resolve() const {
    ProfileConfig cfg = config_path ? ProfileConfig::from_json(io::read_file(*config_path)) : ProfileConfig{};
    if (alpha) cfg.alpha = *alpha;
    if (threshold) cfg.threshold = *threshold;
    if (k) cfg.retention.k = *k;
    if (c) cfg.retention.c = *c;
    if (merge_gap) cfg.merge_gap = Seconds{*merge_gap};
    if (idle_timeout) cfg.idle_timeout = Seconds{*idle_timeout};
    if (poll) cfg.poll_period = Seconds{*poll};
    if (pps) cfg.pps_default = *pps;
    if (lm) cfg.lm_default = *lm;
    if (majority) cfg.majority = *majority;
    cfg.validate();
    return cfg;
  }
};

struct Options {
  Overrides ov;
  std::string log, out, session, dict, topic_model, session_id, sessions, shares, store, kp, at, compensation,
      corpus, defs, force_order, emit_matrix, method = "read", out_dir;
  bool append = false, simple = false, full = false, skip_recorded = false, include_understood = false,
       by_understanding = false, coupled = false, include_bkps = false;
  double session_minutes = 60.0, spacing_hours = 24.0;
};

class Command {
 public:
  Command(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  void header() {
    cfg_ = o_.ov.resolve();
    fmt::print(out_, "# effective config: {}\n", cfg_.to_json());
  }

  int ingest();
  int share();
  int record();
  int history();
  int familiarity();
  int tree_build();
  int understand();
  int recommend();
  int plan();
  int demo();

 private:
  ordered_json with_config(ordered_json body) const {
    ordered_json j;
    j["config"] = ordered_json::parse(cfg_.to_json());
    for (auto& [key, v] : body.items()) j[key] = v;
    return j;
  }

  void emit(const std::string& path, const std::string& bytes) const {
    if (!path.empty()) io::write_file(path, bytes);
  }

  TimePoint at() const {
    if (o_.at.empty()) throw ValidationError("--at is required");
    return parse_iso8601(o_.at);
  }

  history::HistoryStore open_store() const {
    if (o_.store.empty()) throw ValidationError("--store is required (or set ICKEM_STORE)");
    return history::HistoryStore::open(o_.store);
  }

  std::optional<textshare::KpDictionary> load_dict() const {
    if (o_.dict.empty()) return std::nullopt;
    return io::parse_dictionary(io::read_file(o_.dict));
  }

  familiarity::FactorMode mode() const {
    if (o_.simple && o_.full) throw ValidationError("--simple and --full are exclusive");
    return o_.simple ? familiarity::FactorMode::Ignore : familiarity::FactorMode::Apply;
  }

  std::map<KpId, double> scores(const history::HistoryStore& store, const std::set<KpId>& kps, TimePoint t) const {
    std::map<KpId, double> out;
    for (const KpId& kp : kps) {
      out[kp] = familiarity::familiarity(store.load_history(kp), t, cfg_.retention, mode()).value;
    }
    return out;
  }

  /// BKPs flagged in the dictionary; none flagged means "derive from corpus".
  std::optional<std::set<KpId>> dict_bkps(const std::optional<textshare::KpDictionary>& dict) const {
    if (!dict) return std::nullopt;
    auto b = dict->bkps();
    if (b.empty()) return std::nullopt;
    return b;
  }

  std::vector<caiml::DocumentProfile> load_docs(const std::optional<textshare::KpDictionary>& dict) const {
    if (o_.corpus.empty()) throw ValidationError("--corpus is required");
    return io::parse_documents(io::read_file(o_.corpus), dict ? &*dict : nullptr, cfg_.alpha);
  }

  caiml::TreeIndex load_index(const std::vector<caiml::DocumentProfile>& docs,
                              const std::optional<textshare::KpDictionary>& dict) const {
    std::vector<tree::Definition> extra;
    if (!o_.defs.empty()) extra = io::parse_definitions(io::read_file(o_.defs), dict ? &*dict : nullptr);
    return caiml::build_index(docs, extra, dict_bkps(dict), cfg_.majority);
  }

  tree::UnderstandingTree load_tree(const std::optional<textshare::KpDictionary>& dict) const {
    if (o_.corpus.empty()) throw ValidationError("--corpus is required");
    const auto defs = io::parse_definitions(io::read_file(o_.corpus), dict ? &*dict : nullptr);
    std::set<KpId> bkps;
    if (auto flagged = dict_bkps(dict)) {
      bkps = *flagged;
    } else {
      std::set<KpId> defined, mentioned;
      for (const auto& d : defs) {
        defined.insert(d.subject);
        mentioned.insert(d.referenced.begin(), d.referenced.end());
      }
      for (const auto& kp : mentioned) {
        if (!defined.contains(kp)) bkps.insert(kp);
      }
    }
    return tree::build_tree(o_.kp, defs, bkps, cfg_.majority);
  }

  void print_tree(const tree::UnderstandingTree& t, const std::map<KpId, double>* sc) const {
    std::set<KpId> shown;
    const auto walk = [&](auto& self, const KpId& kp, int depth) -> void {
      std::string line = fmt::format("{:{}}{}", "", depth * 2, kp);
      if (sc) {
        auto it = sc->find(kp);
        const double f = it == sc->end() ? 0.0 : it->second;
        line += fmt::format("  F={:.1f} gl PF={:.0f}%", f, 100.0 * tree::percent_familiarity(f, cfg_.threshold));
      }
      if (t.bkp_nodes.contains(kp)) line += "  [BKP]";
      const bool repeat = !shown.insert(kp).second;
      if (repeat && !t.children_of(kp).empty()) line += "  (see above)";
      fmt::print(out_, "{}\n", line);
      if (repeat) return;
      for (const KpId& c : t.children_of(kp)) self(self, c, depth + 1);
    };
    walk(walk, t.root, 0);
    for (const auto& b : t.cycle_breaks) fmt::print(out_, "cycle broken: {} -> {}\n", b.from, b.to);
  }

  void print_plan(const caiml::LearningPlan& plan) const {
    fmt::print(out_, "{:<16}", "");
    for (const auto& c : plan.columns) fmt::print(out_, "{:>4}", c);
    fmt::print(out_, "\n");
    for (std::size_t r = 0; r < plan.matrix.size(); ++r) {
      fmt::print(out_, "{:<16}", r == 0 ? std::string("Before starting") : plan.sequence[r - 1]);
      for (std::size_t v : plan.matrix[r]) fmt::print(out_, "{:>4}", v);
      fmt::print(out_, "\n");
    }
    fmt::print(out_, "sequence: {}\n", fmt::join(plan.sequence, ", "));
  }

  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  ProfileConfig cfg_;
};

int Command::ingest() {
  header();
  const auto events = io::parse_event_log(io::read_file(o_.log));
  const ingest::IngestConfig icfg{cfg_.poll_period, cfg_.idle_timeout, cfg_.merge_gap};
  const auto seg = ingest::segment_sessions(events, icfg);
  for (const auto& w : seg.warnings) fmt::print(err_, "warning: event {}: {}\n", w.position + 1, w.message);
  const auto merged = ingest::merge_sessions(seg.sessions, icfg.merge_gap);
  fmt::print(out_, "events: {}  sessions: {}  after merge: {}\n", events.size(), seg.sessions.size(), merged.size());
  for (const auto& s : merged) {
    fmt::print(out_, "{}  {} s ({:.2f} min)  pages: {}\n", s.id(), s.duration.count(), to_minutes(s.duration),
               s.pages.size());
  }
  emit(o_.out, io::encode_sessions(merged));
  return kExitOk;
}

int Command::share() {
  header();
  const auto dict = load_dict();
  if (!dict) throw ValidationError("--dict is required");
  std::string sid = o_.session_id;
  if (sid.empty() && !o_.session.empty()) sid = std::filesystem::path(o_.session).stem().string();
  if (sid.empty()) throw ValidationError("--session-id is required when no --session file is given");

  textshare::ShareVector shares;
  if (!o_.topic_model.empty()) {
    shares = textshare::topic_share(io::parse_topic_model(io::read_file(o_.topic_model)), *dict);
  } else {
    if (o_.session.empty()) throw ValidationError("--session is required without --topic-model");
    shares = textshare::tf_share(textshare::count_terms(io::read_file(o_.session), *dict), cfg_.alpha);
  }
  fmt::print(out_, "session {}: {} KPs\n", sid, shares.size());
  for (const auto& [kp, v] : shares) fmt::print(out_, "  {:<24} {:.6f}\n", kp, v);

  const std::string line = io::encode_share_record({sid, shares, std::nullopt, std::nullopt, std::nullopt});
  if (!o_.out.empty()) {
    std::string bytes = line;
    if (o_.append && std::filesystem::exists(o_.out)) bytes = io::read_file(o_.out) + line;
    io::write_file(o_.out, bytes);
  }
  return kExitOk;
}

int Command::record() {
  header();
  const auto sessions = io::parse_sessions(io::read_file(o_.sessions));
  const auto share_recs = io::parse_shares(io::read_file(o_.shares));
  const auto method = history::parse_method(o_.method);
  if (!method) throw ValidationError(fmt::format("unknown --method '{}'", o_.method));
  std::map<std::string, const io::ShareRecord*> by_id;
  for (const auto& r : share_recs) by_id[r.session_id] = &r;

  auto store = open_store();
  std::vector<std::pair<const ingest::LearningSession*, const io::ShareRecord*>> todo;
  std::size_t skipped = 0;
  for (const auto& s : sessions) {
    auto it = by_id.find(s.id());
    if (it == by_id.end()) {
      fmt::print(err_, "warning: no shares for session {}; skipped\n", s.id());
      continue;
    }
    if (store.has_session(s.id())) {
      if (!o_.skip_recorded) throw history::DuplicateSession(fmt::format("session '{}' already recorded", s.id()));
      ++skipped;
      continue;
    }
    todo.emplace_back(&s, it->second);
  }
  std::size_t appended = 0;
  for (const auto& [s, rec] : todo) {
    appended += store.record_session(*s, rec->shares, rec->pps.value_or(cfg_.pps_default),
                                     rec->lm.value_or(cfg_.lm_default), rec->method.value_or(*method));
  }
  fmt::print(out_, "recorded {} experiences from {} sessions ({} already recorded)\n", appended, todo.size(),
             skipped);
  return kExitOk;
}

int Command::history() {
  header();
  const auto store = open_store();
  const auto h = store.load_history(o_.kp);
  fmt::print(out_, "{}: {} experiences\n", h.kp, h.experiences.size());
  std::string bytes;
  for (const auto& e : h.experiences) {
    fmt::print(out_, "  {}  {} s ({:.2f} min)  share {:.4f}  pps {:.2f}  lm {:.2f}  {}  {}\n", format_iso8601(e.lct),
               e.duration.count(), to_minutes(e.duration), e.proportion, e.pps_factor, e.lm_factor,
               history::to_string(e.method), e.session_id);
    bytes += history::encode_record(h.kp, e) + "\n";
  }
  emit(o_.out, bytes);
  return kExitOk;
}

int Command::familiarity() {
  header();
  const TimePoint t = at();
  const auto store = open_store();
  std::set<KpId> kps{o_.kp};
  familiarity::SiblingCompensation comp;
  if (!o_.compensation.empty()) {
    comp = io::parse_compensation(io::read_file(o_.compensation));
    if (auto it = comp.find(o_.kp); it != comp.end()) {
      for (const auto& s : it->second) kps.insert(s.id);
    }
  }
  const auto raw = scores(store, kps, t);
  const double base = raw.at(o_.kp);
  const double value = comp.empty() ? base : familiarity::compensate(raw, comp).at(o_.kp);
  const char* mode_name = mode() == familiarity::FactorMode::Apply ? "full" : "simple";
  fmt::print(out_, "F({}) at {} = {:.4f} gl ({} form", o_.kp, format_iso8601(t), value, mode_name);
  if (!comp.empty()) fmt::print(out_, ", {:.4f} gl before compensation", base);
  fmt::print(out_, ")\n");

  ordered_json body;
  body["kp"] = o_.kp;
  body["at"] = format_iso8601(t);
  body["mode"] = mode_name;
  body["F"] = value;
  if (!comp.empty()) body["F_uncompensated"] = base;
  emit(o_.out, with_config(std::move(body)).dump(2) + "\n");
  return kExitOk;
}

int Command::tree_build() {
  header();
  const auto dict = load_dict();
  const auto t = load_tree(dict);
  fmt::print(out_, "tree of {}: {} nodes, height {}\n", t.root, t.nodes.size(), t.height());
  print_tree(t, nullptr);
  emit(o_.out, with_config(io::detail::tree_to_json(t, nullptr, cfg_.threshold)).dump(2) + "\n");
  return kExitOk;
}

int Command::understand() {
  header();
  const TimePoint t = at();
  const auto dict = load_dict();
  const auto tr = load_tree(dict);
  const auto store = open_store();
  const auto sc = scores(store, tr.nodes, t);
  const auto report = tree::percent_understanding(tr, sc, cfg_.threshold, !o_.include_bkps);
  print_tree(tr, &sc);
  fmt::print(out_, "PF(root) = {:.4f}  mean PF(descendants) = {:.4f}  PU = {:.4f} ({}%)  {}\n", report.root_pf,
             report.mean_descendant_pf, report.pu, report.percent(), tree::to_string(report.classification));
  if (report.magnitude) fmt::print(out_, "magnitude of understanding = {:.4f}\n", *report.magnitude);
  if (report.degenerate) fmt::print(out_, "note: tree has no descendants; PU = PF(root)\n");

  ordered_json body;
  body["kp"] = o_.kp;
  body["at"] = format_iso8601(t);
  body["threshold"] = cfg_.threshold;
  body["root_pf"] = report.root_pf;
  body["mean_descendant_pf"] = report.mean_descendant_pf;
  body["pu"] = report.pu;
  body["pu_percent"] = report.percent();
  body["classification"] = std::string(tree::to_string(report.classification));
  if (report.magnitude) body["magnitude"] = *report.magnitude;
  body["degenerate"] = report.degenerate;
  body["tree"] = io::detail::tree_to_json(tr, &sc, cfg_.threshold);
  emit(o_.out, with_config(std::move(body)).dump(2) + "\n");
  return kExitOk;
}

int Command::recommend() {
  header();
  const auto dict = load_dict();
  const auto docs = load_docs(dict);
  const auto index = load_index(docs, dict);

  caiml::KnowledgeState state;
  if (!o_.store.empty()) {
    const TimePoint t = at();
    const auto store = open_store();
    std::set<KpId> kps = index.all_kps();
    for (const auto& d : docs) {
      for (const auto& [kp, s] : d.kp_shares) kps.insert(kp);
    }
    state = caiml::estimate_state(index, scores(store, kps, t), cfg_.threshold);
    fmt::print(out_, "state: estimated from store at {}\n", format_iso8601(t));
  } else {
    state = caiml::KnowledgeState::with_understood(index.bkps);
    fmt::print(out_, "state: no store, only BKPs understood\n");
  }

  ordered_json counts = ordered_json::object();
  ordered_json pud = ordered_json::object();
  std::vector<caiml::DocumentProfile> candidates;
  for (const auto& d : docs) {
    const std::size_t n = caiml::not_understood_count(d, state, index);
    const double u = caiml::doc_understanding(d, state.pu);
    counts[d.id] = n;
    pud[d.id] = u;
    fmt::print(out_, "  {:<8} not understood: {:>3}   PU(d) = {:.1f}%\n", d.id, n, 100.0 * u);
    if (o_.include_understood || n > 0) candidates.push_back(d);
  }
  std::vector<DocId> rec;
  if (!candidates.empty()) {
    rec = o_.by_understanding ? caiml::recommend_by_understanding(candidates, state.pu)
                              : caiml::recommend(candidates, state, index);
  }
  if (rec.empty()) {
    fmt::print(out_, "every document is fully understood\n");
  } else {
    fmt::print(out_, "recommend: {}\n", fmt::join(rec, ", "));
  }
  ordered_json body;
  body["method"] = o_.by_understanding ? "closest-to-full-understanding" : "fewest-not-understood";
  body["recommend"] = rec;
  body["not_understood"] = std::move(counts);
  body["doc_understanding"] = std::move(pud);
  emit(o_.out, with_config(std::move(body)).dump(2) + "\n");
  return kExitOk;
}

int Command::plan() {
  header();
  const auto dict = load_dict();
  const auto docs = load_docs(dict);
  const auto index = load_index(docs, dict);

  std::vector<DocId> forced;
  if (!o_.force_order.empty()) {
    std::stringstream ss(o_.force_order);
    std::string id;
    while (std::getline(ss, id, ',')) {
      if (!id.empty()) forced.push_back(id);
    }
  }

  caiml::LearningPlan plan;
  caiml::KnowledgeState initial = caiml::KnowledgeState::with_understood(index.bkps);
  if (o_.coupled) {
    if (!forced.empty()) throw ValidationError("--force-order is not available with --coupled");
    caiml::CoupledOptions opts;
    opts.start = at();
    opts.threshold = cfg_.threshold;
    opts.retention = cfg_.retention;
    opts.session_length = Seconds{static_cast<std::int64_t>(o_.session_minutes * 60.0)};
    opts.spacing = Seconds{static_cast<std::int64_t>(o_.spacing_hours * 3600.0)};
    if (!o_.store.empty()) {
      const auto store = open_store();
      for (const auto& kp : store.kps()) opts.histories[kp] = store.load_history(kp);
    }
    plan = caiml::plan_sequence_coupled(docs, index, std::move(opts));
  } else {
    if (!o_.store.empty()) {
      const TimePoint t = at();
      const auto store = open_store();
      std::set<KpId> kps = index.all_kps();
      for (const auto& d : docs) {
        for (const auto& [kp, s] : d.kp_shares) kps.insert(kp);
      }
      initial = caiml::estimate_state(index, scores(store, kps, t), cfg_.threshold);
    }
    plan = forced.empty() ? caiml::plan_sequence(docs, initial, index)
                          : caiml::plan_sequence(docs, initial, index, std::span<const DocId>(forced));
  }
  print_plan(plan);

  ordered_json body;
  body["mode"] = o_.coupled ? "familiarity-coupled" : "idealized";
  body["columns"] = plan.columns;
  body["sequence"] = plan.sequence;
  body["matrix"] = plan.matrix;
  if (!o_.coupled) {
    const auto check = caiml::check_sequence(docs, initial, index, plan.sequence);
    fmt::print(out_, "greedy-valid: {}{}\n", check.valid ? "yes" : "no",
               check.valid ? "" : fmt::format(" (step {}: {})", check.failed_step.value_or(0) + 1, check.reason));
    body["greedy_valid"] = check.valid;
  }
  emit(o_.emit_matrix, io::encode_matrix_csv(plan));
  emit(o_.out, with_config(std::move(body)).dump(2) + "\n");
  return kExitOk;
}

int Command::demo() {
  header();
  const auto docs = fixtures::probability_profiles();
  const auto index = caiml::build_index(docs, {}, fixtures::probability_bkps(), cfg_.majority);
  const auto initial = caiml::KnowledgeState::with_understood(index.bkps);

  fmt::print(out_, "== CAIML over the probability corpus (lowest-id tie-break)\n");
  print_plan(caiml::plan_sequence(docs, initial, index));
  const auto order = fixtures::worked_example_order();
  fmt::print(out_, "\n== replay of the worked example order\n");
  const auto replay = caiml::plan_sequence(docs, initial, index, std::span<const DocId>(order));
  print_plan(replay);
  const auto check = caiml::check_sequence(docs, initial, index, order);
  fmt::print(out_, "greedy-valid: {}\n", check.valid ? "yes" : "no");

  fmt::print(out_, "\n== Understanding Tree of CLT from three definitions\n");
  const auto clt = tree::build_tree(fixtures::kClt, fixtures::clt_definitions(), fixtures::clt_dictionary().bkps(),
                                    cfg_.majority);
  print_tree(clt, nullptr);

  if (!o_.out_dir.empty()) {
    const std::filesystem::path dir(o_.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    io::write_file(dir / "probability_docs.jsonl", io::encode_documents(docs));
    io::write_file(dir / "probability_dict.jsonl", io::encode_dictionary(fixtures::probability_dictionary()));
    io::write_file(dir / "clt_defs.jsonl", io::encode_definitions(fixtures::clt_definitions()));
    io::write_file(dir / "clt_dict.jsonl", io::encode_dictionary(fixtures::clt_dictionary()));
    io::write_file(dir / "worked_example_matrix.csv", io::encode_matrix_csv(replay));
    fmt::print(out_, "\nfixtures written to {}\n", dir.string());
  }
  return kExitOk;
}

void add_config_flags(CLI::App* sub, Overrides& ov, std::initializer_list<std::string_view> which) {
  for (std::string_view w : which) {
    if (w == "alpha") sub->add_option("--alpha", ov.alpha, "Normalized-TF smoothing constant");
    if (w == "threshold") sub->add_option("--threshold", ov.threshold, "Familiarity threshold f_T in gl");
    if (w == "retention") {
      sub->add_option("--k", ov.k, "Retention constant k");
      sub->add_option("--c", ov.c, "Retention constant c");
    }
    if (w == "ingest") {
      sub->add_option("--merge-gap-secs", ov.merge_gap, "Merge sessions closer than this");
      sub->add_option("--idle-timeout-secs", ov.idle_timeout, "Idle detection delay");
      sub->add_option("--poll-secs", ov.poll, "Logger poll period; shorter sessions are dropped");
    }
    if (w == "factors") {
      sub->add_option("--pps", ov.pps, "Default physical/psychological state factor");
      sub->add_option("--lm", ov.lm, "Default learning-method factor");
    }
    if (w == "majority") sub->add_option("--majority", ov.majority, "Child selection vote fraction (strict)");
  }
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ickem: familiarity and understanding of knowledge points from learning logs", "ickem"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.ov.config_path, "Profile config (JSON)");

  auto add_store = [&](CLI::App* sub) {
    sub->add_option("--store", o.store, "History store file")->envname("ICKEM_STORE");
  };

  auto* ingest = app.add_subcommand("ingest", "Segment an event log into learning sessions");
  ingest->add_option("--log", o.log, "Event log (JSON Lines)")->required();
  ingest->add_option("--out", o.out, "Sessions output (JSON Lines)");
  add_config_flags(ingest, o.ov, {"ingest"});

  auto* share = app.add_subcommand("share", "Knowledge Point shares of one session");
  share->add_option("--session", o.session, "Session text file");
  share->add_option("--session-id", o.session_id, "Session id (defaults to the text file's stem)");
  share->add_option("--dict", o.dict, "KP dictionary")->required();
  share->add_option("--topic-model", o.topic_model, "Imported topic-model output");
  share->add_option("--out", o.out, "Shares output (JSON Lines)");
  share->add_flag("--append", o.append, "Append to --out instead of replacing it");
  add_config_flags(share, o.ov, {"alpha"});

  auto* record = app.add_subcommand("record", "Append sessions to the learning history store");
  record->add_option("--sessions", o.sessions, "Sessions file")->required();
  record->add_option("--shares", o.shares, "Shares file")->required();
  record->add_option("--method", o.method, "Learning method: read, listen, discuss or write");
  record->add_flag("--skip-recorded", o.skip_recorded, "Skip sessions already in the store");
  add_store(record);
  add_config_flags(record, o.ov, {"factors"});

  auto* hist = app.add_subcommand("history", "Show one KP's learning history");
  hist->add_option("kp", o.kp, "Knowledge Point id")->required();
  hist->add_option("--out", o.out, "Records output (JSON Lines)");
  add_store(hist);

  auto* fam = app.add_subcommand("familiarity", "Familiarity Measure of a KP");
  fam->add_option("kp", o.kp, "Knowledge Point id")->required();
  fam->add_option("--at", o.at, "Evaluation time (ISO-8601)")->required();
  fam->add_flag("--simple", o.simple, "Ignore state and method factors");
  fam->add_flag("--full", o.full, "Apply state and method factors (default)");
  fam->add_option("--compensation", o.compensation, "Sibling compensation file");
  fam->add_option("--out", o.out, "JSON output");
  add_store(fam);
  add_config_flags(fam, o.ov, {"retention"});

  auto* tree_cmd = app.add_subcommand("tree", "Understanding Tree tools");
  tree_cmd->require_subcommand(1);
  auto* build = tree_cmd->add_subcommand("build", "Build a KP's Understanding Tree from definitions");
  build->add_option("kp", o.kp, "Root Knowledge Point id")->required();
  build->add_option("--corpus", o.corpus, "Definition corpus")->required();
  build->add_option("--dict", o.dict, "KP dictionary (aliases and BKP flags)");
  build->add_option("--out", o.out, "Tree export (JSON)");
  add_config_flags(build, o.ov, {"majority"});

  auto* und = app.add_subcommand("understand", "Percent of understanding of a KP");
  und->add_option("kp", o.kp, "Root Knowledge Point id")->required();
  und->add_option("--at", o.at, "Evaluation time (ISO-8601)")->required();
  und->add_option("--corpus", o.corpus, "Definition corpus")->required();
  und->add_option("--dict", o.dict, "KP dictionary");
  und->add_flag("--simple", o.simple, "Ignore state and method factors");
  und->add_flag("--full", o.full, "Apply state and method factors (default)");
  und->add_flag("--include-bkps", o.include_bkps, "Keep BKPs in the magnitude average");
  und->add_option("--out", o.out, "Report (JSON)");
  add_store(und);
  add_config_flags(und, o.ov, {"threshold", "retention", "majority"});

  auto* rec = app.add_subcommand("recommend", "Recommend the next document to learn");
  rec->add_option("--corpus", o.corpus, "Document manifest")->required();
  rec->add_option("--dict", o.dict, "KP dictionary");
  rec->add_option("--defs", o.defs, "Extra definition corpus");
  rec->add_option("--at", o.at, "Evaluation time (ISO-8601), needed with a store");
  rec->add_flag("--include-understood", o.include_understood, "Consider documents already fully understood");
  rec->add_flag("--by-understanding", o.by_understanding, "Pick the document closest to full understanding");
  rec->add_flag("--simple", o.simple, "Ignore state and method factors");
  rec->add_option("--out", o.out, "JSON output");
  add_store(rec);
  add_config_flags(rec, o.ov, {"threshold", "retention", "majority", "alpha"});

  auto* plan = app.add_subcommand("plan", "Plan a full learning sequence");
  plan->add_option("--corpus", o.corpus, "Document manifest")->required();
  plan->add_option("--dict", o.dict, "KP dictionary");
  plan->add_option("--defs", o.defs, "Extra definition corpus");
  plan->add_option("--force-order", o.force_order, "Comma-separated order to replay, e.g. D5,D8,D4");
  plan->add_option("--emit-matrix", o.emit_matrix, "Count matrix output (CSV)");
  plan->add_option("--out", o.out, "Plan (JSON)");
  plan->add_option("--at", o.at, "Start time (ISO-8601), needed with --store or --coupled");
  plan->add_flag("--coupled", o.coupled, "Accrue familiarity instead of idealized learning");
  plan->add_option("--session-minutes", o.session_minutes, "Coupled mode: minutes spent per document");
  plan->add_option("--spacing-hours", o.spacing_hours, "Coupled mode: hours between documents");
  plan->add_flag("--simple", o.simple, "Ignore state and method factors");
  add_store(plan);
  add_config_flags(plan, o.ov, {"threshold", "retention", "majority", "alpha"});

  auto* demo = app.add_subcommand("demo", "Run the built-in sample corpora");
  demo->add_option("--out-dir", o.out_dir, "Also write the fixtures here");
  add_config_flags(demo, o.ov, {"majority"});

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n\n", e.what());
    err << app.help();
    return kExitValidation;
  }

  Command cmd(o, out, err);
  try {
    if (*ingest) return cmd.ingest();
    if (*share) return cmd.share();
    if (*record) return cmd.record();
    if (*hist) return cmd.history();
    if (*fam) return cmd.familiarity();
    if (*build) return cmd.tree_build();
    if (*und) return cmd.understand();
    if (*rec) return cmd.recommend();
    if (*plan) return cmd.plan();
    if (*demo) return cmd.demo();
  } catch (const IoError& e) {
    fmt::print(err, "io error: {}\n", e.what());
    return kExitIo;
  } catch (const ValidationError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace ickem::cli
