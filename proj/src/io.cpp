#include "ickem/io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json_codec.hpp"

namespace ickem::io {
namespace detail {

std::vector<Record> parse_records(std::string_view text, std::string_view what) {
  std::vector<Record> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return out;
  if (text[first] == '[') {
    ordered_json arr;
    try {
      arr = ordered_json::parse(text);
    } catch (const std::exception& e) {
      throw ValidationError(fmt::format("{}: invalid JSON: {}", what, e.what()));
    }
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back({i + 1, std::move(arr[i])});
  } else {
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = std::min(text.find('\n', pos), text.size());
      ++line_no;
      const std::string_view line = text.substr(pos, nl - pos);
      if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
        try {
          out.push_back({line_no, ordered_json::parse(line)});
        } catch (const std::exception& e) {
          throw ValidationError(fmt::format("{} line {}: invalid JSON: {}", what, line_no, e.what()));
        }
      }
      pos = nl + 1;
    }
  }
  for (const Record& r : out) {
    if (!r.value.is_object()) throw ValidationError(fmt::format("{} record {}: expected an object", what, r.line));
  }
  return out;
}

namespace {

void tree_node(const tree::UnderstandingTree& t, const KpId& kp, const std::map<KpId, double>* scores,
               double threshold, std::set<KpId>& emitted, ordered_json& out) {
  out["kp"] = kp;
  if (scores) {
    auto it = scores->find(kp);
    const double f = it == scores->end() ? 0.0 : it->second;
    out["F"] = f;
    out["PF"] = tree::percent_familiarity(f, threshold);
  }
  if (t.bkp_nodes.contains(kp)) out["bkp"] = true;
  if (!emitted.insert(kp).second) {
    out["ref"] = true;
    return;
  }
  const auto& kids = t.children_of(kp);
  if (kids.empty()) return;
  ordered_json arr = ordered_json::array();
  for (const KpId& c : kids) {
    ordered_json child;
    tree_node(t, c, scores, threshold, emitted, child);
    arr.push_back(std::move(child));
  }
  out["children"] = std::move(arr);
}

}  // namespace

ordered_json tree_to_json(const tree::UnderstandingTree& t, const std::map<KpId, double>* scores, double threshold) {
  ordered_json j;
  j["root"] = t.root;
  j["node_count"] = t.nodes.size();
  j["height"] = t.height();
  j["nodes"] = t.nodes;
  j["bkp_nodes"] = t.bkp_nodes;
  if (!t.undefined_leaves.empty()) j["undefined_leaves"] = t.undefined_leaves;
  if (!t.cycle_breaks.empty()) {
    ordered_json breaks = ordered_json::array();
    for (const auto& b : t.cycle_breaks) breaks.push_back({{"from", b.from}, {"to", b.to}});
    j["cycle_breaks"] = std::move(breaks);
  }
  std::set<KpId> emitted;
  ordered_json root;
  tree_node(t, t.root, scores, threshold, emitted, root);
  j["tree"] = std::move(root);
  return j;
}

}  // namespace detail

namespace {

using detail::ordered_json;
using detail::Record;

template <typename T>
T field(const Record& r, std::string_view what, const char* key) {
  try {
    return r.value.at(key).get<T>();
  } catch (const std::exception&) {
    throw ValidationError(fmt::format("{} record {}: missing or invalid field '{}'", what, r.line, key));
  }
}

template <typename T>
std::optional<T> optional_field(const Record& r, std::string_view what, const char* key) {
  if (!r.value.contains(key) || r.value.at(key).is_null()) return std::nullopt;
  return field<T>(r, what, key);
}

template <typename Fn>
auto with_context(const Record& r, std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{} record {}: {}", what, r.line, e.what()));
  }
}

ordered_json session_to_json(const ingest::LearningSession& s) {
  ordered_json j;
  j["session_id"] = s.id();
  j["did"] = s.did;
  j["start"] = format_iso8601(s.start);
  j["stop"] = format_iso8601(s.stop);
  j["duration_s"] = s.duration.count();
  j["duration_min"] = to_minutes(s.duration);
  ordered_json pages = ordered_json::array();
  for (const auto& p : s.pages) pages.push_back({{"page", p.page}, {"seconds", p.active.count()}});
  j["pages"] = std::move(pages);
  return j;
}

std::string jsonl(const std::vector<ordered_json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

std::vector<ingest::LearningEvent> parse_event_log(std::string_view text) {
  constexpr std::string_view what = "event log";
  std::vector<ingest::LearningEvent> events;
  for (const Record& r : detail::parse_records(text, what)) {
    ingest::LearningEvent ev;
    ev.timestamp = with_context(r, what, [&] { return parse_iso8601(field<std::string>(r, what, "ts")); });
    ev.did = field<std::string>(r, what, "did");
    const auto kind_name = field<std::string>(r, what, "kind");
    const auto kind = ingest::parse_event_kind(kind_name);
    if (!kind) throw ValidationError(fmt::format("{} record {}: unknown kind '{}'", what, r.line, kind_name));
    ev.kind = *kind;
    ev.page = optional_field<int>(r, what, "page");
    events.push_back(std::move(ev));
  }
  return events;
}

std::string encode_event_log(std::span<const ingest::LearningEvent> events) {
  std::vector<ordered_json> rows;
  for (const auto& ev : events) {
    ordered_json j;
    j["ts"] = format_iso8601(ev.timestamp);
    j["did"] = ev.did;
    j["kind"] = std::string(ingest::to_string(ev.kind));
    if (ev.page) j["page"] = *ev.page;
    rows.push_back(std::move(j));
  }
  return jsonl(rows);
}

std::string encode_sessions(std::span<const ingest::LearningSession> sessions) {
  std::vector<ordered_json> rows;
  for (const auto& s : sessions) rows.push_back(session_to_json(s));
  return jsonl(rows);
}

std::vector<ingest::LearningSession> parse_sessions(std::string_view text) {
  constexpr std::string_view what = "sessions";
  std::vector<ingest::LearningSession> out;
  for (const Record& r : detail::parse_records(text, what)) {
    ingest::LearningSession s;
    s.did = field<std::string>(r, what, "did");
    s.start = with_context(r, what, [&] { return parse_iso8601(field<std::string>(r, what, "start")); });
    s.stop = with_context(r, what, [&] { return parse_iso8601(field<std::string>(r, what, "stop")); });
    s.duration = Seconds{field<std::int64_t>(r, what, "duration_s")};
    if (r.value.contains("pages")) {
      for (const auto& p : r.value.at("pages")) {
        s.pages.push_back({p.at("page").get<int>(), Seconds{p.at("seconds").get<std::int64_t>()}});
      }
    }
    if (s.stop < s.start) throw ValidationError(fmt::format("{} record {}: stop precedes start", what, r.line));
    out.push_back(std::move(s));
  }
  return out;
}

textshare::KpDictionary parse_dictionary(std::string_view text) {
  constexpr std::string_view what = "dictionary";
  std::vector<textshare::KpEntry> entries;
  for (const Record& r : detail::parse_records(text, what)) {
    textshare::KpEntry e;
    e.id = field<std::string>(r, what, "id");
    e.name = optional_field<std::string>(r, what, "name").value_or(e.id);
    e.aliases = optional_field<std::vector<std::string>>(r, what, "aliases").value_or(std::vector<std::string>{});
    if (e.aliases.empty()) e.aliases.push_back(e.name);
    e.is_bkp = optional_field<bool>(r, what, "bkp").value_or(false);
    entries.push_back(std::move(e));
  }
  return textshare::KpDictionary(std::move(entries));
}

std::string encode_dictionary(const textshare::KpDictionary& dict) {
  std::vector<ordered_json> rows;
  for (const auto& [id, e] : dict.entries()) {
    rows.push_back({{"id", e.id}, {"name", e.name}, {"aliases", e.aliases}, {"bkp", e.is_bkp}});
  }
  return jsonl(rows);
}

std::vector<tree::Definition> parse_definitions(std::string_view text, const textshare::KpDictionary* dict) {
  constexpr std::string_view what = "definition corpus";
  std::vector<tree::Definition> out;
  for (const Record& r : detail::parse_records(text, what)) {
    const auto subject = field<std::string>(r, what, "subject");
    const auto body = optional_field<std::string>(r, what, "text").value_or("");
    if (auto refs = optional_field<std::vector<std::string>>(r, what, "referenced")) {
      tree::Definition d{subject, body, {refs->begin(), refs->end()}};
      d.referenced.erase(d.subject);
      out.push_back(std::move(d));
    } else {
      if (!dict) {
        throw ValidationError(
            fmt::format("{} record {}: no 'referenced' list and no dictionary to extract one", what, r.line));
      }
      out.push_back(tree::extract_definition(subject, body, *dict));
    }
  }
  return out;
}

std::string encode_definitions(std::span<const tree::Definition> defs) {
  std::vector<ordered_json> rows;
  for (const auto& d : defs) rows.push_back({{"subject", d.subject}, {"text", d.text}, {"referenced", d.referenced}});
  return jsonl(rows);
}

textshare::TopicModelOutput parse_topic_model(std::string_view text) {
  textshare::TopicModelOutput tm;
  try {
    const auto j = ordered_json::parse(text);
    for (const auto& topic : j.at("topics")) {
      std::map<std::string, double> dist;
      for (const auto& [term, p] : topic.items()) dist.emplace(term, p.get<double>());
      tm.topics.push_back(std::move(dist));
    }
    tm.coverage = j.at("coverage").get<std::vector<double>>();
    if (j.contains("top_m")) tm.top_m = j.at("top_m").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("topic model: {}", e.what()));
  }
  tm.validate();
  return tm;
}

std::vector<ShareRecord> parse_shares(std::string_view text) {
  constexpr std::string_view what = "shares";
  std::vector<ShareRecord> out;
  for (const Record& r : detail::parse_records(text, what)) {
    ShareRecord rec;
    rec.session_id = field<std::string>(r, what, "session_id");
    rec.shares = field<std::map<std::string, double>>(r, what, "shares");
    rec.pps = optional_field<double>(r, what, "pps");
    rec.lm = optional_field<double>(r, what, "lm");
    if (auto m = optional_field<std::string>(r, what, "method")) {
      rec.method = history::parse_method(*m);
      if (!rec.method) throw ValidationError(fmt::format("{} record {}: unknown method '{}'", what, r.line, *m));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string encode_share_record(const ShareRecord& rec) {
  ordered_json j;
  j["session_id"] = rec.session_id;
  j["shares"] = rec.shares;
  if (rec.pps) j["pps"] = *rec.pps;
  if (rec.lm) j["lm"] = *rec.lm;
  if (rec.method) j["method"] = std::string(history::to_string(*rec.method));
  return j.dump() + "\n";
}

std::vector<caiml::DocumentProfile> parse_documents(std::string_view text, const textshare::KpDictionary* dict,
                                                    double alpha) {
  constexpr std::string_view what = "document manifest";
  std::vector<caiml::DocumentProfile> out;
  for (const Record& r : detail::parse_records(text, what)) {
    const auto id = field<std::string>(r, what, "doc_id");
    const auto defines = optional_field<std::string>(r, what, "defines");
    caiml::DocumentProfile doc;
    if (auto refs = optional_field<std::vector<std::string>>(r, what, "kp_refs")) {
      doc = caiml::profile_from_refs(id, *refs, defines);
    } else if (auto body = optional_field<std::string>(r, what, "text")) {
      if (!dict) throw ValidationError(fmt::format("{} record {}: text documents need a dictionary", what, r.line));
      doc = {id, textshare::tf_share(textshare::count_terms(*body, *dict), alpha), defines};
    } else {
      throw ValidationError(fmt::format("{} record {}: needs 'kp_refs' or 'text'", what, r.line));
    }
    with_context(r, what, [&] {
      doc.validate();
      return 0;
    });
    out.push_back(std::move(doc));
  }
  return out;
}

std::string encode_documents(std::span<const caiml::DocumentProfile> docs) {
  std::vector<ordered_json> rows;
  for (const auto& d : docs) {
    ordered_json j;
    j["doc_id"] = d.id;
    if (d.defines) j["defines"] = *d.defines;
    j["kp_refs"] = d.referenced();
    rows.push_back(std::move(j));
  }
  return jsonl(rows);
}

familiarity::SiblingCompensation parse_compensation(std::string_view text) {
  constexpr std::string_view what = "compensation";
  familiarity::SiblingCompensation comp;
  for (const Record& r : detail::parse_records(text, what)) {
    const auto kp = field<std::string>(r, what, "kp");
    auto& siblings = comp[kp];
    try {
      for (const auto& s : r.value.at("siblings")) siblings.push_back({s.at("id").get<std::string>(), s.at("c").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(fmt::format("{} record {}: {}", what, r.line, e.what()));
    }
  }
  familiarity::validate(comp);
  return comp;
}

std::string encode_matrix_csv(const caiml::LearningPlan& plan) {
  std::string out;
  for (const auto& row : plan.matrix) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::size_t>> parse_matrix_csv(std::string_view text) {
  std::vector<std::vector<std::size_t>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::size_t> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(std::stoul(cell));
      } catch (const std::exception&) {
        throw ValidationError(fmt::format("matrix: bad cell '{}'", cell));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string encode_tree(const tree::UnderstandingTree& t, const std::map<KpId, double>* scores, double threshold) {
  return detail::tree_to_json(t, scores, threshold).dump(2) + "\n";
}

}  // namespace ickem::io
