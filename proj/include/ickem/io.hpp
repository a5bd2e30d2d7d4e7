#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ickem/caiml.hpp"
#include "ickem/familiarity.hpp"
#include "ickem/history.hpp"
#include "ickem/ingest.hpp"
#include "ickem/textshare.hpp"
#include "ickem/tree.hpp"

// Readers and writers for the on-disk formats. Record files are JSON Lines
// (one object per line) or, where noted, a single JSON array of the same
// objects. Parse failures throw ValidationError naming the record; missing
// or unwritable files throw IoError.
namespace ickem::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// `{"ts": ISO-8601, "did": str, "kind": str, "page": int?}` per line.
std::vector<ingest::LearningEvent> parse_event_log(std::string_view text);
std::string encode_event_log(std::span<const ingest::LearningEvent> events);

std::string encode_sessions(std::span<const ingest::LearningSession> sessions);
std::vector<ingest::LearningSession> parse_sessions(std::string_view text);

/// `{"id", "name", "aliases": [...], "bkp": bool}` records.
textshare::KpDictionary parse_dictionary(std::string_view text);
std::string encode_dictionary(const textshare::KpDictionary& dict);

/// `{"subject", "text", "referenced": [...]?}` records. Without a curated
/// `referenced` list, references are extracted from `text` with `dict`.
std::vector<tree::Definition> parse_definitions(std::string_view text, const textshare::KpDictionary* dict);
std::string encode_definitions(std::span<const tree::Definition> defs);

/// `{"topics": [{term: p}], "coverage": [...], "top_m": n}`.
textshare::TopicModelOutput parse_topic_model(std::string_view text);

struct ShareRecord {
  std::string session_id;
  textshare::ShareVector shares;
  std::optional<double> pps;
  std::optional<double> lm;
  std::optional<history::LearningMethod> method;
};

std::vector<ShareRecord> parse_shares(std::string_view text);
std::string encode_share_record(const ShareRecord& rec);

/// `{"doc_id", "defines"?, "kp_refs": [...]}` or `{"doc_id", "defines"?, "text"}`.
/// Text documents need `dict`; their shares come from tf_share.
std::vector<caiml::DocumentProfile> parse_documents(std::string_view text, const textshare::KpDictionary* dict,
                                                    double alpha = textshare::kDefaultAlpha);
std::string encode_documents(std::span<const caiml::DocumentProfile> docs);

/// `{"kp", "siblings": [{"id", "c"}]}` records.
familiarity::SiblingCompensation parse_compensation(std::string_view text);

/// Count matrix as bare comma-separated integers, one row per line.
std::string encode_matrix_csv(const caiml::LearningPlan& plan);
std::vector<std::vector<std::size_t>> parse_matrix_csv(std::string_view text);

/// Nested export of the deduplicated tree. Shared nodes are expanded at
/// their first occurrence and referenced afterwards. F and PF are included
/// when `scores` is given.
std::string encode_tree(const tree::UnderstandingTree& tree, const std::map<KpId, double>* scores,
                        double threshold);

}  // namespace ickem::io
