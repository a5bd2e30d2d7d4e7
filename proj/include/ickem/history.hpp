#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ickem/common.hpp"
#include "ickem/ingest.hpp"
#include "ickem/textshare.hpp"

namespace ickem::history {

enum class LearningMethod { Read, Listen, Discuss, Write };

std::string_view to_string(LearningMethod m);
std::optional<LearningMethod> parse_method(std::string_view name);

/// One row of a Knowledge Point's learning history.
struct LearningExperience {
  TimePoint lct;  // learning cessation time
  Seconds duration{0};
  double proportion = 0.0;
  double pps_factor = 1.0;
  double lm_factor = 1.0;
  LearningMethod method = LearningMethod::Read;
  std::string session_id;

  void validate() const;
  bool operator==(const LearningExperience&) const = default;
};

struct LearningHistory {
  KpId kp;
  std::vector<LearningExperience> experiences;  // ordered by lct
};

/// A record failed to parse; `offset` is the byte offset of its line.
class CorruptRecord : public IoError {
 public:
  CorruptRecord(std::uint64_t offset, const std::string& what);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class DuplicateSession : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Byte-level persistence behind the store. `append` either writes the whole
/// buffer or throws; `truncate` rolls a failed append back.
class AppendLog {
 public:
  virtual ~AppendLog() = default;
  virtual std::string read_all() const = 0;
  virtual std::uint64_t size() const = 0;
  virtual void append(std::string_view bytes) = 0;
  virtual void truncate(std::uint64_t size) = 0;
};

std::unique_ptr<AppendLog> file_log(std::filesystem::path path);
std::unique_ptr<AppendLog> memory_log(std::string initial = {});

/// Single-line JSON encoding of one stored experience.
std::string encode_record(const KpId& kp, const LearningExperience& e);

/// Append-only learning history of every KP of one profile.
///
/// All records live in one log keyed by KP id; the per-KP index is rebuilt
/// when the store is opened, so a store reflects the log as of open time
/// plus its own appends. One writer per store.
class HistoryStore {
 public:
  explicit HistoryStore(std::unique_ptr<AppendLog> log);

  static HistoryStore open(const std::filesystem::path& path);
  static HistoryStore in_memory();

  /// Appends one experience (lct = stop, d = duration) to every KP with a
  /// positive share. The whole batch is written at once or not at all.
  std::size_t record_session(const ingest::LearningSession& session, const textshare::ShareVector& shares,
                             double pps = 1.0, double lm = 1.0,
                             LearningMethod method = LearningMethod::Read);

  LearningHistory load_history(const KpId& kp) const;
  std::vector<KpId> kps() const;
  bool has_session(std::string_view session_id) const;
  std::size_t record_count() const { return record_count_; }

  /// Raw log bytes, for audits and byte-level comparisons.
  std::string dump() const { return log_->read_all(); }

 private:
  void replay();

  std::unique_ptr<AppendLog> log_;
  std::map<KpId, std::vector<LearningExperience>> index_;
  std::set<std::string, std::less<>> sessions_;
  std::size_t record_count_ = 0;
};

}  // namespace ickem::history
