#include "ickem/history.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

#include <fcntl.h>
#include <unistd.h>

#include <fmt/format.h>

#include "json.hpp"

namespace ickem::history {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::pair<LearningMethod, std::string_view>, 4> kMethodNames{{
    {LearningMethod::Read, "read"},
    {LearningMethod::Listen, "listen"},
    {LearningMethod::Discuss, "discuss"},
    {LearningMethod::Write, "write"},
}};

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

class FileLog final : public AppendLog {
 public:
  explicit FileLog(std::filesystem::path path) : path_(std::move(path)) {}

  std::string read_all() const override {
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec)) return {};
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read store '{}'", path_.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::uint64_t size() const override {
    std::error_code ec;
    const auto n = std::filesystem::file_size(path_, ec);
    return ec ? 0 : n;
  }

  void append(std::string_view bytes) override {
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0600);
    if (fd < 0) throw IoError(fmt::format("cannot open store '{}': {}", path_.string(), std::strerror(errno)));
    std::size_t written = 0;
    while (written < bytes.size()) {
      const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        const int err = errno;
        ::close(fd);
        throw IoError(fmt::format("write to store '{}' failed: {}", path_.string(), std::strerror(err)));
      }
      written += static_cast<std::size_t>(n);
    }
    const bool synced = ::fsync(fd) == 0;
    const int err = errno;
    ::close(fd);
    if (!synced) throw IoError(fmt::format("fsync of store '{}' failed: {}", path_.string(), std::strerror(err)));
  }

  void truncate(std::uint64_t size) override {
    std::error_code ec;
    std::filesystem::resize_file(path_, size, ec);
    if (ec) throw IoError(fmt::format("cannot roll back store '{}': {}", path_.string(), ec.message()));
  }

 private:
  std::filesystem::path path_;
};

class MemoryLog final : public AppendLog {
 public:
  explicit MemoryLog(std::string initial) : bytes_(std::move(initial)) {}
  std::string read_all() const override { return bytes_; }
  std::uint64_t size() const override { return bytes_.size(); }
  void append(std::string_view bytes) override { bytes_.append(bytes); }
  void truncate(std::uint64_t size) override { bytes_.resize(size); }

 private:
  std::string bytes_;
};

std::pair<KpId, LearningExperience> decode_record(std::string_view line) {
  const auto j = ordered_json::parse(line);
  LearningExperience e;
  KpId kp = j.at("kp").get<std::string>();
  e.lct = parse_iso8601(j.at("lct").get<std::string>());
  e.duration = Seconds{j.at("duration_s").get<std::int64_t>()};
  e.proportion = j.at("proportion").get<double>();
  e.pps_factor = j.at("pps").get<double>();
  e.lm_factor = j.at("lm").get<double>();
  const auto method = parse_method(j.at("method").get<std::string>());
  if (!method) throw ValidationError("unknown learning method");
  e.method = *method;
  e.session_id = j.at("session_id").get<std::string>();
  if (kp.empty()) throw ValidationError("empty kp");
  e.validate();
  return {std::move(kp), std::move(e)};
}

}  // namespace

std::string_view to_string(LearningMethod m) {
  for (const auto& [k, name] : kMethodNames) {
    if (k == m) return name;
  }
  return "read";
}

std::optional<LearningMethod> parse_method(std::string_view name) {
  for (const auto& [k, n] : kMethodNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

void LearningExperience::validate() const {
  if (duration <= Seconds{0}) throw ValidationError("experience duration must be positive");
  if (!(proportion > 0.0 && proportion <= 1.0)) throw ValidationError("experience proportion must lie in (0, 1]");
  if (!in_unit(pps_factor)) throw ValidationError("pps factor must lie in [0, 1]");
  if (!in_unit(lm_factor)) throw ValidationError("lm factor must lie in [0, 1]");
}

CorruptRecord::CorruptRecord(std::uint64_t offset, const std::string& what)
    : IoError(fmt::format("corrupt history record at byte offset {}: {}", offset, what)), offset_(offset) {}

std::unique_ptr<AppendLog> file_log(std::filesystem::path path) { return std::make_unique<FileLog>(std::move(path)); }

std::unique_ptr<AppendLog> memory_log(std::string initial) { return std::make_unique<MemoryLog>(std::move(initial)); }

std::string encode_record(const KpId& kp, const LearningExperience& e) {
  ordered_json j;
  j["kp"] = kp;
  j["lct"] = format_iso8601(e.lct);
  j["duration_s"] = e.duration.count();
  j["proportion"] = e.proportion;
  j["pps"] = e.pps_factor;
  j["lm"] = e.lm_factor;
  j["method"] = std::string(to_string(e.method));
  j["session_id"] = e.session_id;
  return j.dump();
}

HistoryStore::HistoryStore(std::unique_ptr<AppendLog> log) : log_(std::move(log)) { replay(); }

HistoryStore HistoryStore::open(const std::filesystem::path& path) { return HistoryStore(file_log(path)); }

HistoryStore HistoryStore::in_memory() { return HistoryStore(memory_log()); }

void HistoryStore::replay() {
  const std::string bytes = log_->read_all();
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw CorruptRecord(pos, "truncated record (missing newline)");
    const std::string_view line(bytes.data() + pos, nl - pos);
    try {
      auto [kp, e] = decode_record(line);
      sessions_.insert(e.session_id);
      index_[kp].push_back(std::move(e));
      ++record_count_;
    } catch (const std::exception& ex) {
      throw CorruptRecord(pos, ex.what());
    }
    pos = nl + 1;
  }
}

std::size_t HistoryStore::record_session(const ingest::LearningSession& session,
                                         const textshare::ShareVector& shares, double pps, double lm,
                                         LearningMethod method) {
  const std::string sid = session.id();
  if (sessions_.contains(sid)) throw DuplicateSession(fmt::format("session '{}' already recorded", sid));

  std::vector<std::pair<KpId, LearningExperience>> batch;
  std::string buffer;
  for (const auto& [kp, share] : shares) {
    if (!(share > 0.0)) continue;
    LearningExperience e{session.stop, session.duration, share, pps, lm, method, sid};
    e.validate();
    buffer += encode_record(kp, e);
    buffer += '\n';
    batch.emplace_back(kp, std::move(e));
  }
  if (batch.empty()) return 0;

  const std::uint64_t before = log_->size();
  try {
    log_->append(buffer);
  } catch (...) {
    try {
      log_->truncate(before);
    } catch (...) {
    }
    throw;
  }

  sessions_.insert(sid);
  for (auto& [kp, e] : batch) index_[kp].push_back(std::move(e));
  record_count_ += batch.size();
  return batch.size();
}

LearningHistory HistoryStore::load_history(const KpId& kp) const {
  LearningHistory h{kp, {}};
  if (auto it = index_.find(kp); it != index_.end()) h.experiences = it->second;
  std::stable_sort(h.experiences.begin(), h.experiences.end(),
                   [](const LearningExperience& a, const LearningExperience& b) { return a.lct < b.lct; });
  return h;
}

std::vector<KpId> HistoryStore::kps() const {
  std::vector<KpId> out;
  out.reserve(index_.size());
  for (const auto& [kp, _] : index_) out.push_back(kp);
  return out;
}

bool HistoryStore::has_session(std::string_view session_id) const { return sessions_.contains(session_id); }

}  // namespace ickem::history
