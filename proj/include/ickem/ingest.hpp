#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ickem/common.hpp"

namespace ickem::ingest {

/// Reader activity recorded by the desktop logger.
///
/// DocOpened, ForegroundToDoc and IdleResume start a learning session;
/// DocClosed, ForegroundFromDoc and IdleStart stop it.
enum class EventKind {
  DocOpened,
  DocClosed,
  ForegroundToDoc,
  ForegroundFromDoc,
  IdleStart,
  IdleResume,
  PageSwitch,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

bool starts_session(EventKind kind);
bool stops_session(EventKind kind);

struct LearningEvent {
  TimePoint timestamp;
  DocId did;
  EventKind kind = EventKind::PageSwitch;
  std::optional<int> page;
};

struct PageDwell {
  int page = 0;
  Seconds active{0};

  bool operator==(const PageDwell&) const = default;
};

struct LearningSession {
  DocId did;
  TimePoint start;
  TimePoint stop;
  std::vector<PageDwell> pages;  // first-visit order
  Seconds duration{0};

  /// Stable identifier, `<did>@<start ISO-8601>`; survives merging.
  std::string id() const;

  bool operator==(const LearningSession&) const = default;
};

struct IngestConfig {
  Seconds poll_period{5};
  Seconds idle_timeout{300};
  Seconds merge_gap{1800};

  void validate() const;
};

struct IngestWarning {
  std::size_t position = 0;  // index of the offending event
  std::string message;
};

struct SegmentResult {
  std::vector<LearningSession> sessions;
  std::vector<IngestWarning> warnings;
};

/// Rejects out-of-order timestamps and malformed page fields. The message
/// names the index of the first violation.
void validate_events(std::span<const LearningEvent> events);

/// Event-driven reduction of the reader's session state machine.
///
/// At most one document holds the foreground, so a start event for another
/// document implicitly stops the active session. IdleStart is stamped at
/// detection time; the session is closed `idle_timeout` earlier, but never
/// before the last in-session activity. Sessions shorter than the poll period
/// are dropped.
SegmentResult segment_sessions(std::span<const LearningEvent> events, const IngestConfig& cfg);

/// Coalesces adjacent same-document sessions whose gap is strictly below
/// `merge_gap`. Gap time is not credited to the merged duration.
std::vector<LearningSession> merge_sessions(std::span<const LearningSession> sessions,
                                            Seconds merge_gap);

}  // namespace ickem::ingest
