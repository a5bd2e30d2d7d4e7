#include "ickem/ingest.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <utility>

#include <fmt/format.h>

namespace ickem::ingest {
namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 7> kKindNames{{
    {EventKind::DocOpened, "DocOpened"},
    {EventKind::DocClosed, "DocClosed"},
    {EventKind::ForegroundToDoc, "ForegroundToDoc"},
    {EventKind::ForegroundFromDoc, "ForegroundFromDoc"},
    {EventKind::IdleStart, "IdleStart"},
    {EventKind::IdleResume, "IdleResume"},
    {EventKind::PageSwitch, "PageSwitch"},
}};

void add_dwell(std::vector<PageDwell>& pages, int page, Seconds seconds) {
  auto it = std::find_if(pages.begin(), pages.end(), [&](const PageDwell& p) { return p.page == page; });
  if (it == pages.end()) {
    pages.push_back({page, seconds});
  } else {
    it->active += seconds;
  }
}

class SessionMachine {
 public:
  explicit SessionMachine(const IngestConfig& cfg) : cfg_(cfg) {}

  void feed(std::size_t position, const LearningEvent& ev) {
    last_ts_ = ev.timestamp;
    if (starts_session(ev.kind)) {
      on_start(position, ev);
    } else if (stops_session(ev.kind)) {
      on_stop(position, ev);
    } else {
      on_page(ev);
    }
  }

  SegmentResult finish() {
    if (active_) {
      warn(last_position_, fmt::format("session on '{}' still active at end of log; closed at last event",
                                       active_->did));
      close(last_ts_);
    }
    return std::move(result_);
  }

  void set_position(std::size_t p) { last_position_ = p; }

 private:
  struct Active {
    DocId did;
    TimePoint start;
    TimePoint last_activity;
    std::optional<int> page;
    TimePoint page_since;
    std::vector<PageDwell> pages;
  };

  void on_start(std::size_t position, const LearningEvent& ev) {
    if (ev.kind == EventKind::DocOpened && open_.contains(ev.did)) {
      warn(position, fmt::format("document '{}' opened twice", ev.did));
    }
    open_.insert(ev.did);
    if (ev.page) last_page_[ev.did] = *ev.page;

    if (active_ && active_->did == ev.did) {
      if (ev.page) switch_page(*ev.page, ev.timestamp);
      return;
    }
    if (active_) close(ev.timestamp);

    Active a{ev.did, ev.timestamp, ev.timestamp, std::nullopt, ev.timestamp, {}};
    if (auto it = last_page_.find(ev.did); it != last_page_.end()) {
      a.page = it->second;
      a.pages.push_back({it->second, Seconds{0}});
    }
    active_ = std::move(a);
  }

  void on_stop(std::size_t position, const LearningEvent& ev) {
    if (ev.kind == EventKind::DocClosed) {
      if (!open_.contains(ev.did)) {
        warn(position, fmt::format("close of '{}' without open; dropped", ev.did));
        return;
      }
      open_.erase(ev.did);
    }
    if (!active_ || active_->did != ev.did) {
      if (ev.kind != EventKind::DocClosed) {
        warn(position, fmt::format("{} for '{}' without an active session; dropped",
                                   to_string(ev.kind), ev.did));
      }
      return;
    }
    TimePoint stop = ev.timestamp;
    if (ev.kind == EventKind::IdleStart) {
      stop = std::max(active_->last_activity, ev.timestamp - cfg_.idle_timeout);
    }
    close(stop);
  }

  void on_page(const LearningEvent& ev) {
    last_page_[ev.did] = *ev.page;
    if (active_ && active_->did == ev.did) switch_page(*ev.page, ev.timestamp);
  }

  void switch_page(int page, TimePoint at) {
    Active& a = *active_;
    if (a.page) add_dwell(a.pages, *a.page, at - a.page_since);
    a.page = page;
    a.page_since = at;
    a.last_activity = at;
    add_dwell(a.pages, page, Seconds{0});
  }

  void close(TimePoint stop) {
    Active a = std::move(*active_);
    active_.reset();
    if (a.page) add_dwell(a.pages, *a.page, stop - a.page_since);
    const Seconds duration = stop - a.start;
    if (duration < cfg_.poll_period) return;
    result_.sessions.push_back({a.did, a.start, stop, std::move(a.pages), duration});
  }

  void warn(std::size_t position, std::string message) {
    result_.warnings.push_back({position, std::move(message)});
  }

  const IngestConfig& cfg_;
  std::optional<Active> active_;
  std::set<DocId> open_;
  std::map<DocId, int> last_page_;
  TimePoint last_ts_{};
  std::size_t last_position_ = 0;
  SegmentResult result_;
};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool starts_session(EventKind kind) {
  return kind == EventKind::DocOpened || kind == EventKind::ForegroundToDoc || kind == EventKind::IdleResume;
}

bool stops_session(EventKind kind) {
  return kind == EventKind::DocClosed || kind == EventKind::ForegroundFromDoc || kind == EventKind::IdleStart;
}

std::string LearningSession::id() const { return did + "@" + format_iso8601(start); }

void IngestConfig::validate() const {
  if (poll_period <= Seconds{0}) throw ValidationError("poll_period must be positive");
  if (idle_timeout <= Seconds{0}) throw ValidationError("idle_timeout must be positive");
  if (merge_gap <= Seconds{0}) throw ValidationError("merge_gap must be positive");
}

void validate_events(std::span<const LearningEvent> events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const LearningEvent& ev = events[i];
    if (i > 0 && ev.timestamp < events[i - 1].timestamp) {
      throw ValidationError(fmt::format("event {}: timestamp {} precedes previous event {}", i,
                                        format_iso8601(ev.timestamp), format_iso8601(events[i - 1].timestamp)));
    }
    if (ev.did.empty()) throw ValidationError(fmt::format("event {}: empty did", i));
    if (ev.kind == EventKind::PageSwitch && !ev.page) {
      throw ValidationError(fmt::format("event {}: PageSwitch requires a page", i));
    }
    if (stops_session(ev.kind) && ev.page) {
      throw ValidationError(fmt::format("event {}: {} must not carry a page", i, to_string(ev.kind)));
    }
    if (ev.page && *ev.page < 1) throw ValidationError(fmt::format("event {}: page must be >= 1", i));
  }
}

SegmentResult segment_sessions(std::span<const LearningEvent> events, const IngestConfig& cfg) {
  cfg.validate();
  validate_events(events);
  SessionMachine machine(cfg);
  for (std::size_t i = 0; i < events.size(); ++i) {
    machine.set_position(i);
    machine.feed(i, events[i]);
  }
  return machine.finish();
}

std::vector<LearningSession> merge_sessions(std::span<const LearningSession> sessions, Seconds merge_gap) {
  std::vector<LearningSession> out;
  out.reserve(sessions.size());
  for (const LearningSession& s : sessions) {
    if (!out.empty()) {
      LearningSession& prev = out.back();
      if (prev.did == s.did && s.start - prev.stop < merge_gap) {
        prev.stop = std::max(prev.stop, s.stop);
        prev.duration += s.duration;
        for (const PageDwell& p : s.pages) add_dwell(prev.pages, p.page, p.active);
        continue;
      }
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace ickem::ingest
