#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ickem {

using KpId = std::string;
using DocId = std::string;

using Seconds = std::chrono::seconds;
using TimePoint = std::chrono::sys_seconds;

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input or a violated precondition. The CLI maps it to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or store failure. The CLI maps it to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Parses an ISO-8601 timestamp into UTC with second resolution.
///
/// Accepted: `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS[.fff]]` (space also allowed
/// as separator), followed by `Z`, `±HH:MM`, `±HHMM` or nothing (read as UTC).
/// Fractional seconds are truncated.
TimePoint parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(TimePoint tp);

inline double to_minutes(Seconds s) { return static_cast<double>(s.count()) / 60.0; }

/// Natural ordering: runs of digits compare numerically, so "D9" < "D10".
bool natural_less(std::string_view a, std::string_view b);

struct NaturalLess {
  bool operator()(std::string_view a, std::string_view b) const { return natural_less(a, b); }
};

}  // namespace ickem
