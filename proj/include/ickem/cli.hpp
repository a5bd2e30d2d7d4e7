#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "ickem/common.hpp"
#include "ickem/familiarity.hpp"

namespace ickem::cli {

/// Per-profile constants. Loaded from `--config`, then overridden by
/// matching command-line flags.
struct ProfileConfig {
  double alpha = 0.4;
  double threshold = 100.0;
  familiarity::RetentionParams retention;
  Seconds merge_gap{1800};
  Seconds idle_timeout{300};
  Seconds poll_period{5};
  double pps_default = 1.0;
  double lm_default = 1.0;
  double majority = 0.5;
  std::string tie_break = "ascending-id";

  void validate() const;
  static ProfileConfig from_json(std::string_view text);
  std::string to_json() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs one `ickem` invocation; `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ickem::cli
