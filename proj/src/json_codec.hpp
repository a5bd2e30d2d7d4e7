#pragma once

// Internal JSON helpers shared by io.cpp and cli.cpp.

#include <map>
#include <string_view>
#include <vector>

#include "ickem/tree.hpp"
#include "json.hpp"

namespace ickem::io::detail {

using ordered_json = nlohmann::ordered_json;

/// A parsed record and its 1-based line (or array index + 1).
struct Record {
  std::size_t line = 0;
  ordered_json value;
};

/// Accepts a JSON array of objects or JSON Lines; blank lines are skipped.
std::vector<Record> parse_records(std::string_view text, std::string_view what);

ordered_json tree_to_json(const tree::UnderstandingTree& tree, const std::map<KpId, double>* scores,
                          double threshold);

}  // namespace ickem::io::detail
