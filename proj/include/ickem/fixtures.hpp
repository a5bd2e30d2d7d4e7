#pragma once

#include <set>
#include <string>
#include <vector>

#include "ickem/caiml.hpp"
#include "ickem/common.hpp"
#include "ickem/textshare.hpp"
#include "ickem/tree.hpp"

// Built-in sample corpora: eight short probability-theory definitions with
// curated KP lists, and three definitions of the Central Limit Theorem.
namespace ickem::fixtures {

struct SampleDocument {
  DocId id;
  KpId defines;
  std::string text;
  std::vector<KpId> kps;  // curated, includes `defines`
};

const std::vector<SampleDocument>& probability_documents();

/// Profiles with uniform shares over each document's curated KPs.
std::vector<caiml::DocumentProfile> probability_profiles();

/// Dictionary covering every KP of the probability corpus; KPs without a
/// defining document are flagged as BKPs.
textshare::KpDictionary probability_dictionary();

/// KPs of the probability corpus that no document defines.
std::set<KpId> probability_bkps();

/// The learning order used in the worked CAIML example.
std::vector<DocId> worked_example_order();

struct CltDefinition {
  std::string text;
  std::vector<KpId> kps;  // curated, excluding the subject
};

inline const KpId kClt = "CLT";

const std::vector<CltDefinition>& clt_sources();

/// Definitions of CLT with the curated reference lists.
std::vector<tree::Definition> clt_definitions();

/// Dictionary whose alias matcher reproduces the curated CLT lists.
textshare::KpDictionary clt_dictionary();

}  // namespace ickem::fixtures
