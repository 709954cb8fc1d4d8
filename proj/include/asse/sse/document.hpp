#pragma once

#include <string>

#include <json.hpp>

#include "asse/sse/tree.hpp"
#include "asse/uncertainty/marginal.hpp"

namespace asse::sse {

inline constexpr const char* kDocumentFormat = "asse-surrogate";
inline constexpr int kDocumentVersion = 1;

nlohmann::json marginal_to_json(const uncertainty::MarginalDistribution& m);
uncertainty::MarginalDistribution marginal_from_json(const nlohmann::json& j);

/// Self-contained description of a fitted tree: node geometry, expansions and
/// the input marginals. Training data is not stored.
nlohmann::json to_document(const SseTree& tree);
/// Throws UnsupportedError for an unknown format or version and ParseError for
/// structurally invalid documents.
SseTree from_document(const nlohmann::json& doc);

}  // namespace asse::sse
