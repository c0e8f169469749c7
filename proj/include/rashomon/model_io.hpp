#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "rashomon/model.hpp"

namespace rashomon {

/// Current model document version. Each document carries
///   {"format": "rashomon-model", "version": 1, "family": ..., "label": ...,
///    "feature_names": [...], "target_name": ..., "seed": ..., "fit": {...}}
/// with the family-specific "fit" object described in docs/formats.md.
inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const Model& model);
/// Throws ParseError on a malformed or unsupported document.
Model model_from_json(const nlohmann::json& doc);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace rashomon
