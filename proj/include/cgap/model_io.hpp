#pragma once

#include "cgap/models.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace cgap {

// Model-spec files are JSON objects:
//   {"variant": "disordered_exclusion", "n": 3, "p": [..], "omega": 1}
//   {"variant": "colored_exclusion", "n": 6, "p": [..], "m": 2, "gamma": 1, "omega": [2, 2]}
//   {"variant": "biased_permutations", "n": 4, "b": [[..], ..]}     (b optional, zero bias)
//   {"variant": "kac_sphere", "n": 4, "radius_sq": 1.0}
//   {"variant": "flat_kac", "n": 3, "mass": 1.0}
// Fields that do not belong to the variant are rejected.

ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json model_spec_to_json(const ModelSpec& spec);

/// Parse errors carry line and column of the offending token.
ModelSpec parse_model_spec(const std::string& text);
ModelSpec load_model_spec(const std::filesystem::path& path);

}  // namespace cgap
