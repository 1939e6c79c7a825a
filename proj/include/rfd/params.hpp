#pragma once

#include <string_view>

#include <json.hpp>

#include "rfd/baselines.hpp"
#include "rfd/river.hpp"

namespace rfd {

// Named settings for the solver parameter blocks. Keys are the camelCase names
// used in scenario files and on the command line (e.g. "erosionRate").
// set_param returns false for an unknown key and throws InfeasibleParams when
// the value does not parse.

bool set_param(RfdParams& p, std::string_view key, std::string_view value);
bool set_param(AcoParams& p, std::string_view key, std::string_view value);
bool set_param(WalkParams& p, std::string_view key, std::string_view value);

nlohmann::json to_json(const RfdParams& p);
nlohmann::json to_json(const AcoParams& p);
nlohmann::json to_json(const WalkParams& p);

/// Applies every member of a JSON object through set_param. Throws ParseError
/// on an unknown key or a non-scalar value.
template <typename Params>
void apply_json(Params& p, const nlohmann::json& obj, std::string_view block);

std::string_view to_string(ErosionLaw law);

}  // namespace rfd
