#include "rfd/params.hpp"

#include <charconv>
#include <string>

#include "rfd/errors.hpp"

namespace rfd {

namespace {

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [end, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || end != last)
    throw InfeasibleParams("cannot parse " + std::string(key) + "='" + std::string(text) + "'");
  return value;
}

ErosionLaw parse_law(std::string_view text) {
  if (text == "graded") return ErosionLaw::graded;
  if (text == "gradient") return ErosionLaw::gradient;
  throw InfeasibleParams("erosionLaw must be graded or gradient, got '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(ErosionLaw law) { return law == ErosionLaw::graded ? "graded" : "gradient"; }

bool set_param(RfdParams& p, std::string_view key, std::string_view v) {
  if (key == "erosionLaw") p.erosion_law = parse_law(v);
  else if (key == "initialAltitude") p.initial_altitude = parse_value<double>(key, v);
  else if (key == "erosionRate") p.erosion_rate = parse_value<double>(key, v);
  else if (key == "flatWeight") p.flat_weight = parse_value<double>(key, v);
  else if (key == "depositRate") p.deposit_rate = parse_value<double>(key, v);
  else if (key == "dropsPerIteration") p.drops_per_iteration = parse_value<std::size_t>(key, v);
  else if (key == "maxSteps") p.max_steps = parse_value<std::size_t>(key, v);
  else if (key == "maxIterations") p.max_iterations = parse_value<std::size_t>(key, v);
  else if (key == "stablePathIterations") p.stable_path_iterations = parse_value<std::size_t>(key, v);
  else if (key == "minAltitude") p.min_altitude = parse_value<double>(key, v);
  else if (key == "flatTolerance") p.flat_tolerance = parse_value<double>(key, v);
  else if (key == "seed") p.seed = parse_value<std::uint64_t>(key, v);
  else if (key == "workers") p.workers = parse_value<std::size_t>(key, v);
  else return false;
  return true;
}

bool set_param(AcoParams& p, std::string_view key, std::string_view v) {
  if (key == "ants") p.ants = parse_value<std::size_t>(key, v);
  else if (key == "alpha") p.alpha = parse_value<double>(key, v);
  else if (key == "beta") p.beta = parse_value<double>(key, v);
  else if (key == "evaporation") p.evaporation = parse_value<double>(key, v);
  else if (key == "depositQ") p.deposit_q = parse_value<double>(key, v);
  else if (key == "initialPheromone") p.initial_pheromone = parse_value<double>(key, v);
  else if (key == "maxSteps") p.max_steps = parse_value<std::size_t>(key, v);
  else if (key == "maxIterations") p.max_iterations = parse_value<std::size_t>(key, v);
  else if (key == "stableIterations") p.stable_iterations = parse_value<std::size_t>(key, v);
  else if (key == "seed") p.seed = parse_value<std::uint64_t>(key, v);
  else if (key == "workers") p.workers = parse_value<std::size_t>(key, v);
  else return false;
  return true;
}

bool set_param(WalkParams& p, std::string_view key, std::string_view v) {
  if (key == "walkers") p.walkers = parse_value<std::size_t>(key, v);
  else if (key == "maxSteps") p.max_steps = parse_value<std::size_t>(key, v);
  else if (key == "seed") p.seed = parse_value<std::uint64_t>(key, v);
  else if (key == "workers") p.workers = parse_value<std::size_t>(key, v);
  else return false;
  return true;
}

nlohmann::json to_json(const RfdParams& p) {
  return {{"erosionLaw", to_string(p.erosion_law)},
          {"initialAltitude", p.initial_altitude},
          {"erosionRate", p.erosion_rate},
          {"flatWeight", p.flat_weight},
          {"depositRate", p.deposit_rate},
          {"dropsPerIteration", p.drops_per_iteration},
          {"maxSteps", p.max_steps},
          {"maxIterations", p.max_iterations},
          {"stablePathIterations", p.stable_path_iterations},
          {"minAltitude", p.min_altitude},
          {"flatTolerance", p.flat_tolerance},
          {"seed", p.seed},
          {"workers", p.workers}};
}

nlohmann::json to_json(const AcoParams& p) {
  return {{"ants", p.ants},
          {"alpha", p.alpha},
          {"beta", p.beta},
          {"evaporation", p.evaporation},
          {"depositQ", p.deposit_q},
          {"initialPheromone", p.initial_pheromone},
          {"maxSteps", p.max_steps},
          {"maxIterations", p.max_iterations},
          {"stableIterations", p.stable_iterations},
          {"seed", p.seed},
          {"workers", p.workers}};
}

nlohmann::json to_json(const WalkParams& p) {
  return {{"walkers", p.walkers}, {"maxSteps", p.max_steps}, {"seed", p.seed}, {"workers", p.workers}};
}

template <typename Params>
void apply_json(Params& p, const nlohmann::json& obj, std::string_view block) {
  if (!obj.is_object()) throw ParseError(std::string(block) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    std::string text;
    if (value.is_string())
      text = value.template get<std::string>();
    else if (value.is_number_integer() || value.is_number_unsigned() || value.is_number_float())
      text = value.dump();
    else
      throw ParseError(std::string(block) + "." + key + " must be a number or string");
    if (!set_param(p, key, text)) throw ParseError("unknown setting " + std::string(block) + "." + key);
  }
}

template void apply_json(RfdParams&, const nlohmann::json&, std::string_view);
template void apply_json(AcoParams&, const nlohmann::json&, std::string_view);
template void apply_json(WalkParams&, const nlohmann::json&, std::string_view);

}  // namespace rfd
