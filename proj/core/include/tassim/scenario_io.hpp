#pragma once

#include <stdexcept>
#include <string>

#include "tassim/engine.hpp"

namespace tassim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses a scenario file (JSON with fixed sections: schedule, sgcls, delays,
/// traffic, link, capacities, sim, streams). Parsing is strict: unknown keys
/// anywhere are an error. Durations are integer nanoseconds. The returned
/// scenario has been fully validated, including compiling the MAT tables for
/// the capacity pre-check.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<string>");

std::string scenario_to_json(const Scenario& scenario);

}  // namespace tassim
