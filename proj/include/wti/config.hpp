#pragma once

#include <string>

#include "wti/simulator.hpp"

namespace wti::config {

// Named presets: "sim-full-scale" (Vestas V100, d_ref 7 m) and
// "lab-small-scale" (single blade scaled 1/10, 1/10, 1/15; d_ref 0.5 m,
// margin 0.1 m).
sim::ScenarioConfig preset(const std::string& name);

// Strict JSON load over a base configuration: unknown keys are rejected,
// absent keys keep the base value.
sim::ScenarioConfig load_config(const std::string& path, const sim::ScenarioConfig& base);
sim::ScenarioConfig parse_config(const std::string& text, const sim::ScenarioConfig& base);

// Effective-config echo; reloading reproduces the configuration exactly.
void save_config(const sim::ScenarioConfig& config, const std::string& path);
std::string dump_config(const sim::ScenarioConfig& config);

}  // namespace wti::config
