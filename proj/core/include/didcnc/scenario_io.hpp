#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "didcnc/model.hpp"

namespace didcnc {

// Scenario files are JSON documents; the schema lives in
// docs/scenario.schema.json. Unknown keys are rejected. Rational fields
// (scaling_factor, workload) also accept strings of the form "p/q".
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

std::string serialize_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Parses "3", "0.25" or "1/3".
double parse_rational(std::string_view text);

}  // namespace didcnc
