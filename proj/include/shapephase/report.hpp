#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "shapephase/dynamics.hpp"
#include "shapephase/reconstruction.hpp"

namespace shapephase {

inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::json phase_report_json(const PhaseReport& pr);

// Full run report: phase balance, conservation diagnostics, return candidates,
// provenance (config hash, tool version) and timing. Timing fields are the
// only non-deterministic content; strip_timing removes them for comparisons.
nlohmann::json run_report_json(const PhaseReport& pr, const Trajectory& tr,
                               const std::vector<ShapeReturn>& returns,
                               const std::string& scenario_hash,
                               double elapsed_seconds);

// Report for a plain simulation run (no phase section).
nlohmann::json simulate_report_json(const Trajectory& tr,
                                    const std::string& scenario_hash,
                                    double elapsed_seconds);

nlohmann::json strip_timing(nlohmann::json r);

std::string run_report_text(const nlohmann::json& r);

}  // namespace shapephase
