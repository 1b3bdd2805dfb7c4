#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lgnav/sim.hpp"

namespace lgnav {

// Scenario JSON. Grid, feature and vocabulary paths are resolved relative to
// the scenario file. Throws ConfigError naming the file (and line, for
// syntax errors).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& source_name, const std::string& base_dir);

// Ordered JSON array of string arrays, one entry per expected query.
std::vector<std::vector<std::string>> load_feedback_script(const std::string& path);
std::vector<std::vector<std::string>> parse_feedback_script(const std::string& text, const std::string& source_name);

nlohmann::json to_json(const WorldPose& p);
nlohmann::json to_json(const CandidateWaypoint& c);
nlohmann::json to_json(const QueryRecord& q);

// Derived evaluation numbers attached to a report.
struct ReportMetrics {
  std::optional<double> rmse;                 // against scenario.reference_route
  std::optional<bool> triggered_as_intended;  // query count == scenario.expected_queries
  int spliced_waypoints = 0;
};

ReportMetrics evaluate(const MissionReport& report, const Scenario& scenario);

// MissionReport as JSON. Identical runs yield identical documents.
nlohmann::json report_to_json(const MissionReport& report, const ReportMetrics& metrics);
std::string report_to_string(const MissionReport& report, const ReportMetrics& metrics);

}  // namespace lgnav
