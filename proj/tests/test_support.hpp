#pragma once

#include <string>

#include "lgnav/io.hpp"
#include "lgnav/sim.hpp"

namespace test_support {

inline std::string scenario_path(const std::string& name) { return std::string(LGNAV_SCENARIO_DIR) + "/" + name; }

inline lgnav::Scenario bundled(const std::string& name) { return lgnav::load_scenario(scenario_path(name + ".json")); }

inline std::vector<std::vector<std::string>> bundled_feedback(const std::string& name) {
  return lgnav::load_feedback_script(scenario_path(name + ".feedback.json"));
}

// Minimal scenario without semantic data: one-dimensional zero features and
// an empty vocabulary.
inline lgnav::Scenario plain_scenario(const lgnav::OccupancyGrid& grid, lgnav::WorldPose start,
                                      std::vector<lgnav::WorldPose> waypoints) {
  lgnav::Scenario s;
  s.name = "plain";
  s.true_grid = grid;
  s.prior_grid = grid;
  s.feature_grid = lgnav::FeatureGrid(grid.width(), grid.height(), 1);
  s.start = start;
  s.mission.waypoints = std::move(waypoints);
  return s;
}

}  // namespace test_support
