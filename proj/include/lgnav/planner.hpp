#pragma once

#include <optional>
#include <vector>

#include "lgnav/grid.hpp"

namespace lgnav {

enum class UnknownAs { Obstacle, Free };

struct PlannerConfig {
  double inflation_radius = 0.0;  // meters
  UnknownAs treat_unknown_as = UnknownAs::Obstacle;
};

// 8-connected cell path. `length` is in meters.
struct PlannedPath {
  std::vector<GridIndex> cells;
  std::vector<WorldPose> poses;
  double resolution = 1.0;
  double length = 0.0;

  friend bool operator==(const PlannedPath&, const PlannedPath&) = default;
};

// Free cells within `radius` meters of an Occupied cell become Occupied.
OccupancyGrid inflate(const OccupancyGrid& grid, double radius);

// Step cost sum: resolution per axis step, sqrt(2)*resolution per diagonal step.
// Computed from step counts so equal-length paths compare exactly equal.
double path_length(const PlannedPath& path);
double path_length(const std::vector<GridIndex>& cells, double resolution);

// A* over a grid prepared once (inflation is done in the constructor), so
// repeated queries on the same map share the work.
class GridPlanner {
 public:
  GridPlanner(const OccupancyGrid& grid, PlannerConfig cfg);

  // std::nullopt is NoPath. Throws OutOfBounds for endpoints off the grid.
  std::optional<PlannedPath> plan(const WorldPose& start, const WorldPose& goal) const;
  std::optional<PlannedPath> plan(GridIndex start, GridIndex goal) const;

  bool traversable(GridIndex i) const { return grid_.in_bounds(i) && passable_[grid_.flat(i)] != 0; }
  const OccupancyGrid& inflated() const { return grid_; }

 private:
  OccupancyGrid grid_;
  PlannerConfig cfg_;
  std::vector<std::uint8_t> passable_;
};

std::optional<PlannedPath> plan(const OccupancyGrid& grid, const PlannerConfig& cfg, const WorldPose& start,
                                const WorldPose& goal);

// max(|dr|,|dc|) + (sqrt2 - 1)*min(|dr|,|dc|), in cells.
double octile_cells(GridIndex a, GridIndex b);

}  // namespace lgnav
