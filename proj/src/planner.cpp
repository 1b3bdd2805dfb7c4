#include "lgnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include "lgnav/errors.hpp"

namespace lgnav {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

struct Step {
  int dr;
  int dc;
};

// Neighbor expansion order is fixed; ties are resolved in the open list.
constexpr Step kSteps[8] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};

}  // namespace

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
  if (radius < 0.0) throw Error("inflation radius must be >= 0");
  OccupancyGrid out = grid;
  if (radius == 0.0) return out;
  const ClearanceMap dist = distance_transform(grid, ObstaclePolicy::OccupiedOnly);
  // Clearances are sqrt(integer)*resolution; a relative slack keeps exact ties inside.
  const double limit = radius * (1.0 + 1e-12);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const GridIndex i = grid.unflat(k);
    if (grid.at(i) == Cell::Free && dist.clearance[k] <= limit) out.set(i, Cell::Occupied);
  }
  return out;
}

double octile_cells(GridIndex a, GridIndex b) {
  const int dr = std::abs(a.row - b.row);
  const int dc = std::abs(a.col - b.col);
  return std::max(dr, dc) + (kSqrt2 - 1.0) * std::min(dr, dc);
}

double path_length(const std::vector<GridIndex>& cells, double resolution) {
  long straight = 0;
  long diagonal = 0;
  for (std::size_t k = 1; k < cells.size(); ++k) {
    const int dr = std::abs(cells[k].row - cells[k - 1].row);
    const int dc = std::abs(cells[k].col - cells[k - 1].col);
    if (dr + dc == 2 && dr == 1) {
      ++diagonal;
    } else if (dr + dc == 1) {
      ++straight;
    } else if (dr + dc != 0) {
      throw Error("path cells are not 8-adjacent");
    }
  }
  return resolution * (static_cast<double>(straight) + static_cast<double>(diagonal) * kSqrt2);
}

double path_length(const PlannedPath& path) { return path_length(path.cells, path.resolution); }

GridPlanner::GridPlanner(const OccupancyGrid& grid, PlannerConfig cfg)
    : grid_(inflate(grid, cfg.inflation_radius)), cfg_(cfg), passable_(grid_.size(), 0) {
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const Cell c = grid_.cells()[k];
    passable_[k] = (c == Cell::Free || (c == Cell::Unknown && cfg_.treat_unknown_as == UnknownAs::Free)) ? 1 : 0;
  }
}

std::optional<PlannedPath> GridPlanner::plan(const WorldPose& start, const WorldPose& goal) const {
  return plan(world_to_grid(start, grid_), world_to_grid(goal, grid_));
}

std::optional<PlannedPath> GridPlanner::plan(GridIndex start, GridIndex goal) const {
  if (!grid_.in_bounds(start) || !grid_.in_bounds(goal)) throw OutOfBounds("planner endpoint outside the grid");
  if (!traversable(start) || !traversable(goal)) return std::nullopt;

  const std::size_t n = grid_.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> g(n, kInf);
  std::vector<std::size_t> parent(n, kNone);
  std::vector<std::uint8_t> closed(n, 0);

  // (f, h, row-major index): lower f, then lower heuristic, then lower index.
  using Key = std::tuple<double, double, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> open;

  const std::size_t s = grid_.flat(start);
  const std::size_t t = grid_.flat(goal);
  g[s] = 0.0;
  const double h0 = octile_cells(start, goal);
  open.emplace(h0, h0, s);

  while (!open.empty()) {
    const auto [f, h, k] = open.top();
    open.pop();
    if (closed[k]) continue;
    closed[k] = 1;
    if (k == t) break;
    const GridIndex cur = grid_.unflat(k);
    for (const Step& st : kSteps) {
      const GridIndex nb{cur.row + st.dr, cur.col + st.dc};
      if (!traversable(nb)) continue;
      const bool diagonal = st.dr != 0 && st.dc != 0;
      if (diagonal && (!traversable({cur.row + st.dr, cur.col}) || !traversable({cur.row, cur.col + st.dc})))
        continue;
      const std::size_t nk = grid_.flat(nb);
      if (closed[nk]) continue;
      const double cand = g[k] + (diagonal ? kSqrt2 : 1.0);
      if (cand < g[nk]) {
        g[nk] = cand;
        parent[nk] = k;
        const double nh = octile_cells(nb, goal);
        open.emplace(cand + nh, nh, nk);
      }
    }
  }
  if (!closed[t]) return std::nullopt;

  PlannedPath path;
  path.resolution = grid_.resolution();
  for (std::size_t k = t; k != kNone; k = parent[k]) path.cells.push_back(grid_.unflat(k));
  std::reverse(path.cells.begin(), path.cells.end());
  path.poses.reserve(path.cells.size());
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    WorldPose p = grid_to_world(path.cells[i], grid_);
    const std::size_t a = i + 1 < path.cells.size() ? i : (i > 0 ? i - 1 : i);
    if (a + 1 < path.cells.size()) {
      p.theta = std::atan2(path.cells[a + 1].row - path.cells[a].row, path.cells[a + 1].col - path.cells[a].col);
    }
    path.poses.push_back(p);
  }
  path.length = path_length(path);
  return path;
}

std::optional<PlannedPath> plan(const OccupancyGrid& grid, const PlannerConfig& cfg, const WorldPose& start,
                                const WorldPose& goal) {
  return GridPlanner(grid, cfg).plan(start, goal);
}

}  // namespace lgnav
