#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lgnav/errors.hpp"
#include "lgnav/planner.hpp"
#include "oracles.hpp"

using namespace lgnav;

namespace {

const double kSqrt2 = std::sqrt(2.0);

void expect_valid_path(const PlannedPath& p, const GridPlanner& planner, GridIndex s, GridIndex t) {
  ASSERT_FALSE(p.cells.empty());
  EXPECT_EQ(p.cells.front(), s);
  EXPECT_EQ(p.cells.back(), t);
  EXPECT_EQ(p.cells.size(), p.poses.size());
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    EXPECT_TRUE(planner.traversable(p.cells[i]));
    if (i == 0) continue;
    const int dr = p.cells[i].row - p.cells[i - 1].row, dc = p.cells[i].col - p.cells[i - 1].col;
    EXPECT_LE(std::abs(dr), 1);
    EXPECT_LE(std::abs(dc), 1);
    EXPECT_TRUE(dr != 0 || dc != 0);
    if (dr && dc) {
      EXPECT_TRUE(planner.traversable({p.cells[i - 1].row + dr, p.cells[i - 1].col}));
      EXPECT_TRUE(planner.traversable({p.cells[i - 1].row, p.cells[i - 1].col + dc}));
    }
  }
}

}  // namespace

TEST(Inflate, ZeroRadiusIsIdentity) {
  std::mt19937_64 rng(1);
  const OccupancyGrid g = oracle::random_grid(rng, 12, 9, 0.2, 0.1, 0.1);
  EXPECT_EQ(inflate(g, 0.0), g);
}

TEST(Inflate, OneCellRadiusGrowsFourNeighbors) {
  OccupancyGrid g(5, 5, 0.1);
  g.set(2, 2, Cell::Occupied);
  const OccupancyGrid out = inflate(g, 0.1);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      const bool expect = std::abs(r - 2) + std::abs(c - 2) <= 1;
      EXPECT_EQ(out.at(r, c) == Cell::Occupied, expect) << r << "," << c;
    }
}

TEST(Inflate, SaturatesLargeRadius) {
  OccupancyGrid g(6, 4, 0.5);
  g.set(0, 5, Cell::Occupied);
  const OccupancyGrid out = inflate(g, 100.0);
  for (Cell c : out.cells()) EXPECT_EQ(c, Cell::Occupied);
}

TEST(Inflate, UnknownIsNotASource) {
  OccupancyGrid g(5, 1, 1.0);
  g.set(0, 0, Cell::Unknown);
  const OccupancyGrid out = inflate(g, 1.0);
  EXPECT_EQ(out.at(0, 0), Cell::Unknown);
  EXPECT_EQ(out.at(0, 1), Cell::Free);
}

TEST(Plan, SameCell) {
  OccupancyGrid g(5, 5, 1.0);
  const auto p = plan(g, {}, {2.5, 2.5}, {2.6, 2.4});
  ASSERT_TRUE(p);
  EXPECT_EQ(p->cells.size(), 1u);
  EXPECT_EQ(p->length, 0.0);
}

TEST(Plan, PureDiagonal) {
  OccupancyGrid g(5, 5, 1.0);
  const auto p = plan(g, {}, {0.5, 0.5}, {4.5, 4.5});
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->length, 4 * kSqrt2);
  EXPECT_EQ(p->cells.size(), 5u);
}

TEST(Plan, EndpointOffGridThrows) {
  OccupancyGrid g(5, 5, 1.0);
  EXPECT_THROW(plan(g, {}, {0.5, 0.5}, {7.0, 0.5}), OutOfBounds);
}

TEST(Plan, BlockedEndpointsAreNoPath) {
  OccupancyGrid g(5, 5, 1.0);
  g.set(0, 0, Cell::Occupied);
  EXPECT_FALSE(plan(g, {}, {0.5, 0.5}, {4.5, 4.5}));
  EXPECT_FALSE(plan(g, {}, {4.5, 4.5}, {0.5, 0.5}));
}

TEST(Plan, NoCornerCutting) {
  // Two obstacles touching diagonally close the only gap.
  OccupancyGrid g(2, 2, 1.0);
  g.set(0, 1, Cell::Occupied);
  g.set(1, 0, Cell::Occupied);
  EXPECT_FALSE(plan(g, {}, {0.5, 0.5}, {1.5, 1.5}));
}

TEST(Plan, UnknownHandling) {
  OccupancyGrid g(5, 3, 1.0);
  g.fill_rect(0, 2, 2, 2, Cell::Unknown);
  EXPECT_FALSE(plan(g, {}, {0.5, 1.5}, {4.5, 1.5}));
  PlannerConfig cfg;
  cfg.treat_unknown_as = UnknownAs::Free;
  const auto p = plan(g, cfg, {0.5, 1.5}, {4.5, 1.5});
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->length, 4.0);
}

TEST(Plan, InflationClosesNarrowGap) {
  OccupancyGrid g(7, 7, 0.1);
  g.fill_rect(3, 0, 3, 2, Cell::Occupied);
  g.fill_rect(3, 4, 3, 6, Cell::Occupied);
  EXPECT_TRUE(plan(g, {}, {0.35, 0.05}, {0.35, 0.65}));
  PlannerConfig cfg;
  cfg.inflation_radius = 0.1;
  EXPECT_FALSE(plan(g, cfg, {0.35, 0.05}, {0.35, 0.65}));
}

TEST(Plan, PosesHeadTowardNextCell) {
  OccupancyGrid g(4, 4, 1.0);
  const auto p = plan(g, {}, {0.5, 0.5}, {3.5, 0.5});
  ASSERT_TRUE(p);
  for (std::size_t i = 0; i + 1 < p->poses.size(); ++i) EXPECT_DOUBLE_EQ(p->poses[i].theta, 0.0);
}

TEST(PathLength, Examples) {
  PlannedPath single;
  single.cells = {{3, 3}};
  single.resolution = 1.0;
  EXPECT_EQ(path_length(single), 0.0);

  EXPECT_DOUBLE_EQ(path_length({{0, 0}, {0, 1}, {0, 2}, {0, 3}}, 0.5), 1.5);
  EXPECT_DOUBLE_EQ(path_length({{0, 0}, {0, 1}, {1, 2}, {2, 3}, {2, 4}}, 1.0), 2.0 + 2.0 * kSqrt2);
}

TEST(Plan, MatchesDijkstraOnRandomGrids) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> cell(0, 24);
  int reachable = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const OccupancyGrid g = oracle::random_grid(rng, 25, 25, 0.2);
    const GridPlanner planner(g, {});
    const GridIndex s{cell(rng), cell(rng)}, t{cell(rng), cell(rng)};
    const auto p = planner.plan(s, t);
    const auto d = oracle::dijkstra_steps(oracle::free_cells(g), 25, 25, s, t);
    ASSERT_EQ(p.has_value(), d.has_value()) << "trial " << trial;
    if (!p) continue;
    ++reachable;
    EXPECT_EQ(p->length, d->value() * g.resolution()) << "trial " << trial;
    EXPECT_GE(p->length + 1e-12, octile_cells(s, t) * g.resolution());
    expect_valid_path(*p, planner, s, t);
  }
  EXPECT_GT(reachable, 50);
}

TEST(Plan, Deterministic) {
  std::mt19937_64 rng(8);
  const OccupancyGrid g = oracle::random_grid(rng, 40, 40, 0.15);
  const GridPlanner a(g, {}), b(g, {});
  for (int i = 0; i < 20; ++i) {
    const GridIndex s{i, 0}, t{39 - i, 39};
    EXPECT_EQ(a.plan(s, t), b.plan(s, t));
  }
}
