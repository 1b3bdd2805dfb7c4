#include <gtest/gtest.h>

#include <random>

#include "lgnav/errors.hpp"
#include "lgnav/metrics.hpp"
#include "oracles.hpp"

using namespace lgnav;

namespace {

std::vector<WorldPose> poses(std::initializer_list<std::pair<double, double>> pts) {
  std::vector<WorldPose> out;
  for (auto [x, y] : pts) out.emplace_back(x, y);
  return out;
}

std::vector<std::pair<double, double>> xy(const std::vector<WorldPose>& p) {
  std::vector<std::pair<double, double>> out;
  for (const auto& q : p) out.emplace_back(q.x, q.y);
  return out;
}

std::vector<WorldPose> random_walk(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<WorldPose> out{WorldPose(0, 0)};
  for (int i = 1; i < n; ++i) out.emplace_back(out.back().x + step(rng), out.back().y + step(rng));
  return out;
}

}  // namespace

TEST(Rmse, IdenticalIsZero) {
  const auto t = poses({{0, 0}, {1, 0}, {1, 2}});
  EXPECT_EQ(rmse({t, t}), 0.0);
}

TEST(Rmse, LateralOffset) {
  EXPECT_NEAR(rmse({poses({{0, 0.3}, {5, 0.3}}), poses({{0, 0}, {5, 0}})}), 0.3, 1e-12);
}

TEST(Rmse, LShapeMatchesOracle) {
  const auto exec = poses({{0, 0}, {2.2, 0.1}, {2.0, 3.0}});
  const auto ref = poses({{0, 0}, {2, 0}, {2, 3}});
  EXPECT_NEAR(rmse({exec, ref}, 100), oracle::rmse(xy(exec), xy(ref), 100), 1e-9);
}

TEST(Rmse, RandomTrajectoriesMatchOracle) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_walk(rng, 2 + i % 17), b = random_walk(rng, 2 + i % 5);
    EXPECT_NEAR(rmse({a, b}, 200), oracle::rmse(xy(a), xy(b), 200), 1e-9);
  }
}

TEST(Rmse, SymmetricAndTranslationInvariant) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_walk(rng, 10), b = random_walk(rng, 7);
    EXPECT_NEAR(rmse({a, b}), rmse({b, a}), 1e-12);
    auto at = a, bt = b;
    for (auto& p : at) p = WorldPose(p.x + 3.25, p.y - 1.5);
    for (auto& p : bt) p = WorldPose(p.x + 3.25, p.y - 1.5);
    EXPECT_NEAR(rmse({a, b}), rmse({at, bt}), 1e-9);
    EXPECT_GE(rmse({a, b}), 0.0);
  }
}

TEST(Rmse, HeadingIgnored) {
  std::vector<WorldPose> a{WorldPose(0, 0, 0.0), WorldPose(1, 0, 0.0)};
  std::vector<WorldPose> b{WorldPose(0, 0, 2.0), WorldPose(1, 0, -1.0)};
  EXPECT_EQ(rmse({a, b}), 0.0);
}

TEST(Rmse, Degenerate) {
  EXPECT_THROW(rmse({poses({{1, 1}, {1, 1}}), poses({{0, 0}, {1, 0}})}), DegenerateTrajectory);
  EXPECT_THROW(rmse({{}, poses({{0, 0}, {1, 0}})}), EmptyInput);
}

TEST(Resample, EvenSpacing) {
  const auto r = resample_by_arc_length(poses({{0, 0}, {1, 0}, {1, 1}}), 5);
  ASSERT_EQ(r.size(), 5u);
  EXPECT_NEAR(r[1].x, 0.5, 1e-12);
  EXPECT_NEAR(r[2].x, 1.0, 1e-12);
  EXPECT_NEAR(r[3].y, 0.5, 1e-12);
  EXPECT_NEAR(r[4].y, 1.0, 1e-12);
}

TEST(SuccessRate, Examples) {
  std::vector<TrialOutcome> five(5, TrialOutcome{true, {}});
  EXPECT_DOUBLE_EQ(success_rate(five), 1.0);
  five[2].triggered_as_intended = false;
  EXPECT_DOUBLE_EQ(success_rate(five), 0.8);
  EXPECT_DOUBLE_EQ(success_rate({TrialOutcome{false, {}}}), 0.0);
  EXPECT_THROW(success_rate({}), EmptyInput);
}

TEST(Summary, TableLayout) {
  RouteSummary row;
  row.route = "Route 1";
  row.rmse = {0.1, 0.3};
  row.trials = {{true, {}}, {false, {}}};
  const std::string t = format_summary_table({row});
  EXPECT_NE(t.find("Route"), std::string::npos);
  EXPECT_NE(t.find("0.200 +/- 0.100"), std::string::npos);
  EXPECT_NE(t.find("0.50"), std::string::npos);
}
