#pragma once

#include <string>
#include <vector>

#include "lgnav/grid.hpp"

namespace lgnav {

struct TrajectoryPair {
  std::vector<WorldPose> executed;
  std::vector<WorldPose> reference;
};

struct TrialOutcome {
  bool triggered_as_intended = false;
  std::string notes;
};

inline constexpr int kDefaultRmseSamples = 200;

// `samples` points equally spaced by arc length, endpoints included.
// A single-pose trajectory repeats that pose. Throws DegenerateTrajectory for
// multi-pose input of zero length.
std::vector<WorldPose> resample_by_arc_length(const std::vector<WorldPose>& traj, int samples);

// Planar RMSE between the arc-length-resampled trajectories; heading ignored.
double rmse(const TrajectoryPair& pair, int samples = kDefaultRmseSamples);

// Fraction of trials where the query trigger behaved as intended. Throws EmptyInput.
double success_rate(const std::vector<TrialOutcome>& trials);

struct RouteSummary {
  std::string route;
  std::vector<double> rmse;  // one per trial that produced a trajectory
  std::vector<TrialOutcome> trials;
};

double mean(const std::vector<double>& v);
// Population standard deviation.
double stddev(const std::vector<double>& v);

// Plain-text table: route, RMSE mean +/- std, SR.
std::string format_summary_table(const std::vector<RouteSummary>& rows);

}  // namespace lgnav
