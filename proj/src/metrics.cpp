#include "lgnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lgnav/errors.hpp"

namespace lgnav {

std::vector<WorldPose> resample_by_arc_length(const std::vector<WorldPose>& traj, int samples) {
  if (samples < 2) throw Error("resampling needs at least 2 samples");
  if (traj.empty()) throw EmptyInput("trajectory is empty");
  if (traj.size() == 1) return std::vector<WorldPose>(static_cast<std::size_t>(samples), traj.front());

  std::vector<double> cum(traj.size(), 0.0);
  for (std::size_t i = 1; i < traj.size(); ++i) cum[i] = cum[i - 1] + planar_distance(traj[i - 1], traj[i]);
  const double total = cum.back();
  if (!(total > 0.0)) throw DegenerateTrajectory("trajectory has zero arc length");

  std::vector<WorldPose> out;
  out.reserve(static_cast<std::size_t>(samples));
  std::size_t seg = 1;
  for (int i = 0; i < samples; ++i) {
    const double s = i == samples - 1 ? total : total * static_cast<double>(i) / (samples - 1);
    while (seg + 1 < traj.size() && cum[seg] < s) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0.0 ? std::clamp((s - cum[seg - 1]) / len, 0.0, 1.0) : 0.0;
    const WorldPose& a = traj[seg - 1];
    const WorldPose& b = traj[seg];
    out.emplace_back(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), 0.0);
  }
  return out;
}

double rmse(const TrajectoryPair& pair, int samples) {
  const auto a = resample_by_arc_length(pair.executed, samples);
  const auto b = resample_by_arc_length(pair.reference, samples);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dx = a[i].x - b[i].x;
    const double dy = a[i].y - b[i].y;
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

double success_rate(const std::vector<TrialOutcome>& trials) {
  if (trials.empty()) throw EmptyInput("success rate of zero trials");
  const auto ok = std::count_if(trials.begin(), trials.end(), [](const TrialOutcome& t) { return t.triggered_as_intended; });
  return static_cast<double>(ok) / static_cast<double>(trials.size());
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw EmptyInput("mean of nothing");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

std::string format_summary_table(const std::vector<RouteSummary>& rows) {
  std::size_t name_w = 5;
  for (const auto& r : rows) name_w = std::max(name_w, r.route.size());
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s  %-20s  %s\n", static_cast<int>(name_w), "Route", "RMSE (m)", "SR");
  os << buf;
  for (const auto& r : rows) {
    std::string rm = "n/a";
    if (!r.rmse.empty()) {
      std::snprintf(buf, sizeof buf, "%.3f +/- %.3f", mean(r.rmse), stddev(r.rmse));
      rm = buf;
    }
    std::string sr = "n/a";
    if (!r.trials.empty()) {
      std::snprintf(buf, sizeof buf, "%.2f", success_rate(r.trials));
      sr = buf;
    }
    std::snprintf(buf, sizeof buf, "%-*s  %-20s  %s\n", static_cast<int>(name_w), r.route.c_str(), rm.c_str(), sr.c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace lgnav
