#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lgnav/grid.hpp"
#include "lgnav/planner.hpp"
#include "lgnav/semantic_map.hpp"

namespace lgnav {

// Layer 0 is the robot pose; layer i >= 1 holds the candidates for the i-th
// feedback description.
struct CandidateLayers {
  WorldPose robot;
  std::vector<std::vector<CandidateWaypoint>> layers;

  std::size_t feedback_layers() const { return layers.size(); }
};

struct GraphVertex {
  WorldPose pose;
  int layer = 0;
  int region_id = -1;  // -1 for the robot vertex
};

// Dense square matrix of edge weights in meters; +inf marks a missing edge.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(std::size_t n, double fill);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return w_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> w_;
};

struct WaypointGraph {
  std::vector<GraphVertex> vertices;  // vertex 0 is the robot
  WeightMatrix weights;
  int layer_count = 0;  // including layer 0
};

// Travel distance between two poses in meters; std::nullopt when unreachable.
using TravelDistanceFn = std::function<std::optional<double>(const WorldPose&, const WorldPose&)>;

// Edges only join layer i to layer i+1. Pairs closer than `prune_eps`
// (Euclidean) skip the distance oracle and use the straight-line distance.
WaypointGraph build_graph(const CandidateLayers& layers, const TravelDistanceFn& distance, double prune_eps);
WaypointGraph build_graph(const CandidateLayers& layers, const OccupancyGrid& occ, const PlannerConfig& cfg,
                          double prune_eps);

struct AllPairs {
  WeightMatrix dist;
  // next[i][j]: vertex after i on a shortest i->j path, -1 if none.
  std::vector<std::vector<int>> next;
};

// Throws NegativeWeight on any negative entry, Error on a non-zero diagonal.
AllPairs floyd_warshall(const WeightMatrix& weights);

struct SelectedRoute {
  std::vector<WorldPose> waypoints;  // one per feedback layer, in order
  std::vector<int> vertices;         // graph vertex ids, robot excluded
  double total_length = 0.0;
};

// Shortest robot -> terminal-layer route. Throws NoFeasibleRoute.
SelectedRoute select_route(const WaypointGraph& graph);
SelectedRoute select_route(const WaypointGraph& graph, const AllPairs& apsp);

// Vertex list followed by the weight matrix, for debugging.
std::string to_text(const WaypointGraph& graph);

}  // namespace lgnav
