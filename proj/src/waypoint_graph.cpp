#include "lgnav/waypoint_graph.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lgnav/errors.hpp"

namespace lgnav {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

WeightMatrix::WeightMatrix(std::size_t n, double fill) : n_(n), w_(n * n, fill) {}

WaypointGraph build_graph(const CandidateLayers& layers, const TravelDistanceFn& distance, double prune_eps) {
  WaypointGraph g;
  g.vertices.push_back(GraphVertex{layers.robot, 0, -1});
  std::vector<std::vector<std::size_t>> ids(layers.layers.size() + 1);
  ids[0].push_back(0);
  for (std::size_t l = 0; l < layers.layers.size(); ++l) {
    if (layers.layers[l].empty()) throw Error("candidate layer " + std::to_string(l + 1) + " is empty");
    for (const CandidateWaypoint& c : layers.layers[l]) {
      ids[l + 1].push_back(g.vertices.size());
      g.vertices.push_back(GraphVertex{c.pose, static_cast<int>(l + 1), c.region_id});
    }
  }
  g.layer_count = static_cast<int>(ids.size());

  const std::size_t n = g.vertices.size();
  g.weights = WeightMatrix(n, kInf);
  for (std::size_t i = 0; i < n; ++i) g.weights(i, i) = 0.0;

  for (std::size_t l = 0; l + 1 < ids.size(); ++l) {
    for (std::size_t u : ids[l]) {
      for (std::size_t v : ids[l + 1]) {
        const double straight = planar_distance(g.vertices[u].pose, g.vertices[v].pose);
        if (straight < prune_eps) {
          g.weights(u, v) = straight;
          continue;
        }
        const std::optional<double> d = distance(g.vertices[u].pose, g.vertices[v].pose);
        g.weights(u, v) = d ? *d : kInf;
      }
    }
  }
  return g;
}

WaypointGraph build_graph(const CandidateLayers& layers, const OccupancyGrid& occ, const PlannerConfig& cfg,
                          double prune_eps) {
  const GridPlanner planner(occ, cfg);
  return build_graph(
      layers,
      [&planner](const WorldPose& a, const WorldPose& b) -> std::optional<double> {
        const auto p = planner.plan(a, b);
        if (!p) return std::nullopt;
        return p->length;
      },
      prune_eps);
}

AllPairs floyd_warshall(const WeightMatrix& weights) {
  const std::size_t n = weights.size();
  AllPairs r;
  r.dist = weights;
  r.next.assign(n, std::vector<int>(n, -1));
  for (std::size_t i = 0; i < n; ++i) {
    if (weights(i, i) != 0.0) throw Error("weight matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights(i, j);
      if (std::isnan(w) || w < 0.0) throw NegativeWeight("edge weight must be non-negative");
      if (w < kInf) r.next[i][j] = static_cast<int>(j);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = r.dist(i, k);
      if (dik == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double cand = dik + r.dist(k, j);
        if (cand < r.dist(i, j)) {
          r.dist(i, j) = cand;
          r.next[i][j] = r.next[i][k];
        }
      }
    }
  }
  return r;
}

SelectedRoute select_route(const WaypointGraph& graph) { return select_route(graph, floyd_warshall(graph.weights)); }

SelectedRoute select_route(const WaypointGraph& graph, const AllPairs& apsp) {
  if (graph.layer_count < 2) throw NoFeasibleRoute("no feedback layers to route through");
  const int last = graph.layer_count - 1;
  int best = -1;
  for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
    if (graph.vertices[v].layer != last) continue;
    if (apsp.dist(0, v) == kInf) continue;
    if (best < 0 || apsp.dist(0, v) < apsp.dist(0, static_cast<std::size_t>(best))) best = static_cast<int>(v);
  }
  if (best < 0) throw NoFeasibleRoute("no candidate for the final description is reachable");

  SelectedRoute route;
  int cur = 0;
  while (cur != best) {
    const int nxt = apsp.next[cur][best];
    if (nxt < 0) throw NoFeasibleRoute("path reconstruction failed");
    route.total_length += graph.weights(static_cast<std::size_t>(cur), static_cast<std::size_t>(nxt));
    route.vertices.push_back(nxt);
    route.waypoints.push_back(graph.vertices[nxt].pose);
    cur = nxt;
  }
  // Edges only join consecutive layers, so the route has one vertex per layer.
  for (std::size_t i = 0; i < route.vertices.size(); ++i)
    if (graph.vertices[route.vertices[i]].layer != static_cast<int>(i) + 1)
      throw Error("selected route violates layer order");
  if (static_cast<int>(route.vertices.size()) != last) throw Error("selected route skips a layer");
  return route;
}

std::string to_text(const WaypointGraph& graph) {
  std::ostringstream os;
  os << "vertices " << graph.vertices.size() << " layers " << graph.layer_count << '\n';
  for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
    const GraphVertex& gv = graph.vertices[v];
    os << v << " layer=" << gv.layer << " region=" << gv.region_id << " x=" << gv.pose.x << " y=" << gv.pose.y
       << '\n';
  }
  os << "weights\n";
  for (std::size_t i = 0; i < graph.weights.size(); ++i) {
    for (std::size_t j = 0; j < graph.weights.size(); ++j) {
      if (j) os << ' ';
      const double w = graph.weights(i, j);
      if (w == kInf) {
        os << "inf";
      } else {
        os << w;
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace lgnav
