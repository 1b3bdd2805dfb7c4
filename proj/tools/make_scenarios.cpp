// Writes the bundled scenario set (grids, feature grids, vocabulary,
// scenario and feedback JSON) into a directory.
//
//   make_scenarios <out_dir>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgnav/grid.hpp"
#include "lgnav/semantic_map.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lgnav;

namespace {

constexpr int kDim = 8;
constexpr double kRes = 0.1;
constexpr double kNoise = 0.2;

struct Phrase {
  const char* text;
  int axis;
};

// One embedding axis per object class; axis 6 has no object in any map.
const std::vector<Phrase> kPhrases = {
    {"the blue rug", 0},  {"the yellow mat", 1}, {"the green plant", 2},     {"the red chair", 3},
    {"the bookshelf", 4}, {"the kitchen table", 5}, {"the piano", 6},
};

struct Blob {
  int axis;
  int r0, c0, r1, c1;  // inclusive
};

Vocabulary make_vocabulary() {
  Vocabulary v;
  for (const auto& p : kPhrases) {
    std::vector<double> e(kDim, 0.0);
    e[p.axis] = 1.0;
    v.add(p.text, e);
  }
  return v;
}

// Walls, floor and objects get distinct feature prototypes plus Gaussian noise,
// so each phrase sees low (wall), middle (floor, other objects) and high
// (matching object) score populations. Noise is kept fairly wide: with tight
// populations the quantile-initialized EM tends to park two components on the
// floor and miss small objects.
FeatureGrid make_features(const OccupancyGrid& occ, const std::vector<Blob>& blobs, std::uint64_t seed) {
  FeatureGrid fg(occ.width(), occ.height(), kDim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, kNoise);
  for (int r = 0; r < occ.height(); ++r) {
    for (int c = 0; c < occ.width(); ++c) {
      auto f = fg.feature(r, c);
      const bool wall = occ.at(r, c) == Cell::Occupied;
      for (int d = 0; d < kDim; ++d) {
        double v = d == kDim - 1 ? (wall ? 0.3 : 0.5) : (wall ? -0.4 : 0.0);
        f[d] = static_cast<float>(v + noise(rng));
      }
      fg.observed.set(r, c, true);
    }
  }
  for (const auto& b : blobs)
    for (int r = b.r0; r <= b.r1; ++r)
      for (int c = b.c0; c <= b.c1; ++c) {
        auto f = fg.feature(r, c);
        for (int d = 0; d < kDim; ++d) f[d] = static_cast<float>((d == b.axis ? 1.0 : 0.0) + noise(rng));
      }
  return fg;
}

json pose_at(const OccupancyGrid& g, int row, int col, double theta = 0.0) {
  const WorldPose p = grid_to_world({row, col}, g);
  return json::array({p.x, p.y, theta});
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_grid(const fs::path& path, const OccupancyGrid& g) {
  std::ofstream out(path, std::ios::binary);
  write_occupancy_grid(out, g);
}

void write_features(const fs::path& path, const FeatureGrid& fg) {
  std::ofstream out(path, std::ios::binary);
  write_feature_grid(out, fg);
}

// Straight corridor along row 10 from col 1 to col 43. With bypass_height > 0
// a one-cell-wide U loop leaves the corridor at col 15 and rejoins at col 27.
// Blocking (10, 21) then lengthens the start-to-goal path by 2 * bypass_height
// cells over the 40-cell direct route.
OccupancyGrid corridor_grid(int bypass_height) {
  OccupancyGrid g(45, 14, kRes, {0.0, 0.0}, Cell::Occupied);
  g.fill_rect(10, 1, 10, 43, Cell::Free);
  if (bypass_height > 0) {
    const int top = 10 - bypass_height;
    g.fill_rect(top, 15, 10, 15, Cell::Free);
    g.fill_rect(top, 27, 10, 27, Cell::Free);
    g.fill_rect(top, 15, top, 27, Cell::Free);
  }
  return g;
}

void write_corridor(const fs::path& dir, const std::string& name, int bypass_height, bool blocked,
                    std::optional<int> expected_queries, const json& feedback) {
  const OccupancyGrid g = corridor_grid(bypass_height);
  std::vector<Blob> blobs;
  if (bypass_height > 0) {
    const int top = 10 - bypass_height;
    blobs.push_back({2, top - 1, 19, top + 1, 23});  // plant at the top of the loop
  }
  write_grid(dir / (name + ".pocc"), g);
  write_features(dir / (name + ".fgrid"), make_features(g, blobs, 7));

  json s;
  s["name"] = name;
  s["true_grid"] = name + ".pocc";
  s["feature_grid"] = name + ".fgrid";
  s["vocabulary"] = "vocabulary.txt";
  s["start"] = pose_at(g, 10, 1);
  s["mission"] = {{"waypoints", json::array({pose_at(g, 10, 41)})}};
  s["change_events"] = json::array();
  if (blocked) s["change_events"].push_back({{"time", 0.1}, {"cells", json::array({json::array({10, 21})})}, {"state", "occupied"}});
  s["sensor_radius"] = 2.5;
  s["speed"] = 0.5;
  s["replan_rate"] = 5.0;
  s["tau"] = 0.25;
  s["seed"] = 1;
  s["semantic"] = {{"k", 3}, {"radius", 0.15}};
  if (expected_queries) s["expected_queries"] = *expected_queries;
  write_json(dir / (name + ".json"), s);
  write_json(dir / (name + ".feedback.json"), feedback);
}

// 60 x 60 cells, four 28 x 28 rooms:
//   A (top left)  | B (top right)
//   D (bot left)  | C (bot right)
// Doors are four cells wide: A-B rows 12-15, B-C cols 43-46, A-D cols 12-15,
// D-C rows 43-46.
OccupancyGrid house_grid() {
  OccupancyGrid g(60, 60, kRes, {0.0, 0.0}, Cell::Occupied);
  g.fill_rect(1, 1, 28, 28, Cell::Free);
  g.fill_rect(1, 31, 28, 58, Cell::Free);
  g.fill_rect(31, 1, 58, 28, Cell::Free);
  g.fill_rect(31, 31, 58, 58, Cell::Free);
  g.fill_rect(12, 29, 15, 30, Cell::Free);
  g.fill_rect(29, 43, 30, 46, Cell::Free);
  g.fill_rect(29, 12, 30, 15, Cell::Free);
  g.fill_rect(43, 29, 46, 30, Cell::Free);
  return g;
}

void write_house(const fs::path& dir) {
  const std::string name = "small_house";
  const OccupancyGrid g = house_grid();
  const std::vector<Blob> blobs = {
      {0, 12, 12, 16, 16},  // blue rug, middle of A
      {1, 42, 12, 46, 16},  // yellow mat, middle of D
      {1, 2, 52, 6, 56},    // yellow mat, far corner of B
      {3, 50, 50, 52, 54},  // red chair in C
      {4, 1, 33, 3, 40},    // bookshelf along the top wall of B
      {5, 50, 4, 54, 9},    // kitchen table in D
  };
  write_grid(dir / (name + ".pocc"), g);
  write_features(dir / (name + ".fgrid"), make_features(g, blobs, 11));

  json s;
  s["name"] = name;
  s["true_grid"] = name + ".pocc";
  s["feature_grid"] = name + ".fgrid";
  s["vocabulary"] = "vocabulary.txt";
  s["start"] = pose_at(g, 14, 14);
  s["mission"] = {{"waypoints", json::array({pose_at(g, 14, 44), pose_at(g, 44, 44), pose_at(g, 54, 44)})}};
  // The B-C door shuts shortly after the robot leaves the first waypoint.
  s["change_events"] = json::array({{{"time", 6.5}, {"rect", json::array({29, 43, 30, 46})}, {"state", "occupied"}}});
  s["sensor_radius"] = 1.5;
  s["speed"] = 0.5;
  s["replan_rate"] = 5.0;
  s["tau"] = 0.25;
  s["seed"] = 3;
  s["semantic"] = {{"k", 3}};
  s["expected_queries"] = 1;
  // Hand-drawn ground truth: into B, a short way toward the C door, back
  // through A (the rug), down through D (the mat), then into C.
  s["reference_route"] = json::array({pose_at(g, 14, 14), pose_at(g, 14, 44), pose_at(g, 16, 44), pose_at(g, 15, 43),
                                      pose_at(g, 15, 15), pose_at(g, 44, 15), pose_at(g, 44, 44), pose_at(g, 54, 44)});
  write_json(dir / (name + ".json"), s);
  write_json(dir / (name + ".feedback.json"), json::array({json::array({"the blue rug", "the yellow mat"})}));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_scenarios <out_dir>\n";
    return 1;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "vocabulary.txt", std::ios::binary);
    make_vocabulary().write(out);
  }
  const json plant = json::array({json::array({"the green plant"})});
  write_corridor(dir, "corridor_detour_30", 6, true, 1, plant);
  write_corridor(dir, "corridor_detour_20", 4, true, 0, json::array());
  write_corridor(dir, "corridor_blocked", 0, true, std::nullopt, json::array());
  write_corridor(dir, "corridor_clear", 6, false, 0, json::array());
  write_house(dir);
  return 0;
}
