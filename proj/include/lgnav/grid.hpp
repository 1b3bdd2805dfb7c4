#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace lgnav {

// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

struct WorldPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  WorldPose() = default;
  WorldPose(double x_, double y_, double theta_ = 0.0)
      : x(x_), y(y_), theta(normalize_angle(theta_)) {}

  friend bool operator==(const WorldPose&, const WorldPose&) = default;
};

double planar_distance(const WorldPose& a, const WorldPose& b);

struct GridIndex {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const GridIndex&, const GridIndex&) = default;
};

enum class Cell : std::uint8_t { Free, Occupied, Unknown };

enum class ObstaclePolicy { OccupiedOnly, OccupiedAndUnknown };

// Row-major boolean raster.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool value = false);

  bool in_bounds(int row, int col) const { return row >= 0 && col >= 0 && row < height && col < width; }
  bool at(int row, int col) const { return bits[static_cast<std::size_t>(row) * width + col] != 0; }
  bool at(GridIndex i) const { return at(i.row, i.col); }
  void set(int row, int col, bool v) { bits[static_cast<std::size_t>(row) * width + col] = v ? 1 : 0; }
  void set(GridIndex i, bool v) { set(i.row, i.col, v); }
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// Distance in meters from each cell to the nearest obstacle cell.
struct ClearanceMap {
  static constexpr double kNoObstacle = std::numeric_limits<double>::infinity();

  int width = 0;
  int height = 0;
  std::vector<double> clearance;

  double at(int row, int col) const { return clearance[static_cast<std::size_t>(row) * width + col]; }
  double at(GridIndex i) const { return at(i.row, i.col); }
};

// Metric occupancy grid. Cell (row, col) covers
// [origin.x + col*res, origin.x + (col+1)*res) x [origin.y + row*res, origin.y + (row+1)*res).
// Rotated origins are not supported; origin.theta is carried but ignored.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, WorldPose origin = {}, Cell fill = Cell::Free);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const WorldPose& origin() const { return origin_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(GridIndex i) const { return i.row >= 0 && i.col >= 0 && i.row < height_ && i.col < width_; }
  std::size_t flat(GridIndex i) const { return static_cast<std::size_t>(i.row) * width_ + i.col; }
  GridIndex unflat(std::size_t k) const {
    return {static_cast<int>(k / width_), static_cast<int>(k % width_)};
  }

  Cell at(GridIndex i) const { return cells_[flat(i)]; }
  Cell at(int row, int col) const { return at(GridIndex{row, col}); }
  void set(GridIndex i, Cell c) { cells_[flat(i)] = c; }
  void set(int row, int col, Cell c) { set(GridIndex{row, col}, c); }
  // Sets every cell of the inclusive rectangle.
  void fill_rect(int row0, int col0, int row1, int col1, Cell c);

  const std::vector<Cell>& cells() const { return cells_; }

  bool same_geometry(const OccupancyGrid& other) const;

  // Mask of cells counted as obstacles under `policy`.
  BinaryMask obstacle_mask(ObstaclePolicy policy) const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  WorldPose origin_;
  std::vector<Cell> cells_;
};

// Throws OutOfBounds when the pose falls outside the grid extent.
GridIndex world_to_grid(const WorldPose& pose, const OccupancyGrid& grid);
// Cell-center coordinate, theta = 0. Throws OutOfBounds.
WorldPose grid_to_world(GridIndex idx, const OccupancyGrid& grid);

// Exact Euclidean distance transform (meters) to the nearest obstacle cell center.
ClearanceMap distance_transform(const OccupancyGrid& grid,
                                ObstaclePolicy policy = ObstaclePolicy::OccupiedAndUnknown);
// Same transform with an explicit site mask and cell size.
ClearanceMap distance_transform(const BinaryMask& sites, double resolution);

// 3x3 square structuring element. Out-of-bounds neighbors never contribute:
// dilation sees them as false, erosion ignores them.
BinaryMask erode(const BinaryMask& mask);
BinaryMask dilate(const BinaryMask& mask);
BinaryMask open(const BinaryMask& mask);
BinaryMask close(const BinaryMask& mask);

using Region = std::vector<GridIndex>;

// 8-connected components, each sorted row-major, ordered by their first cell.
std::vector<Region> connected_components(const BinaryMask& mask);

// P-OCC text format. Row 0 is the first line after the header.
OccupancyGrid read_occupancy_grid(std::istream& in, const std::string& source_name = "<stream>");
OccupancyGrid load_occupancy_grid(const std::string& path);
void write_occupancy_grid(std::ostream& out, const OccupancyGrid& grid);
std::string to_text(const OccupancyGrid& grid);

// 64-bit FNV-1a over dimensions and cell states; stable across runs.
std::uint64_t digest(const OccupancyGrid& grid);

}  // namespace lgnav
