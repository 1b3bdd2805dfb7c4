#include "lgnav/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lgnav/errors.hpp"

namespace lgnav {

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) return theta;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, kTwoPi);
  if (t <= -std::numbers::pi) t += kTwoPi;
  if (t > std::numbers::pi) t -= kTwoPi;
  return t;
}

double planar_distance(const WorldPose& a, const WorldPose& b) { return std::hypot(a.x - b.x, a.y - b.y); }

BinaryMask::BinaryMask(int w, int h, bool value)
    : width(w), height(h), bits(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, WorldPose origin, Cell fill)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (width < 0 || height < 0) throw Error("grid dimensions must be non-negative");
  if (!(resolution > 0.0)) throw Error("grid resolution must be > 0");
  cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

void OccupancyGrid::fill_rect(int row0, int col0, int row1, int col1, Cell c) {
  for (int r = std::max(0, row0); r <= std::min(height_ - 1, row1); ++r)
    for (int col = std::max(0, col0); col <= std::min(width_ - 1, col1); ++col) set(r, col, c);
}

bool OccupancyGrid::same_geometry(const OccupancyGrid& other) const {
  return width_ == other.width_ && height_ == other.height_ && resolution_ == other.resolution_ &&
         origin_.x == other.origin_.x && origin_.y == other.origin_.y;
}

BinaryMask OccupancyGrid::obstacle_mask(ObstaclePolicy policy) const {
  BinaryMask m(width_, height_);
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const Cell c = cells_[k];
    m.bits[k] = (c == Cell::Occupied || (policy == ObstaclePolicy::OccupiedAndUnknown && c == Cell::Unknown)) ? 1 : 0;
  }
  return m;
}

GridIndex world_to_grid(const WorldPose& pose, const OccupancyGrid& grid) {
  // Tolerance keeps values such as 0.3/0.1 = 2.9999999999999996 in the intended cell.
  constexpr double kEps = 1e-9;
  const double fc = (pose.x - grid.origin().x) / grid.resolution();
  const double fr = (pose.y - grid.origin().y) / grid.resolution();
  if (!std::isfinite(fc) || !std::isfinite(fr)) throw OutOfBounds("non-finite pose");
  const GridIndex idx{static_cast<int>(std::floor(fr + kEps)), static_cast<int>(std::floor(fc + kEps))};
  if (!grid.in_bounds(idx)) {
    std::ostringstream os;
    os << "pose (" << pose.x << ", " << pose.y << ") lies outside the grid";
    throw OutOfBounds(os.str());
  }
  return idx;
}

WorldPose grid_to_world(GridIndex idx, const OccupancyGrid& grid) {
  if (!grid.in_bounds(idx)) throw OutOfBounds("cell index outside the grid");
  return WorldPose{grid.origin().x + (idx.col + 0.5) * grid.resolution(),
                   grid.origin().y + (idx.row + 0.5) * grid.resolution(), 0.0};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher). Sites with
// infinite f are skipped so rows without obstacles stay infinite.
void squared_edt_1d(const std::vector<double>& f, std::vector<double>& out, std::vector<int>& v,
                    std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  out.assign(n, kInf);
  if (k < 0) return;
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

ClearanceMap distance_transform(const BinaryMask& sites, double resolution) {
  const int w = sites.width;
  const int h = sites.height;
  std::vector<double> sq(static_cast<std::size_t>(w) * h, kInf);
  std::vector<double> f;
  std::vector<double> out;
  std::vector<int> v;
  std::vector<double> z;

  // Columns first, then rows.
  f.resize(h);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) f[r] = sites.at(r, c) ? 0.0 : kInf;
    squared_edt_1d(f, out, v, z);
    for (int r = 0; r < h; ++r) sq[static_cast<std::size_t>(r) * w + c] = out[r];
  }
  f.resize(w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) f[c] = sq[static_cast<std::size_t>(r) * w + c];
    squared_edt_1d(f, out, v, z);
    for (int c = 0; c < w; ++c) sq[static_cast<std::size_t>(r) * w + c] = out[c];
  }

  ClearanceMap m;
  m.width = w;
  m.height = h;
  m.clearance.resize(sq.size());
  for (std::size_t k = 0; k < sq.size(); ++k)
    m.clearance[k] = std::isfinite(sq[k]) ? std::sqrt(sq[k]) * resolution : ClearanceMap::kNoObstacle;
  return m;
}

ClearanceMap distance_transform(const OccupancyGrid& grid, ObstaclePolicy policy) {
  return distance_transform(grid.obstacle_mask(policy), grid.resolution());
}

namespace {

BinaryMask morph(const BinaryMask& m, bool dilating) {
  BinaryMask out(m.width, m.height);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      bool acc = !dilating;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (!m.in_bounds(r + dr, c + dc)) continue;
          const bool b = m.at(r + dr, c + dc);
          acc = dilating ? (acc || b) : (acc && b);
        }
      }
      out.set(r, c, acc);
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask) { return morph(mask, false); }
BinaryMask dilate(const BinaryMask& mask) { return morph(mask, true); }
BinaryMask open(const BinaryMask& mask) { return dilate(erode(mask)); }
BinaryMask close(const BinaryMask& mask) { return erode(dilate(mask)); }

std::vector<Region> connected_components(const BinaryMask& mask) {
  std::vector<Region> regions;
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::vector<GridIndex> stack;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      const std::size_t k = static_cast<std::size_t>(r) * mask.width + c;
      if (!mask.bits[k] || seen[k]) continue;
      Region region;
      seen[k] = 1;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const GridIndex cur = stack.back();
        stack.pop_back();
        region.push_back(cur);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = cur.row + dr;
            const int nc = cur.col + dc;
            if (!mask.in_bounds(nr, nc)) continue;
            const std::size_t nk = static_cast<std::size_t>(nr) * mask.width + nc;
            if (mask.bits[nk] && !seen[nk]) {
              seen[nk] = 1;
              stack.push_back({nr, nc});
            }
          }
        }
      }
      std::sort(region.begin(), region.end());
      regions.push_back(std::move(region));
    }
  }
  return regions;
}

OccupancyGrid read_occupancy_grid(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line()) throw ConfigError(source_name, 1, "empty occupancy grid file");
  std::istringstream header(line);
  std::string magic;
  int w = 0;
  int h = 0;
  double res = 0.0;
  double ox = 0.0;
  double oy = 0.0;
  if (!(header >> magic >> w >> h >> res >> ox >> oy) || magic != "P-OCC")
    throw ConfigError(source_name, line_no, "expected header 'P-OCC <width> <height> <resolution> <origin_x> <origin_y>'");
  if (w <= 0 || h <= 0 || !(res > 0.0)) throw ConfigError(source_name, line_no, "invalid grid dimensions or resolution");

  OccupancyGrid grid(w, h, res, WorldPose{ox, oy, 0.0});
  for (int r = 0; r < h; ++r) {
    if (!next_line()) throw ConfigError(source_name, line_no + 1, "missing grid row " + std::to_string(r));
    if (static_cast<int>(line.size()) != w)
      throw ConfigError(source_name, line_no,
                        "row has " + std::to_string(line.size()) + " cells, expected " + std::to_string(w));
    for (int c = 0; c < w; ++c) {
      switch (line[c]) {
        case '.': grid.set(r, c, Cell::Free); break;
        case '#': grid.set(r, c, Cell::Occupied); break;
        case '?': grid.set(r, c, Cell::Unknown); break;
        default:
          throw ConfigError(source_name, line_no, std::string("invalid cell character '") + line[c] + "'");
      }
    }
  }
  return grid;
}

OccupancyGrid load_occupancy_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open occupancy grid");
  return read_occupancy_grid(in, path);
}

namespace {

// Shortest representation that round-trips.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_occupancy_grid(std::ostream& out, const OccupancyGrid& grid) {
  out << "P-OCC " << grid.width() << ' ' << grid.height() << ' ' << shortest(grid.resolution()) << ' '
      << shortest(grid.origin().x) << ' ' << shortest(grid.origin().y) << '\n';
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      switch (grid.at(r, c)) {
        case Cell::Free: out << '.'; break;
        case Cell::Occupied: out << '#'; break;
        case Cell::Unknown: out << '?'; break;
      }
    }
    out << '\n';
  }
}

std::string to_text(const OccupancyGrid& grid) {
  std::ostringstream os;
  write_occupancy_grid(os, grid);
  return os.str();
}

std::uint64_t digest(const OccupancyGrid& grid) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (int shift = 0; shift < 32; shift += 8) mix((static_cast<std::uint32_t>(grid.width()) >> shift) & 0xff);
  for (int shift = 0; shift < 32; shift += 8) mix((static_cast<std::uint32_t>(grid.height()) >> shift) & 0xff);
  for (Cell c : grid.cells()) mix(static_cast<std::uint8_t>(c));
  return h;
}

}  // namespace lgnav
