#pragma once

// Voxel discretisation of the print bed. Cell (i, j, k) sits at world
// position origin + (i, j, k) * pitch; k = 0 is the lowest layer, lifted by
// one tube radius so that on-ground tubes rest on the bed surface.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/geometry.hpp"
#include "fluidcc/netlist.hpp"

namespace fluidcc {

struct GridIndex {
  int i = 0, j = 0, k = 0;

  constexpr auto operator<=>(const GridIndex&) const = default;
  constexpr GridIndex operator+(const GridIndex& o) const { return {i + o.i, j + o.j, k + o.k}; }
  constexpr GridIndex operator-(const GridIndex& o) const { return {i - o.i, j - o.j, k - o.k}; }
  constexpr int operator[](int axis) const { return axis == 0 ? i : axis == 1 ? j : k; }

  std::string str() const {
    return "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")";
  }
};

enum class CellTag : std::uint8_t { Empty, Footprint, Tube, KeepOut, Port };

class GridWorld {
 public:
  GridWorld() = default;

  GridWorld(int ni, int nj, int nk, double pitch, Vec3 origin = {}, double clearance = 0)
      : dims_{ni, nj, nk}, pitch_(pitch), origin_(origin), clearance_(clearance),
        blocked_(static_cast<std::size_t>(ni) * nj * nk, 0),
        tags_(static_cast<std::size_t>(ni) * nj * nk, CellTag::Empty) {
    if (ni <= 0 || nj <= 0 || nk <= 0) throw Error("grid dimensions must be positive");
    if (!(pitch > 0)) throw Error("grid pitch must be positive");
  }

  const std::array<int, 3>& dims() const { return dims_; }
  double pitch() const { return pitch_; }
  const Vec3& origin() const { return origin_; }
  double clearance() const { return clearance_; }
  std::size_t cellCount() const { return blocked_.size(); }

  bool inBounds(const GridIndex& g) const {
    return g.i >= 0 && g.j >= 0 && g.k >= 0 && g.i < dims_[0] && g.j < dims_[1] && g.k < dims_[2];
  }

  std::size_t linear(const GridIndex& g) const {
    return (static_cast<std::size_t>(g.k) * dims_[1] + g.j) * dims_[0] + g.i;
  }

  GridIndex fromLinear(std::size_t n) const {
    const int i = static_cast<int>(n % dims_[0]);
    n /= dims_[0];
    const int j = static_cast<int>(n % dims_[1]);
    return {i, j, static_cast<int>(n / dims_[1])};
  }

  bool blocked(const GridIndex& g) const { return blocked_[linear(g)] != 0; }
  CellTag tag(const GridIndex& g) const { return tags_[linear(g)]; }

  void block(const GridIndex& g, CellTag why) {
    blocked_[linear(g)] = 1;
    tags_[linear(g)] = why;
  }

  void open(const GridIndex& g, CellTag why = CellTag::Empty) {
    blocked_[linear(g)] = 0;
    tags_[linear(g)] = why;
  }

  std::size_t blockedCount() const {
    std::size_t n = 0;
    for (auto b : blocked_) n += b;
    return n;
  }

  Vec3 world(const GridIndex& g) const {
    return origin_ + Vec3{double(g.i), double(g.j), double(g.k)} * pitch_;
  }

  /// Nearest cell to a world point, clamped into the grid.
  GridIndex nearest(const Vec3& p) const {
    auto idx = [&](double v, double o, int n) {
      return std::clamp(static_cast<int>(std::lround((v - o) / pitch_)), 0, n - 1);
    };
    return {idx(p.x, origin_.x, dims_[0]), idx(p.y, origin_.y, dims_[1]),
            idx(p.z, origin_.z, dims_[2])};
  }

  template <class F>
  void forEachCellNear(const Box& region, F&& f) const {
    auto lo = [&](double v, double o, int n) {
      return std::clamp(static_cast<int>(std::ceil((v - o) / pitch_ - 1e-9)), 0, n);
    };
    auto hi = [&](double v, double o, int n) {
      return std::clamp(static_cast<int>(std::floor((v - o) / pitch_ + 1e-9)), -1, n - 1);
    };
    const int i0 = lo(region.lo.x, origin_.x, dims_[0]), i1 = hi(region.hi.x, origin_.x, dims_[0]);
    const int j0 = lo(region.lo.y, origin_.y, dims_[1]), j1 = hi(region.hi.y, origin_.y, dims_[1]);
    const int k0 = lo(region.lo.z, origin_.z, dims_[2]), k1 = hi(region.hi.z, origin_.z, dims_[2]);
    for (int k = k0; k <= k1; ++k)
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) f(GridIndex{i, j, k});
  }

  bool operator==(const GridWorld&) const = default;

 private:
  std::array<int, 3> dims_{0, 0, 0};
  double pitch_ = 1;
  Vec3 origin_;
  double clearance_ = 0;
  std::vector<std::uint8_t> blocked_;
  std::vector<CellTag> tags_;
};

struct SearchMetrics {
  std::size_t explored_count = 0;
  std::size_t frontier_peak = 0;
  int turn_count = 0;
  double length_mm = 0;
  double cost = 0;  // g at the goal

  bool operator==(const SearchMetrics&) const = default;
};

/// One routed tube: grid nodes from start to goal plus their world positions.
struct RoutePath {
  std::vector<GridIndex> nodes;
  std::vector<Vec3> world_polyline;
  SearchMetrics metrics;

  bool operator==(const RoutePath&) const = default;
};

inline int countTurns(std::span<const GridIndex> nodes) {
  int turns = 0;
  for (std::size_t i = 2; i < nodes.size(); ++i)
    if (nodes[i] - nodes[i - 1] != nodes[i - 1] - nodes[i - 2]) ++turns;
  return turns;
}

inline double polylineLength(std::span<const Vec3> pts) {
  double len = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

/// Rebuilds world coordinates, turn count and length from `nodes`.
inline void refreshGeometry(RoutePath& p, const GridWorld& w) {
  p.world_polyline.clear();
  for (const auto& n : p.nodes) p.world_polyline.push_back(w.world(n));
  p.metrics.turn_count = countTurns(p.nodes);
  p.metrics.length_mm = polylineLength(p.world_polyline);
}

// ---------------------------------------------------------------------------

/// Grid sized to the bed of `params`, with the bottom layer lifted by one
/// tube radius.
inline GridWorld emptyGrid(const CircuitParams& params) {
  const double p = params.grid_pitch;
  const double lift = params.tube_outer_d / 2;
  const int ni = static_cast<int>(std::floor(params.bed.x / p + 1e-9)) + 1;
  const int nj = static_cast<int>(std::floor(params.bed.y / p + 1e-9)) + 1;
  const int nk = std::max(1, static_cast<int>(std::floor((params.bed.z - lift) / p + 1e-9)) + 1);
  return GridWorld(ni, nj, nk, p, {0, 0, lift}, params.clearance);
}

/// A tube attachment point: a gate nozzle or a free-standing external
/// terminal.
struct PortAnchor {
  PortSite site;
  bool on_gate = true;
};

inline double obstacleInflation(const CircuitParams& params) {
  return params.tube_outer_d / 2 + params.clearance;
}

/// Press-fit socket at a gate nozzle: a straight run of kSocketDepth mm,
/// then a short taper back to the plain tube.
inline constexpr double kSocketDepth = 4.0;
inline constexpr double kSocketTaper = 0.5;
inline constexpr double kSocketChamfer = 0.5;
inline constexpr double kPressFitInterference = 0.1;
/// Straight length kept in front of a nozzle: socket, taper, and 1 mm so the
/// first bend starts clear of the taper.
inline constexpr double kSocketStraight = kSocketDepth + kSocketTaper + 1.0;

/// Outer radius of the widened socket around a nozzle of diameter `port_od`.
inline double socketOuterRadius(double port_od, const CircuitParams& params) {
  const double wall = (params.tube_outer_d - params.tube_inner_d) / 2;
  return (port_od - kPressFitInterference) / 2 + kSocketChamfer + wall;
}

/// The grid cell a tube leaves a port from: for gate nozzles, the nearest
/// cell beyond the socket run and outside the owning footprint's inflated
/// outline; for external terminals, the nearest cell.
inline GridIndex accessCell(const GridWorld& w, const PortAnchor& a, const CircuitParams& params) {
  if (!a.on_gate) return w.nearest(a.site.position);
  const double reach = std::max(obstacleInflation(params), kSocketStraight) + 1.5 * w.pitch();
  return w.nearest(a.site.position + a.site.direction * reach);
}

/// Blocks footprints (inflated by tube radius + clearance), previously routed
/// tubes, and socket runs, then carves port access cells open. Throws
/// RoutingError when a port's access cell is covered by a footprint.
inline GridWorld buildGrid(const CircuitParams& params, std::span<const Box> footprints,
                           std::span<const PortAnchor> ports,
                           std::span<const RoutePath> existing_tubes = {});

/// Blocks every cell within `radius` + clearance of the path polyline,
/// except cells tagged as ports.
inline void rasterizePath(GridWorld& w, const RoutePath& path, double radius) {
  if (path.nodes.empty()) return;
  const double reach = radius + w.clearance();
  std::vector<Vec3> pts;
  for (const auto& n : path.nodes) pts.push_back(w.world(n));
  auto stamp = [&](const Vec3& a, const Vec3& b) {
    Box region{a, a};
    region.expand(b);
    w.forEachCellNear(region.inflated(reach), [&](const GridIndex& g) {
      if (w.tag(g) == CellTag::Port) return;
      if (distanceToSegment(w.world(g), a, b) <= reach + 1e-9) w.block(g, CellTag::Tube);
    });
  };
  if (pts.size() == 1) stamp(pts[0], pts[0]);
  for (std::size_t s = 1; s < pts.size(); ++s) stamp(pts[s - 1], pts[s]);
}

inline GridWorld buildGrid(const CircuitParams& params, std::span<const Box> footprints,
                           std::span<const PortAnchor> ports,
                           std::span<const RoutePath> existing_tubes) {
  GridWorld w = emptyGrid(params);
  const double infl = obstacleInflation(params);
  for (const Box& fp : footprints) {
    const Box grown = fp.inflated(infl);
    w.forEachCellNear(grown, [&](const GridIndex& g) {
      if (grown.contains(w.world(g))) w.block(g, CellTag::Footprint);
    });
  }
  for (const RoutePath& t : existing_tubes) rasterizePath(w, t, params.tube_outer_d / 2);

  std::vector<GridIndex> cells;
  for (const PortAnchor& a : ports) {
    const GridIndex cell = accessCell(w, a, params);
    const Vec3 c = w.world(cell);
    for (const Box& fp : footprints)
      if (fp.inflated(infl).contains(c))
        throw RoutingError("port cell " + cell.str() + " at (" + detail::formatNumber(c.x) + ", " +
                           detail::formatNumber(c.y) + ", " + detail::formatNumber(c.z) +
                           ") is blocked by a footprint (placement too tight)");
    cells.push_back(cell);
    if (!a.on_gate) continue;
    // Keep other tubes clear of the widened socket in front of the nozzle.
    const Vec3 from = a.site.position;
    const double run = kSocketStraight;
    const Vec3 to = from + a.site.direction * run;
    const double keep = std::max(infl, socketOuterRadius(a.site.outer_d, params) + params.clearance +
                                           params.tube_outer_d / 2);
    Box region{from, from};
    region.expand(to);
    w.forEachCellNear(region.inflated(keep), [&](const GridIndex& g) {
      const Vec3 rel = w.world(g) - from;
      const double along = dot(rel, a.site.direction);
      if (g == cell || along < 0 || along > run || w.blocked(g)) return;
      if (norm(rel - a.site.direction * along) <= keep) w.block(g, CellTag::KeepOut);
    });
  }
  for (const GridIndex& cell : cells) w.open(cell, CellTag::Port);
  return w;
}

// ---------------------------------------------------------------------------
// Text voxel dumps: one block per layer, `layer <k>` header, rows by j,
// one character per cell.

inline char cellChar(CellTag t, bool blocked) {
  if (!blocked) return t == CellTag::Port ? 'P' : '.';
  switch (t) {
    case CellTag::Tube: return 'o';
    case CellTag::KeepOut: return 'x';
    default: return '#';
  }
}

inline std::string voxelDump(const GridWorld& w, const RoutePath* path = nullptr) {
  const auto [ni, nj, nk] = w.dims();
  std::vector<std::string> rows(static_cast<std::size_t>(nj) * nk, std::string(ni, '.'));
  for (int k = 0; k < nk; ++k)
    for (int j = 0; j < nj; ++j)
      for (int i = 0; i < ni; ++i) {
        const GridIndex g{i, j, k};
        rows[static_cast<std::size_t>(k) * nj + j][i] = cellChar(w.tag(g), w.blocked(g));
      }
  if (path) {
    for (std::size_t n = 0; n < path->nodes.size(); ++n) {
      const auto& g = path->nodes[n];
      char c = n == 0 ? 'S' : n + 1 == path->nodes.size() ? 'G' : '*';
      rows[static_cast<std::size_t>(g.k) * nj + g.j][g.i] = c;
    }
  }
  std::ostringstream os;
  for (int k = 0; k < nk; ++k) {
    os << "layer " << k << "\n";
    for (int j = 0; j < nj; ++j) os << rows[static_cast<std::size_t>(k) * nj + j] << "\n";
  }
  return os.str();
}

/// Reads obstacles from a voxel dump: `#`, `o` and `x` are blocked. Grid
/// dimensions are inferred from the text.
inline GridWorld parseVoxelDump(std::string_view text, double pitch = 1.0) {
  std::vector<std::vector<std::string>> layers;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("layer", 0) == 0) {
      layers.emplace_back();
      continue;
    }
    if (layers.empty()) throw Error("voxel dump must start with a 'layer' header");
    layers.back().push_back(line);
  }
  if (layers.empty() || layers[0].empty()) throw Error("empty voxel dump");
  const int nk = static_cast<int>(layers.size());
  const int nj = static_cast<int>(layers[0].size());
  const int ni = static_cast<int>(layers[0][0].size());
  GridWorld w(ni, nj, nk, pitch);
  for (int k = 0; k < nk; ++k) {
    if (static_cast<int>(layers[k].size()) != nj) throw Error("voxel dump layers differ in size");
    for (int j = 0; j < nj; ++j) {
      if (static_cast<int>(layers[k][j].size()) != ni) throw Error("voxel dump rows differ in size");
      for (int i = 0; i < ni; ++i) {
        const char c = layers[k][j][i];
        if (c == '#') w.block({i, j, k}, CellTag::Footprint);
        else if (c == 'o') w.block({i, j, k}, CellTag::Tube);
        else if (c == 'x') w.block({i, j, k}, CellTag::KeepOut);
      }
    }
  }
  return w;
}

}  // namespace fluidcc
