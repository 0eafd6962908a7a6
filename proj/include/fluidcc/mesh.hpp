#pragma once

// Triangle meshes for printable tubes: polyline filleting, swept double-wall
// tubes with open bores, press-fit sockets, and a manifold checker.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/geometry.hpp"
#include "fluidcc/profile.hpp"

namespace fluidcc {

using Triangle = std::array<std::uint32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::string label;

  std::uint32_t addVertex(const Vec3& v) {
    vertices.push_back(v);
    return static_cast<std::uint32_t>(vertices.size() - 1);
  }

  Box bounds() const {
    if (vertices.empty()) return {};
    Box b{vertices[0], vertices[0]};
    for (const auto& v : vertices) b.expand(v);
    return b;
  }

  /// Signed enclosed volume; positive for outward-facing closed shells.
  double signedVolume() const {
    double v = 0;
    for (const auto& t : triangles)
      v += dot(vertices[t[0]], cross(vertices[t[1]], vertices[t[2]])) / 6.0;
    return v;
  }
};

inline double triangleArea(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

// ---------------------------------------------------------------------------
// Manifold check

struct WatertightReport {
  std::size_t non_manifold_edges = 0;  // edges not shared by exactly two triangles
  std::size_t boundary_edges = 0;      // the subset shared by exactly one triangle
  std::size_t winding_conflicts = 0;   // edge pairs traversed in the same direction
  std::size_t degenerate_triangles = 0;
  std::size_t bad_indices = 0;

  bool ok() const {
    return non_manifold_edges == 0 && winding_conflicts == 0 && degenerate_triangles == 0 &&
           bad_indices == 0;
  }
};

inline constexpr double kDegenerateArea = 1e-9;  // mm^2

inline WatertightReport watertightCheck(const TriMesh& m) {
  WatertightReport r;
  // undirected edge -> (forward uses, backward uses)
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<int, int>> edges;
  for (const auto& t : m.triangles) {
    if (t[0] >= m.vertices.size() || t[1] >= m.vertices.size() || t[2] >= m.vertices.size()) {
      ++r.bad_indices;
      continue;
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] ||
        triangleArea(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) < kDegenerateArea)
      ++r.degenerate_triangles;
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = t[e], b = t[(e + 1) % 3];
      if (a == b) continue;
      auto& uses = edges[{std::min(a, b), std::max(a, b)}];
      (a < b ? uses.first : uses.second)++;
    }
  }
  for (const auto& [edge, uses] : edges) {
    const int total = uses.first + uses.second;
    if (total != 2) {
      ++r.non_manifold_edges;
      if (total == 1) ++r.boundary_edges;
    } else if (uses.first != 1) {
      ++r.winding_conflicts;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Polyline filleting

namespace detail {

inline std::vector<Vec3> dedupe(std::span<const Vec3> pts, double tol = 1e-9) {
  std::vector<Vec3> out;
  for (const auto& p : pts)
    if (out.empty() || distance(out.back(), p) > tol) out.push_back(p);
  return out;
}

}  // namespace detail

/// Replaces each interior corner by a circular arc of `radius` (clamped so the
/// tangent points stay within half of either adjacent segment), sampled with
/// `subdiv` chords. Endpoints are kept.
inline std::vector<Vec3> filletPolyline(std::span<const Vec3> pts, double radius, int subdiv) {
  if (pts.size() < 3 || radius <= 0 || subdiv < 1) return {pts.begin(), pts.end()};
  std::vector<Vec3> out{pts.front()};
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec3 b = pts[i];
    const Vec3 toA = pts[i - 1] - b, toC = pts[i + 1] - b;
    const double la = norm(toA), lc = norm(toC);
    if (la == 0 || lc == 0) {
      out.push_back(b);
      continue;
    }
    const Vec3 u = toA / la, v = toC / lc;
    const double interior = angleBetween(u, v);
    const double turn = kPi - interior;
    if (turn < 1e-6 || interior < 1e-6) {
      out.push_back(b);
      continue;
    }
    const double tanHalf = std::tan(turn / 2);
    double setback = radius * tanHalf;
    double r = radius;
    const double limit = 0.5 * std::min(la, lc);
    if (setback > limit) {
      setback = limit;
      r = setback / tanHalf;
    }
    const Vec3 t1 = b + u * setback, t2 = b + v * setback;
    const Vec3 centre = b + normalized(u + v) * (r / std::cos(turn / 2));
    const Vec3 a0 = t1 - centre;
    const Vec3 a1 = normalized((t2 - centre) - a0 * (dot(t2 - centre, a0) / dot(a0, a0))) * r;
    for (int s = 0; s <= subdiv; ++s) {
      const double phi = turn * s / subdiv;
      out.push_back(s == 0 ? t1 : s == subdiv ? t2 : centre + a0 * std::cos(phi) + a1 * std::sin(phi));
    }
  }
  out.push_back(pts.back());
  return detail::dedupe(out, 1e-6);
}

// ---------------------------------------------------------------------------
// Swept tubes

struct TubeStation {
  Vec3 point;
  double inner_r = 0;  // nominal bore radius
  double outer_r = 0;  // nominal outer radius
};

struct TubeSpine {
  std::vector<TubeStation> stations;

  static TubeSpine uniform(std::span<const Vec3> pts, const SweepProfile& p) {
    TubeSpine s;
    for (const auto& v : pts) s.stations.push_back({v, p.inner_radius, p.outer_radius});
    return s;
  }

  double length() const {
    double l = 0;
    for (std::size_t i = 1; i < stations.size(); ++i)
      l += distance(stations[i - 1].point, stations[i].point);
    return l;
  }
};

/// Orthonormal section frame: `normal` and `binormal` span the ring plane.
struct Frame {
  Vec3 tangent, normal, binormal;
};

struct SweepResult {
  TriMesh mesh;
  Frame start_frame, end_frame;
  std::vector<std::string> warnings;
};

inline constexpr double kMinPrintableWall = 0.4;  // mm

namespace detail {

inline std::vector<Vec3> stationTangents(std::span<const Vec3> pts) {
  const std::size_t n = pts.size();
  std::vector<Vec3> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 in = i > 0 ? normalized(pts[i] - pts[i - 1]) : Vec3{};
    const Vec3 out = i + 1 < n ? normalized(pts[i + 1] - pts[i]) : Vec3{};
    Vec3 sum = in + out;
    if (i == 0) sum = out;
    else if (i + 1 == n) sum = in;
    t[i] = norm(sum) > 1e-9 ? normalized(sum) : in;
  }
  return t;
}

// Rotation-minimising frames by double reflection.
inline std::vector<Frame> rotationMinimizingFrames(std::span<const Vec3> pts,
                                                   std::optional<Vec3> initialNormal = std::nullopt) {
  const auto tangents = stationTangents(pts);
  std::vector<Frame> frames(pts.size());
  Vec3 r = initialNormal ? *initialNormal : anyPerpendicular(tangents[0]);
  r = normalized(r - tangents[0] * dot(r, tangents[0]));
  frames[0] = {tangents[0], r, cross(tangents[0], r)};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec3 v1 = pts[i + 1] - pts[i];
    const double c1 = dot(v1, v1);
    const Vec3 rl = frames[i].normal - v1 * (2 / c1 * dot(v1, frames[i].normal));
    const Vec3 tl = frames[i].tangent - v1 * (2 / c1 * dot(v1, frames[i].tangent));
    const Vec3 t1 = tangents[i + 1];
    const Vec3 v2 = t1 - tl;
    const double c2 = dot(v2, v2);
    Vec3 rn = c2 > 1e-18 ? rl - v2 * (2 / c2 * dot(v2, rl)) : rl;
    rn = normalized(rn - t1 * dot(rn, t1));
    frames[i + 1] = {t1, rn, cross(t1, rn)};
  }
  return frames;
}

}  // namespace detail

/// Sweeps a double-walled tube along the spine. Outer vertices sit on a
/// polygon circumscribing the nominal outer radius, bore vertices on one
/// inscribed in the nominal bore. Both ends are closed by annuli, leaving the
/// bore open. Triangle count is 4*S*(P-1) + 4*S for P stations, S segments.
inline SweepResult sweepSpine(const TubeSpine& spine, int segments,
                              std::optional<Vec3> initialNormal = std::nullopt) {
  if (segments < 8) throw MeshError("sweep needs at least 8 segments");
  std::vector<Vec3> pts;
  for (const auto& s : spine.stations) pts.push_back(s.point);
  if (pts.size() < 2) throw MeshError("tube spine needs at least 2 points");
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (distance(pts[i - 1], pts[i]) <= 1e-9) throw MeshError("tube spine has coincident points");
  for (const auto& s : spine.stations)
    if (!(s.inner_r > 0 && s.outer_r > s.inner_r))
      throw MeshError("tube station needs outer radius > inner radius > 0");

  SweepResult res;
  const auto frames = detail::rotationMinimizingFrames(pts, initialNormal);
  res.start_frame = frames.front();
  res.end_frame = frames.back();

  const int S = segments;
  const double polygonScale = 1.0 / std::cos(kPi / S);
  const std::size_t P = pts.size();
  TriMesh& m = res.mesh;
  m.vertices.reserve(2 * P * S);
  // Vertex layout: station i, outer ring at [2*i*S, 2*i*S + S), inner after it.
  for (std::size_t i = 0; i < P; ++i) {
    const Frame& f = frames[i];
    const auto& st = spine.stations[i];
    for (int ring = 0; ring < 2; ++ring) {
      const double rad = ring == 0 ? st.outer_r * polygonScale : st.inner_r;
      for (int k = 0; k < S; ++k) {
        const double phi = 2 * kPi * k / S;
        m.addVertex(pts[i] + (f.normal * std::cos(phi) + f.binormal * std::sin(phi)) * rad);
      }
    }
  }
  auto O = [&](std::size_t i, int k) { return static_cast<std::uint32_t>(2 * i * S + (k % S)); };
  auto I = [&](std::size_t i, int k) { return static_cast<std::uint32_t>(2 * i * S + S + (k % S)); };

  for (std::size_t i = 0; i + 1 < P; ++i)
    for (int k = 0; k < S; ++k) {
      m.triangles.push_back({O(i, k), O(i, k + 1), O(i + 1, k + 1)});
      m.triangles.push_back({O(i, k), O(i + 1, k + 1), O(i + 1, k)});
      m.triangles.push_back({I(i, k), I(i + 1, k + 1), I(i, k + 1)});
      m.triangles.push_back({I(i, k), I(i + 1, k), I(i + 1, k + 1)});
    }
  for (int k = 0; k < S; ++k) {
    m.triangles.push_back({O(0, k), I(0, k), I(0, k + 1)});
    m.triangles.push_back({O(0, k), I(0, k + 1), O(0, k + 1)});
    m.triangles.push_back({O(P - 1, k), I(P - 1, k + 1), I(P - 1, k)});
    m.triangles.push_back({O(P - 1, k), O(P - 1, k + 1), I(P - 1, k + 1)});
  }

  double minWall = 1e300;
  for (const auto& s : spine.stations) minWall = std::min(minWall, s.outer_r - s.inner_r);
  if (minWall < kMinPrintableWall)
    res.warnings.push_back("tube wall " + std::to_string(minWall) + " mm is below the printable " +
                           std::to_string(kMinPrintableWall) + " mm");

  // Each ring is mitred by half the turn at its station; two neighbouring
  // rings cross on the inside of a bend once their combined setback exceeds
  // the segment between them.
  std::vector<double> setback(P, 0.0);
  for (std::size_t i = 1; i + 1 < P; ++i) {
    const double turn = angleBetween(pts[i] - pts[i - 1], pts[i + 1] - pts[i]);
    setback[i] = spine.stations[i].outer_r * polygonScale * std::tan(std::min(turn, kPi * 0.999) / 2);
  }
  for (std::size_t i = 0; i + 1 < P; ++i)
    if (setback[i] + setback[i + 1] > distance(pts[i], pts[i + 1]) + 1e-9) {
      res.warnings.push_back("possible self-intersection near station " + std::to_string(i) +
                             ": bend radius is below the tube's outer radius");
      break;
    }
  return res;
}

inline SweepResult sweepTube(std::span<const Vec3> polyline, const SweepProfile& profile,
                             std::optional<Vec3> initialNormal = std::nullopt) {
  profile.check();
  return sweepSpine(TubeSpine::uniform(polyline, profile), profile.segments, initialNormal);
}

// ---------------------------------------------------------------------------
// Press-fit sockets

struct PressFitSpec {
  double port_outer_d = 4.0;
  double interference = 0.1;
  double depth = kDefaultDepth;  // socket length along the tube
  double chamfer = 0.5;          // lead-in, 45 degrees
  double taper = 0.5;            // transition back to the plain tube

  static constexpr double kDefaultDepth = 4.0;

  double boreDiameter() const { return port_outer_d - interference; }
};

namespace detail {

// Inserts a station at arc length `s` from the first station unless one
// already lies within `tol`.
inline void insertStationAt(TubeSpine& spine, double s, double tol = 1e-6) {
  double acc = 0;
  auto& st = spine.stations;
  for (std::size_t i = 1; i < st.size(); ++i) {
    const double seg = distance(st[i - 1].point, st[i].point);
    if (s <= acc + seg + tol) {
      if (std::abs(s - acc) <= tol || std::abs(s - acc - seg) <= tol) return;
      const double t = (s - acc) / seg;
      TubeStation mid{st[i - 1].point + (st[i].point - st[i - 1].point) * t,
                      st[i - 1].inner_r + (st[i].inner_r - st[i - 1].inner_r) * t,
                      st[i - 1].outer_r + (st[i].outer_r - st[i - 1].outer_r) * t};
      st.insert(st.begin() + static_cast<std::ptrdiff_t>(i), mid);
      return;
    }
    acc += seg;
  }
}

}  // namespace detail

/// Widens the last `depth` mm of the bore at one end of the spine into a
/// socket of diameter (port OD - interference), with a chamfered mouth and a
/// short taper back to the plain tube. The socket wall keeps the tube's wall
/// thickness behind the chamfer.
inline TubeSpine pressFitTip(TubeSpine spine, bool at_start, const PressFitSpec& spec) {
  if (spine.stations.size() < 2) throw MeshError("press fit needs a tube of at least 2 points");
  if (!at_start) std::reverse(spine.stations.begin(), spine.stations.end());
  const TubeStation tip = spine.stations.front();
  if (!(spec.port_outer_d > 2 * tip.inner_r))
    throw MeshError("port diameter " + std::to_string(spec.port_outer_d) +
                    " mm does not exceed the tube bore " + std::to_string(2 * tip.inner_r) +
                    " mm; no socket possible");
  if (!(spec.interference >= 0 && spec.interference < spec.port_outer_d))
    throw MeshError("press-fit interference must lie in [0, port diameter)");

  const double wall = tip.outer_r - tip.inner_r;
  const double socketR = spec.boreDiameter() / 2;
  const double socketOuter = socketR + spec.chamfer + wall;
  const double total = spine.length();
  for (double s : {spec.chamfer, spec.depth, spec.depth + spec.taper})
    if (s < total) detail::insertStationAt(spine, s);

  double acc = 0;
  for (std::size_t i = 0; i < spine.stations.size(); ++i) {
    if (i > 0) acc += distance(spine.stations[i - 1].point, spine.stations[i].point);
    auto& st = spine.stations[i];
    const double d = acc;
    if (d <= spec.chamfer + 1e-9) {
      st.inner_r = socketR + spec.chamfer * (1 - d / spec.chamfer);
      st.outer_r = socketOuter;
    } else if (d <= spec.depth + 1e-9) {
      st.inner_r = socketR;
      st.outer_r = socketOuter;
    } else if (d < spec.depth + spec.taper - 1e-9) {
      const double t = (d - spec.depth) / spec.taper;
      st.inner_r = socketR + (tip.inner_r - socketR) * t;
      st.outer_r = socketOuter + (tip.outer_r - socketOuter) * t;
    }
  }
  if (!at_start) std::reverse(spine.stations.begin(), spine.stations.end());
  return spine;
}

}  // namespace fluidcc
