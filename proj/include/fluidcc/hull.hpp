#pragma once

// Incremental 3D convex hull. Used to triangulate point sets that lie on a
// sphere, where every input point is extreme.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/geometry.hpp"

namespace fluidcc {

/// Outward-facing hull triangles as indices into `pts`. Throws MeshError on
/// fewer than four non-coplanar points.
inline std::vector<std::array<std::uint32_t, 3>> convexHull(std::span<const Vec3> pts) {
  using Tri = std::array<std::uint32_t, 3>;
  const std::size_t n = pts.size();
  if (n < 4) throw MeshError("convex hull needs at least 4 points");

  double scale = 0;
  for (const auto& p : pts) scale = std::max(scale, norm(p - pts[0]));
  if (scale == 0) throw MeshError("convex hull of coincident points");
  const double eps = 1e-12 * scale * scale * scale;

  // Initial tetrahedron from well-spread points.
  std::uint32_t i0 = 0, i1 = 0, i2 = 0, i3 = 0;
  double best = -1;
  for (std::uint32_t i = 0; i < n; ++i)
    if (double d = distance(pts[i], pts[i0]); d > best) best = d, i1 = i;
  best = -1;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double d = norm(cross(pts[i1] - pts[i0], pts[i] - pts[i0]));
    if (d > best) best = d, i2 = i;
  }
  best = -1;
  const Vec3 n012 = cross(pts[i1] - pts[i0], pts[i2] - pts[i0]);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double d = std::abs(dot(n012, pts[i] - pts[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) throw MeshError("convex hull input is degenerate (coplanar points)");

  std::vector<Tri> faces;
  std::vector<char> alive;
  std::unordered_map<std::uint64_t, std::uint32_t> edgeOwner;  // directed edge -> face
  auto key = [](std::uint32_t a, std::uint32_t b) { return (std::uint64_t(a) << 32) | b; };
  auto addFace = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    const auto f = static_cast<std::uint32_t>(faces.size());
    faces.push_back({a, b, c});
    alive.push_back(1);
    edgeOwner[key(a, b)] = f;
    edgeOwner[key(b, c)] = f;
    edgeOwner[key(c, a)] = f;
  };
  auto above = [&](const Tri& t, const Vec3& p) {
    const Vec3 nrm = cross(pts[t[1]] - pts[t[0]], pts[t[2]] - pts[t[0]]);
    return dot(nrm, p - pts[t[0]]) > eps;
  };

  if (dot(n012, pts[i3] - pts[i0]) > 0) std::swap(i1, i2);
  addFace(i0, i1, i2);
  addFace(i0, i3, i1);
  addFace(i1, i3, i2);
  addFace(i2, i3, i0);

  std::vector<std::uint32_t> visible;
  for (std::uint32_t p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    visible.clear();
    for (std::uint32_t f = 0; f < faces.size(); ++f)
      if (alive[f] && above(faces[f], pts[p])) visible.push_back(f);
    if (visible.empty()) continue;  // interior or on the hull surface

    for (auto f : visible) alive[f] = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
    for (auto f : visible) {
      const Tri& t = faces[f];
      for (int e = 0; e < 3; ++e) {
        const std::uint32_t a = t[e], b = t[(e + 1) % 3];
        const auto it = edgeOwner.find(key(b, a));
        if (it != edgeOwner.end() && alive[it->second]) horizon.emplace_back(a, b);
      }
    }
    for (auto f : visible) {
      const Tri& t = faces[f];
      for (int e = 0; e < 3; ++e) {
        const auto it = edgeOwner.find(key(t[e], t[(e + 1) % 3]));
        if (it != edgeOwner.end() && it->second == f) edgeOwner.erase(it);
      }
    }
    for (const auto& [a, b] : horizon) addFace(a, b, p);
  }

  std::vector<Tri> out;
  for (std::size_t f = 0; f < faces.size(); ++f)
    if (alive[f]) out.push_back(faces[f]);
  return out;
}

}  // namespace fluidcc
