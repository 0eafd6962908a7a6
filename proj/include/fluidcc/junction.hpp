#pragma once

// Hollow spherical three-way connector. The sphere walls are triangulated as
// the convex hull of a Fibonacci point set plus the opening rims; each opening
// continues into a short stub whose end ring matches the incident tube's end
// ring vertex for vertex.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/geometry.hpp"
#include "fluidcc/hull.hpp"
#include "fluidcc/mesh.hpp"
#include "fluidcc/profile.hpp"

namespace fluidcc {

/// One opening: outward axis and the section-frame normal shared with the
/// incident tube's end ring.
struct JunctionPort {
  Vec3 direction;
  Vec3 normal;
};

namespace detail {

inline std::vector<Vec3> fibonacciSphere(int n) {
  std::vector<Vec3> out;
  const double golden = kPi * (3 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1 - (2.0 * i + 1) / n;
    const double r = std::sqrt(std::max(0.0, 1 - z * z));
    const double phi = golden * i;
    out.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return out;
}

struct SphereWall {
  std::vector<std::uint32_t> meshIndex;  // hull point -> mesh vertex
  std::vector<Triangle> triangles;       // in mesh indices, outward-facing
  std::vector<std::vector<std::uint32_t>> rims;  // per opening, S mesh indices
};

// Perforated sphere surface: rim h, vertex k sits at axial `axial` along port
// h and radius `ringR` in its frame.
inline SphereWall perforatedSphere(TriMesh& m, const Vec3& c, double radius,
                                   std::span<const JunctionPort> ports, double ringR,
                                   double axial, int segments, int samples) {
  const double holeAngle = std::asin(ringR / radius);
  std::vector<Vec3> pts;
  std::vector<int> kind;  // -1 sample, -2 pole, otherwise rim of opening
  for (const auto& ph : ports) {
    pts.push_back(c + ph.direction * radius);
    kind.push_back(-2);
  }
  for (const auto& q : fibonacciSphere(samples)) {
    bool keep = true;
    for (const auto& ph : ports)
      if (angleBetween(q, ph.direction) < 1.3 * holeAngle) keep = false;
    if (keep) {
      pts.push_back(c + q * radius);
      kind.push_back(-1);
    }
  }
  for (std::size_t h = 0; h < ports.size(); ++h) {
    const Vec3 d = ports[h].direction, n = ports[h].normal, b = cross(d, n);
    for (int k = 0; k < segments; ++k) {
      const double phi = 2 * kPi * k / segments;
      pts.push_back(c + d * axial + (n * std::cos(phi) + b * std::sin(phi)) * ringR);
      kind.push_back(static_cast<int>(h));
    }
  }

  const auto hull = convexHull(pts);
  std::vector<int> used(pts.size(), 0);
  for (const auto& t : hull)
    for (auto v : t) used[v] = 1;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!used[i]) throw MeshError("junction triangulation dropped a sphere point");

  SphereWall w;
  w.meshIndex.assign(pts.size(), 0);
  w.rims.assign(ports.size(), {});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (kind[i] == -2) continue;
    w.meshIndex[i] = m.addVertex(pts[i]);
    if (kind[i] >= 0) w.rims[kind[i]].push_back(w.meshIndex[i]);
  }
  std::vector<int> fan(ports.size(), 0);
  for (const auto& t : hull) {
    int pole = -1;
    for (auto v : t)
      if (kind[v] == -2) pole = static_cast<int>(v);
    if (pole < 0) {
      w.triangles.push_back({w.meshIndex[t[0]], w.meshIndex[t[1]], w.meshIndex[t[2]]});
      continue;
    }
    for (auto v : t)
      if (static_cast<int>(v) != pole && kind[v] != pole)
        throw MeshError("junction opening is not cleanly separated from the sphere wall");
    ++fan[pole];
  }
  for (std::size_t h = 0; h < ports.size(); ++h)
    if (fan[h] != segments) throw MeshError("junction opening triangulated incorrectly");
  return w;
}

}  // namespace detail

/// Builds the connector around centre `c`. Requires exactly three openings
/// separated by at least the sizing's minimum angle.
inline TriMesh junctionConnector(const Vec3& c, std::vector<JunctionPort> ports,
                                 const SweepProfile& profile) {
  profile.check();
  if (ports.size() != 3)
    throw MeshError("junction needs exactly 3 incident tubes, got " + std::to_string(ports.size()));
  const JunctionSizing size(profile);
  for (auto& p : ports) {
    if (norm(p.direction) < 1e-12) throw MeshError("junction direction is zero");
    p.direction = normalized(p.direction);
    Vec3 n = p.normal - p.direction * dot(p.normal, p.direction);
    if (norm(n) < 1e-9) n = anyPerpendicular(p.direction);
    p.normal = normalized(n);
  }
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) {
      const double ang = angleBetween(ports[a].direction, ports[b].direction);
      if (ang < size.min_separation)
        throw MeshError("junction openings overlap: tube directions " +
                        std::to_string(degrees(ang)) + " deg apart, need " +
                        std::to_string(degrees(size.min_separation)));
    }

  const int S = profile.segments;
  const double ringO = profile.outerVertexRadius();
  const double ringI = profile.innerVertexRadius();
  const double rs = size.outer_radius, ri = size.inner_radius;
  const double end = size.stubEndDistance(profile);

  TriMesh m;
  m.label = "junction";
  const auto outer = detail::perforatedSphere(m, c, rs, ports, ringO, size.outerRimDistance(profile),
                                              S, 240);
  const auto inner = detail::perforatedSphere(m, c, ri, ports, ringI,
                                              std::sqrt(ri * ri - ringI * ringI), S, 180);
  for (const auto& t : outer.triangles) m.triangles.push_back(t);
  for (const auto& t : inner.triangles) m.triangles.push_back({t[0], t[2], t[1]});

  for (std::size_t h = 0; h < 3; ++h) {
    const Vec3 d = ports[h].direction, n = ports[h].normal, b = cross(d, n);
    std::vector<std::uint32_t> eo(S), ei(S);
    for (int k = 0; k < S; ++k) {
      const Vec3 radial = n * std::cos(2 * kPi * k / S) + b * std::sin(2 * kPi * k / S);
      eo[k] = m.addVertex(c + d * end + radial * ringO);
      ei[k] = m.addVertex(c + d * end + radial * ringI);
    }
    const auto& ro = outer.rims[h];
    const auto& rn = inner.rims[h];
    for (int k = 0; k < S; ++k) {
      const int k1 = (k + 1) % S;
      m.triangles.push_back({ro[k], ro[k1], eo[k1]});
      m.triangles.push_back({ro[k], eo[k1], eo[k]});
      m.triangles.push_back({rn[k], ei[k1], rn[k1]});
      m.triangles.push_back({rn[k], ei[k], ei[k1]});
      m.triangles.push_back({eo[k], ei[k1], ei[k]});
      m.triangles.push_back({eo[k], eo[k1], ei[k1]});
    }
  }
  return m;
}

/// Convenience overload deriving each opening's frame from its direction.
inline TriMesh junctionConnector(const Vec3& c, std::span<const Vec3> directions,
                                 const SweepProfile& profile) {
  std::vector<JunctionPort> ports;
  for (const auto& d : directions) ports.push_back({d, anyPerpendicular(normalized(d))});
  return junctionConnector(c, std::move(ports), profile);
}

}  // namespace fluidcc
