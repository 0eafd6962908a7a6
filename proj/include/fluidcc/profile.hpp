#pragma once

// Cross-section sizing shared by routing (junction spacing) and meshing.

#include <algorithm>
#include <cmath>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/geometry.hpp"

namespace fluidcc {

struct SweepProfile {
  int segments = 16;
  double inner_radius = 0.75;
  double outer_radius = 1.25;

  void check() const {
    if (segments < 8) throw MeshError("sweep profile needs at least 8 segments");
    if (!(inner_radius > 0 && outer_radius > inner_radius))
      throw MeshError("sweep profile needs outer radius > inner radius > 0");
  }

  double wall() const { return outer_radius - inner_radius; }

  // The outer polygon circumscribes the nominal outer circle and the bore
  // polygon is inscribed in the nominal bore, so the wall is never thinner
  // than outer - inner anywhere around the section.
  double outerVertexRadius() const { return outer_radius / std::cos(kPi / segments); }
  double innerVertexRadius() const { return inner_radius; }
};

/// Hollow spherical three-way connector sized from the tube profile.
struct JunctionSizing {
  double outer_radius = 0;  // sphere
  double inner_radius = 0;  // sphere cavity
  double min_separation = 0;  // radians between incident tube axes

  explicit JunctionSizing(const SweepProfile& p) {
    outer_radius = 2.5 * p.outer_radius;
    inner_radius = outer_radius - p.wall();
    const double rim = p.outerVertexRadius();
    const double a = std::asin(std::min(1.0, rim / outer_radius));
    // Stub cylinders stay disjoint outside the sphere when
    // sin(theta / 2) >= tan(a); one degree of slack on top, and never below
    // the 15 degree floor.
    const double geometric = 2 * std::asin(std::min(1.0, std::tan(a))) + radians(1.0);
    min_separation = std::max(radians(15.0), geometric);
  }

  /// Axial distance from the sphere centre to where a stub meets the outer
  /// sphere, and to the stub's open end.
  double outerRimDistance(const SweepProfile& p) const {
    const double rim = p.outerVertexRadius();
    return std::sqrt(outer_radius * outer_radius - rim * rim);
  }
  double stubEndDistance(const SweepProfile& p) const {
    return outerRimDistance(p) + 0.25 * p.outer_radius;
  }
};

}  // namespace fluidcc
