#pragma once

// Turns a routed network into printable shells: one swept tube per path
// (filleted, press-fit sockets at gate nozzles) and one connector per
// junction, in bed coordinates.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fluidcc/grid.hpp"
#include "fluidcc/junction.hpp"
#include "fluidcc/mesh.hpp"
#include "fluidcc/netbuild.hpp"

namespace fluidcc {

struct SceneOptions {
  int segments = 16;
  std::optional<double> fillet_radius;  // default: 2 x tube outer radius
  int subdiv = 6;
  double interference = kPressFitInterference;
};

struct SceneStats {
  std::size_t shell_count = 0;
  std::size_t triangle_count = 0;
  Box bounds;
  double tube_length_mm = 0;  // swept centreline length over all paths
};

struct Scene {
  std::vector<TriMesh> shells;
  SceneStats stats;
  std::vector<std::string> warnings;
};

namespace detail {

/// Extra straight length a tube keeps beyond the junction stub end before
/// turning.
inline constexpr double kJunctionLead = 0.5;

struct StubAxis {
  Vec3 direction;
  std::size_t keep_from = 1;  // path nodes before this one are replaced by the stub run
  bool lead = true;           // add a short straight run past the stub end
};

inline SweepProfile pathProfile(const RoutedNetwork& net, const CircuitParams& params, PathId id,
                                int segments) {
  const auto it = net.tube_sizes.find(id);
  const TubeSize size = it != net.tube_sizes.end() ? it->second
                                                  : TubeSize{params.tube_inner_d, params.tube_outer_d};
  return {segments, size.inner_d / 2, size.outer_d / 2};
}

struct PathEnd {
  std::optional<Terminal> terminal;
  std::optional<std::size_t> junction;
};

}  // namespace detail

inline Scene assembleScene(const RoutedNetwork& net, const CircuitParams& params,
                           const SceneOptions& opt = {}) {
  const GridWorld& w = net.world;
  std::map<PathId, std::array<detail::PathEnd, 2>> ends;
  for (const auto& [t, ref] : net.terminals) {
    const auto& p = net.registry.at(ref.path);
    ends[ref.path][ref.node == 0 ? 0 : 1].terminal = t;
    if (ref.node != 0 && ref.node + 1 != p.nodes.size())
      throw MeshError("terminal " + t.str() + " is not at a tube end");
  }
  for (std::size_t j = 0; j < net.junctions.size(); ++j)
    for (const auto& inc : net.junctions[j].incident) ends[inc.path][inc.at_start ? 0 : 1].junction = j;

  // Stub axes. Each stub aims at the first path node beyond its open end so
  // the tube leaves it straight; when that would crowd the openings, the
  // stubs follow the first grid step instead and the tube keeps a short
  // straight lead before turning.
  std::map<std::pair<std::size_t, PathId>, detail::StubAxis> axes;
  for (std::size_t j = 0; j < net.junctions.size(); ++j) {
    const Junction& jn = net.junctions[j];
    const SweepProfile profile = detail::pathProfile(net, params, jn.incident[0].path, opt.segments);
    const JunctionSizing sizing(profile);
    const double stubEnd = sizing.stubEndDistance(profile);
    const Vec3 c = w.world(jn.point);
    std::array<detail::StubAxis, 3> aimed, stepped;
    for (int q = 0; q < 3; ++q) {
      const auto& nodes = net.registry.at(jn.incident[q].path).nodes;
      auto node = [&](std::size_t k) {
        return w.world(jn.incident[q].at_start ? nodes[k] : nodes[nodes.size() - 1 - k]);
      };
      std::size_t k = 1;
      while (k + 1 < nodes.size() && distance(node(k), c) < stubEnd + detail::kJunctionLead) ++k;
      // After a straight lead the tube needs room to turn.
      std::size_t room = k;
      while (room + 1 < nodes.size() && distance(node(room), c) < stubEnd + detail::kJunctionLead + w.pitch())
        ++room;
      stepped[q] = {normalized(node(1) - c), room, true};
      aimed[q] = distance(node(k), c) > stubEnd + 1e-6 ? detail::StubAxis{normalized(node(k) - c), k, false}
                                                       : stepped[q];
    }
    bool spread = true;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        spread &= angleBetween(aimed[a].direction, aimed[b].direction) >= sizing.min_separation;
    for (int q = 0; q < 3; ++q) axes[{j, jn.incident[q].path}] = spread ? aimed[q] : stepped[q];
  }

  // Section-frame normals where tubes meet junctions, keyed by (junction, path).
  std::map<std::pair<std::size_t, PathId>, JunctionPort> junctionPorts;

  Scene scene;
  for (const auto& [id, path] : net.registry.paths()) {
    if (path.nodes.size() < 2) throw MeshError("path " + std::to_string(id) + " has fewer than 2 nodes");
    const SweepProfile profile = detail::pathProfile(net, params, id, opt.segments);
    profile.check();
    const JunctionSizing sizing(profile);
    const double stubEnd = sizing.stubEndDistance(profile);
    const auto& pe = ends[id];

    // Nodes inside a junction stub are replaced by the stub run.
    std::array<std::size_t, 2> drop{0, 0};
    std::array<std::optional<Vec3>, 2> junctionAxis;
    for (int side = 0; side < 2; ++side)
      if (pe[side].junction) {
        const auto& ax = axes.at({*pe[side].junction, id});
        junctionAxis[side] = ax.direction;
        drop[side] = ax.keep_from;
      }
    std::vector<Vec3> pts;
    if (drop[0] + drop[1] < path.nodes.size())
      for (std::size_t k = drop[0]; k + drop[1] < path.nodes.size(); ++k) pts.push_back(w.world(path.nodes[k]));
    for (int side = 0; side < 2; ++side) {
      if (!junctionAxis[side]) continue;
      const auto& ax = axes.at({*pe[side].junction, id});
      const Vec3 c = w.world(net.junctions[*pe[side].junction].point);
      std::vector<Vec3> run{c + ax.direction * stubEnd};
      if (ax.lead) run.push_back(c + ax.direction * (stubEnd + detail::kJunctionLead));
      if (side == 0) pts.insert(pts.begin(), run.begin(), run.end());
      else pts.insert(pts.end(), run.rbegin(), run.rend());
    }
    const double runLen = kSocketStraight;
    std::array<std::optional<PortSite>, 2> sockets;
    for (int side = 0; side < 2; ++side) {
      if (!pe[side].terminal) continue;
      const PortAnchor& anchor = net.anchors.at(*pe[side].terminal);
      if (!anchor.on_gate) continue;
      sockets[side] = anchor.site;
      const Vec3 tip = anchor.site.position;
      const Vec3 runEnd = tip + anchor.site.direction * runLen;
      if (side == 0) pts.insert(pts.begin(), {tip, runEnd});
      else pts.insert(pts.end(), {runEnd, tip});
    }
    pts = detail::dedupe(pts, 1e-6);

    const double fillet = opt.fillet_radius.value_or(2 * profile.outer_radius);
    const auto smooth = filletPolyline(pts, fillet, opt.subdiv);
    TubeSpine spine = TubeSpine::uniform(smooth, profile);
    for (int side = 0; side < 2; ++side) {
      if (!sockets[side]) continue;
      PressFitSpec spec;
      spec.port_outer_d = sockets[side]->outer_d;
      spec.interference = opt.interference;
      spec.depth = kSocketDepth;
      spec.taper = kSocketTaper;
      spec.chamfer = kSocketChamfer;
      spine = pressFitTip(std::move(spine), side == 0, spec);
    }

    std::optional<Vec3> startNormal;
    if (junctionAxis[0]) startNormal = anyPerpendicular(*junctionAxis[0]);
    SweepResult res = sweepSpine(spine, opt.segments, startNormal);
    for (const auto& wmsg : res.warnings) scene.warnings.push_back("path " + std::to_string(id) + ": " + wmsg);
    if (pe[0].junction) junctionPorts[{*pe[0].junction, id}] = {*junctionAxis[0], res.start_frame.normal};
    if (pe[1].junction) junctionPorts[{*pe[1].junction, id}] = {*junctionAxis[1], res.end_frame.normal};

    res.mesh.label = "path " + std::to_string(id);
    scene.stats.tube_length_mm += spine.length();
    scene.shells.push_back(std::move(res.mesh));
  }

  std::vector<std::size_t> jorder(net.junctions.size());
  for (std::size_t j = 0; j < jorder.size(); ++j) jorder[j] = j;
  std::sort(jorder.begin(), jorder.end(), [&](std::size_t a, std::size_t b) {
    return net.junctions[a].point < net.junctions[b].point;
  });
  for (std::size_t j : jorder) {
    const Junction& jn = net.junctions[j];
    const SweepProfile profile = detail::pathProfile(net, params, jn.incident[0].path, opt.segments);
    std::vector<JunctionPort> ports;
    for (const auto& inc : jn.incident) ports.push_back(junctionPorts.at({j, inc.path}));
    TriMesh m = junctionConnector(w.world(jn.point), std::move(ports), profile);
    m.label = "junction " + jn.point.str();
    scene.shells.push_back(std::move(m));
  }

  scene.stats.shell_count = scene.shells.size();
  bool first = true;
  for (const auto& s : scene.shells) {
    scene.stats.triangle_count += s.triangles.size();
    if (s.vertices.empty()) continue;
    const Box b = s.bounds();
    if (first) scene.stats.bounds = b;
    else {
      scene.stats.bounds.expand(b.lo);
      scene.stats.bounds.expand(b.hi);
    }
    first = false;
  }
  return scene;
}

}  // namespace fluidcc
