#pragma once

// Tube network construction: routes connections in order, splitting an
// existing tube and adding a three-way junction whenever a connection
// starts or ends at a point that is already connected.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/grid.hpp"
#include "fluidcc/library.hpp"
#include "fluidcc/netlist.hpp"
#include "fluidcc/profile.hpp"
#include "fluidcc/router.hpp"

namespace fluidcc {

using PathId = int;

class PathRegistry {
 public:
  PathId add(RoutePath p) {
    const PathId id = next_id_++;
    paths_.emplace(id, std::move(p));
    return id;
  }

  const RoutePath& at(PathId id) const {
    auto it = paths_.find(id);
    if (it == paths_.end()) throw Error("unknown path id " + std::to_string(id));
    return it->second;
  }

  bool contains(PathId id) const { return paths_.count(id) != 0; }
  void remove(PathId id) { paths_.erase(id); }
  std::size_t size() const { return paths_.size(); }
  PathId nextId() const { return next_id_; }

  const std::map<PathId, RoutePath>& paths() const { return paths_; }

 private:
  std::map<PathId, RoutePath> paths_;
  PathId next_id_ = 0;
};

struct PathNodeRef {
  PathId path = -1;
  std::size_t node = 0;
  bool operator==(const PathNodeRef&) const = default;
};

/// Terminals already attached to the network, with the path node each one
/// sits on.
using ConnectedPointSet = std::map<Terminal, PathNodeRef>;

struct JunctionIncidence {
  PathId path = -1;
  bool at_start = false;  // whether the path's first node touches the junction
  bool operator==(const JunctionIncidence&) const = default;
};

struct Junction {
  GridIndex point;
  std::array<JunctionIncidence, 3> incident;
};

struct TubeSize {
  double inner_d = 0;
  double outer_d = 0;
};

/// Search statistics of one routed connection.
struct ConnectionRoute {
  std::size_t connection = 0;  // index into Netlist::connections
  std::string label;           // "from -> to"
  PathId path = -1;            // id assigned when routed (may later be split)
  SearchMetrics metrics;
  int splits = 0;              // endpoints that attached to an existing tube
};

struct RouteFailure {
  std::size_t connection = 0;
  std::string label;
  std::string message;
};

class NetworkBuildError : public RoutingError {
 public:
  explicit NetworkBuildError(std::vector<RouteFailure> failures)
      : RoutingError(describe(failures)), failures_(std::move(failures)) {}

  const std::vector<RouteFailure>& failures() const { return failures_; }

 private:
  static std::string describe(const std::vector<RouteFailure>& fs) {
    std::string s;
    for (const auto& f : fs) {
      if (!s.empty()) s += "; ";
      s += "connection '" + f.label + "': " + f.message;
    }
    return s;
  }
  std::vector<RouteFailure> failures_;
};

struct RoutedNetwork {
  GridWorld world;  // final occupancy, all tubes rasterised
  PathRegistry registry;
  std::vector<Junction> junctions;
  ConnectedPointSet terminals;
  std::map<Terminal, PortAnchor> anchors;
  std::map<PathId, TubeSize> tube_sizes;
  std::vector<ConnectionRoute> routes;

  const Junction* junctionAt(const GridIndex& g) const {
    for (const auto& j : junctions)
      if (j.point == g) return &j;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------

struct SplitRules {
  std::vector<GridIndex> junctions;  // existing junction points
  int exclusion_cells = 2;           // Chebyshev radius around junctions
  std::optional<double> min_world_z;  // junction sphere must clear the bed
  double min_separation = 0;          // radians between the two path directions
};

namespace detail {

inline bool splitEligible(const RoutePath& path, std::size_t idx, const GridWorld& w,
                          const SplitRules& rules) {
  if (idx == 0 || idx + 1 >= path.nodes.size()) return false;
  const GridIndex& n = path.nodes[idx];
  for (const auto& j : rules.junctions) {
    const GridIndex d = n - j;
    if (std::max({std::abs(d.i), std::abs(d.j), std::abs(d.k)}) <= rules.exclusion_cells)
      return false;
  }
  if (rules.min_world_z && w.world(n).z < *rules.min_world_z - 1e-9) return false;
  if (rules.min_separation > 0) {
    const GridIndex a = path.nodes[idx - 1] - n, b = path.nodes[idx + 1] - n;
    const Vec3 va{double(a.i), double(a.j), double(a.k)}, vb{double(b.i), double(b.j), double(b.k)};
    if (angleBetween(va, vb) < rules.min_separation) return false;
  }
  return true;
}

}  // namespace detail

/// Interior node of `path` closest (Euclidean, world mm) to `target`,
/// skipping endpoints and nodes on or near existing junctions. Ties go to the
/// lower index. Throws RoutingError when no node is eligible.
inline std::size_t nearestSplitPoint(const RoutePath& path, const GridIndex& target,
                                     const GridWorld& world, const SplitRules& rules = {}) {
  const Vec3 t = world.world(target);
  std::optional<std::size_t> best;
  double bestD = 0;
  for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) {
    if (!detail::splitEligible(path, i, world, rules)) continue;
    const double d = distance(world.world(path.nodes[i]), t);
    if (!best || d < bestD) {
      best = i;
      bestD = d;
    }
  }
  if (!best) throw RoutingError("path has no eligible interior split point");
  return *best;
}

/// Replaces path `id` by two halves sharing node `index`, re-pointing
/// connected terminals and junction incidences.
inline std::pair<PathId, PathId> splitPath(RoutedNetwork& net, PathId id, std::size_t index) {
  const RoutePath original = net.registry.at(id);
  if (index == 0 || index + 1 >= original.nodes.size())
    throw RoutingError("split index " + std::to_string(index) + " is not interior to a path of " +
                       std::to_string(original.nodes.size()) + " nodes");
  RoutePath left, right;
  left.nodes.assign(original.nodes.begin(), original.nodes.begin() + index + 1);
  right.nodes.assign(original.nodes.begin() + index, original.nodes.end());
  if (net.world.cellCount()) {
    refreshGeometry(left, net.world);
    refreshGeometry(right, net.world);
  } else {
    left.metrics.turn_count = countTurns(left.nodes);
    right.metrics.turn_count = countTurns(right.nodes);
  }
  net.registry.remove(id);
  const PathId l = net.registry.add(std::move(left));
  const PathId r = net.registry.add(std::move(right));
  if (auto it = net.tube_sizes.find(id); it != net.tube_sizes.end()) {
    net.tube_sizes[l] = it->second;
    net.tube_sizes[r] = it->second;
    net.tube_sizes.erase(it);
  }

  for (auto& [term, ref] : net.terminals) {
    if (ref.path != id) continue;
    if (ref.node <= index) ref = {l, ref.node};
    else ref = {r, ref.node - index};
  }
  for (auto& j : net.junctions)
    for (auto& inc : j.incident) {
      if (inc.path != id) continue;
      inc.path = inc.at_start ? l : r;
    }
  return {l, r};
}

/// Paths reachable from `seed` through junctions.
inline std::vector<PathId> pathComponent(const RoutedNetwork& net, PathId seed) {
  std::set<PathId> seen{seed};
  std::vector<PathId> stack{seed};
  while (!stack.empty()) {
    const PathId p = stack.back();
    stack.pop_back();
    for (const auto& j : net.junctions) {
      bool touches = false;
      for (const auto& inc : j.incident) touches |= inc.path == p;
      if (!touches) continue;
      for (const auto& inc : j.incident)
        if (seen.insert(inc.path).second) stack.push_back(inc.path);
    }
  }
  return {seen.begin(), seen.end()};
}

enum class RouteOrder { Source, SortedByLength };
enum class SplitChoice { Nearest, Midpoint };

struct BuildOptions {
  RouteOrder order = RouteOrder::Source;
  SplitChoice split = SplitChoice::Nearest;
  bool keep_going = false;
  int segments = 16;               // tube cross-section resolution, for junction sizing
  std::size_t max_split_candidates = 24;
};

/// Default port diameter assumed for free-standing inputs and outputs.
inline constexpr double kExternalPortOuterD = 4.0;

namespace detail {

struct Endpoint {
  Terminal terminal;
  GridIndex cell;
  Vec3 position;
  std::optional<PathId> split_path;  // set when attaching to an existing tube
  std::size_t split_index = 0;
};

inline Vec3 toVec(const GridIndex& g) { return {double(g.i), double(g.j), double(g.k)}; }

}  // namespace detail

/// Routes every connection of a placed netlist. Throws NetworkBuildError
/// naming the failing connection(s).
inline RoutedNetwork buildNetwork(const Netlist& n, const ComponentLibrary& lib,
                                  const RouterParams& params, const BuildOptions& opt = {}) {
  const CircuitParams& cp = n.params;
  RoutedNetwork net;

  // Footprints and every attachment point, connected or not.
  std::vector<Box> footprints;
  std::vector<PortAnchor> anchorList;
  for (const auto& g : n.gates) {
    const GateType* t = lib.find(g.type);
    if (!t) throw Error("unknown gate type '" + g.type + "'");
    if (!g.placement) throw Error("gate '" + g.name + "' has no placement");
    footprints.push_back(placedOutline(*t, *g.placement));
    for (const auto& p : t->footprint.ports) {
      PortAnchor a{placedPort(p, *g.placement), true};
      net.anchors[Terminal{g.name, p.name}] = a;
      anchorList.push_back(a);
    }
  }
  for (const auto& e : n.externals) {
    PortAnchor a{{e.position, {}, kExternalPortOuterD}, false};
    net.anchors[Terminal{e.name, ""}] = a;
    anchorList.push_back(a);
  }
  net.world = buildGrid(cp, footprints, anchorList);
  GridWorld& world = net.world;

  std::map<Terminal, GridIndex> accessCells;
  std::vector<GridIndex> portCells;
  for (const auto& [term, a] : net.anchors) {
    const GridIndex c = accessCell(world, a, cp);
    accessCells[term] = c;
    portCells.push_back(c);
  }

  std::vector<std::size_t> order(n.connections.size());
  std::iota(order.begin(), order.end(), 0);
  if (opt.order == RouteOrder::SortedByLength) {
    auto span = [&](std::size_t i) {
      const auto& c = n.connections[i];
      return distance(net.anchors.at(c.from).site.position, net.anchors.at(c.to).site.position);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return span(a) < span(b); });
  }

  std::vector<RouteFailure> failures;
  for (std::size_t ci : order) {
    const Connection& c = n.connections[ci];
    const std::string label = c.from.str() + " -> " + c.to.str();
    const TubeSize size{c.tube.inner_d.value_or(cp.tube_inner_d),
                        c.tube.outer_d.value_or(cp.tube_outer_d)};
    const SweepProfile profile{opt.segments, size.inner_d / 2, size.outer_d / 2};
    const JunctionSizing sizing(profile);

    SplitRules rules;
    for (const auto& j : net.junctions) rules.junctions.push_back(j.point);
    rules.min_world_z = sizing.outer_radius;
    rules.min_separation = sizing.min_separation;

    // Candidate attachment points for each end (one fixed cell when unconnected).
    std::array<std::vector<detail::Endpoint>, 2> ends;
    const std::array<Terminal, 2> terms{c.from, c.to};
    for (int side = 0; side < 2; ++side) {
      const Terminal& t = terms[side];
      const Terminal& other = terms[1 - side];
      auto connected = net.terminals.find(t);
      if (connected == net.terminals.end()) {
        ends[side].push_back({t, accessCells.at(t), world.world(accessCells.at(t)), {}, 0});
        continue;
      }
      const GridIndex target = accessCells.at(other);
      const Vec3 tp = world.world(target);
      struct Cand {
        double d;
        PathId id;
        std::size_t idx;
      };
      std::vector<Cand> cands;
      // Bed-hugging tubes can leave every raised node next to a junction;
      // shrink the exclusion zone before giving up.
      SplitRules local = rules;
      for (; cands.empty() && local.exclusion_cells >= 1; --local.exclusion_cells) {
        for (PathId pid : pathComponent(net, connected->second.path)) {
          const RoutePath& p = net.registry.at(pid);
          if (opt.split == SplitChoice::Midpoint) {
            const std::size_t mid = p.nodes.size() / 2;
            if (detail::splitEligible(p, mid, world, local))
              cands.push_back({distance(world.world(p.nodes[mid]), tp), pid, mid});
            continue;
          }
          for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i)
            if (detail::splitEligible(p, i, world, local))
              cands.push_back({distance(world.world(p.nodes[i]), tp), pid, i});
        }
      }
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return std::tie(a.d, a.id, a.idx) < std::tie(b.d, b.id, b.idx);
      });
      if (cands.size() > opt.max_split_candidates) cands.resize(opt.max_split_candidates);
      for (const auto& cd : cands) {
        const GridIndex node = net.registry.at(cd.id).nodes[cd.idx];
        ends[side].push_back({t, node, world.world(node), cd.id, cd.idx});
      }
    }

    std::optional<RoutePath> routed;
    detail::Endpoint chosen[2];
    std::string lastError = "no eligible split point on the existing tube network";
    for (const auto& s : ends[0]) {
      for (const auto& e : ends[1]) {
        if (s.cell == e.cell) continue;
        GridWorld scratch = world;
        for (const GridIndex& pc : portCells)
          if (pc != s.cell && pc != e.cell) scratch.block(pc, CellTag::Port);
        for (const auto* ep : {&s, &e}) {
          scratch.open(ep->cell);
          if (!ep->split_path) continue;
          // Keep the new tube's first step well away from both halves.
          const RoutePath& host = net.registry.at(*ep->split_path);
          const GridIndex a = host.nodes[ep->split_index - 1] - ep->cell;
          const GridIndex b = host.nodes[ep->split_index + 1] - ep->cell;
          for (const GridIndex& d : detail::neighborSteps(Neighborhood::Full26)) {
            const GridIndex nb = ep->cell + d;
            if (!scratch.inBounds(nb)) continue;
            if (angleBetween(detail::toVec(d), detail::toVec(a)) < sizing.min_separation ||
                angleBetween(detail::toVec(d), detail::toVec(b)) < sizing.min_separation)
              scratch.block(nb, CellTag::KeepOut);
          }
        }
        try {
          routed = findPath(scratch, s.cell, e.cell, params);
          chosen[0] = s;
          chosen[1] = e;
          break;
        } catch (const RoutingError& err) {
          lastError = err.what();
        }
      }
      if (routed) break;
    }

    if (!routed) {
      failures.push_back({ci, label, lastError});
      if (!opt.keep_going) throw NetworkBuildError(std::move(failures));
      continue;
    }

    ConnectionRoute stats{ci, label, -1, routed->metrics, 0};
    const std::size_t last = routed->nodes.size() - 1;
    std::vector<std::size_t> fresh;  // indices into net.junctions
    for (int side = 0; side < 2; ++side) {
      auto& ep = chosen[side];
      if (!ep.split_path) continue;
      ++stats.splits;
      const PathId host = *ep.split_path;
      const std::size_t at = ep.split_index;
      const auto [l, r] = splitPath(net, host, at);
      fresh.push_back(net.junctions.size());
      net.junctions.push_back({ep.cell, {JunctionIncidence{l, false}, JunctionIncidence{r, true},
                                         JunctionIncidence{-1, side == 0}}});
      // Both ends may attach to the same tube; re-point the other end.
      auto& other = chosen[1 - side];
      if (side == 0 && other.split_path == host) {
        if (other.split_index < at) other.split_path = l;
        else other = {other.terminal, other.cell, other.position, r, other.split_index - at};
      }
    }
    const PathId id = net.registry.add(std::move(*routed));
    net.tube_sizes[id] = size;
    for (std::size_t j : fresh) net.junctions[j].incident[2].path = id;
    if (!chosen[0].split_path) net.terminals[c.from] = {id, 0};
    if (!chosen[1].split_path) net.terminals[c.to] = {id, last};
    stats.path = id;
    net.routes.push_back(std::move(stats));

    rasterizePath(world, net.registry.at(id), size.outer_d / 2);
    for (std::size_t j : fresh) {
      const Vec3 centre = world.world(net.junctions[j].point);
      const double reach = sizing.outer_radius + cp.clearance + size.outer_d / 2;
      world.forEachCellNear(Box{centre, centre}.inflated(reach), [&](const GridIndex& g) {
        if (!world.blocked(g) && world.tag(g) != CellTag::Port &&
            distance(world.world(g), centre) <= reach)
          world.block(g, CellTag::KeepOut);
      });
    }
  }
  if (!failures.empty()) throw NetworkBuildError(std::move(failures));
  return net;
}

/// Union-find over terminals: two terminals are linked when a chain of
/// paths and junctions joins them. Returns a component id per terminal.
inline std::map<Terminal, int> physicalComponents(const RoutedNetwork& net) {
  std::map<PathId, PathId> parent;
  std::function<PathId(PathId)> find = [&](PathId x) {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) return parent[x] = x;
    return it->second = find(it->second);
  };
  for (const auto& [id, p] : net.registry.paths()) find(id);
  for (const auto& j : net.junctions)
    for (const auto& inc : j.incident) parent[find(inc.path)] = find(j.incident[0].path);
  std::map<Terminal, int> out;
  for (const auto& [t, ref] : net.terminals) out[t] = find(ref.path);
  return out;
}

}  // namespace fluidcc
