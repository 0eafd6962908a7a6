#pragma once

// Tube router: best-first grid search with the printability-oriented cost
// model (rewards for descending and on-ground steps, Chebyshev-plus-scaled-
// Euclidean heuristic), and a standard A* baseline.
//
// Costs are in world millimetres; the on-ground reward `alpha` is applied
// unscaled, so its weight is relative to the grid pitch.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/grid.hpp"

namespace fluidcc {

enum class Neighborhood { Axis6, Full26 };
enum class SearchMode { Modified, Standard };

inline const char* toString(SearchMode m) { return m == SearchMode::Modified ? "modified" : "standard"; }
inline const char* toString(Neighborhood n) { return n == Neighborhood::Axis6 ? "axis6" : "full26"; }

struct RouterParams {
  double alpha = 0.5;
  double beta = 0.5;
  Neighborhood neighborhood = Neighborhood::Full26;
  SearchMode mode = SearchMode::Modified;
};

inline void checkRouterParams(const RouterParams& p) {
  if (!(p.alpha > 0 && p.alpha < 1)) throw Error("alpha must lie in (0,1)");
  if (!(p.beta > 0 && p.beta < 1)) throw Error("beta must lie in (0,1)");
}

struct SearchState {
  GridIndex node;
  double g = 0;
  double f = 0;
  std::optional<GridIndex> parent;
  GridIndex incoming_dir;  // zero at the root
};

namespace detail {

inline double stepLength(const GridIndex& d) {
  return std::sqrt(double(d.i * d.i + d.j * d.j + d.k * d.k));
}

inline const std::vector<GridIndex>& neighborSteps(Neighborhood nb) {
  static const std::vector<GridIndex> axis = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0},
                                              {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
  static const std::vector<GridIndex> full = [] {
    std::vector<GridIndex> v;
    for (int k = -1; k <= 1; ++k)
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i)
          if (i || j || k) v.push_back({i, j, k});
    return v;
  }();
  return nb == Neighborhood::Axis6 ? axis : full;
}

}  // namespace detail

/// g of `s` reached from `parent`: g(parent) + step length + R1 + R2, where
/// R1 = d_xy - d_xyz on descending steps and R2 = -alpha on the bottom layer.
/// Standard mode keeps only the step length.
inline double stepCost(const SearchState& parent, const GridIndex& s, const RouterParams& params,
                       double pitch = 1.0) {
  const GridIndex d = s - parent.node;
  const double dxyz = detail::stepLength(d) * pitch;
  double g = parent.g + dxyz;
  if (params.mode == SearchMode::Standard) return g;
  if (d.k < 0) g += std::sqrt(double(d.i * d.i + d.j * d.j)) * pitch - dxyz;
  if (s.k == 0) g -= params.alpha;
  return g;
}

/// Chebyshev distance plus beta times Euclidean distance (modified mode), or
/// plain Euclidean distance (standard mode).
inline double heuristic(const GridIndex& s, const GridIndex& goal, const RouterParams& params,
                        double pitch = 1.0) {
  const GridIndex d = goal - s;
  const double euclid = detail::stepLength(d) * pitch;
  if (params.mode == SearchMode::Standard) return euclid;
  const int cheb = std::max({std::abs(d.i), std::abs(d.j), std::abs(d.k)});
  return cheb * pitch + params.beta * euclid;
}

/// A diagonal step is legal only when every axis-decomposed intermediate
/// cell is free as well (no corner cutting).
inline bool stepAllowed(const GridWorld& w, const GridIndex& from, const GridIndex& d) {
  const GridIndex to = from + d;
  if (!w.inBounds(to) || w.blocked(to)) return false;
  const int mask = (d.i ? 1 : 0) | (d.j ? 2 : 0) | (d.k ? 4 : 0);
  for (int sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
    const GridIndex mid = from + GridIndex{sub & 1 ? d.i : 0, sub & 2 ? d.j : 0, sub & 4 ? d.k : 0};
    if (!w.inBounds(mid) || w.blocked(mid)) return false;
  }
  return true;
}

namespace detail {

struct FrontierEntry {
  double f;
  std::uint8_t turn_key;  // 0 when the step continues the parent's direction
  std::uint8_t axis_key;  // 0 when the step advances along the dominant axis
  GridIndex node;
  double g;

  // Min-heap order: f, then fewer turns, then dominant axis, then node.
  bool operator>(const FrontierEntry& o) const {
    if (f != o.f) return f > o.f;
    if (turn_key != o.turn_key) return turn_key > o.turn_key;
    if (axis_key != o.axis_key) return axis_key > o.axis_key;
    return o.node < node;
  }
};

inline std::uint8_t dominantAxisKey(const GridIndex& from, const GridIndex& goal,
                                    const GridIndex& step) {
  const GridIndex d = goal - from;
  const int m = std::max({std::abs(d.i), std::abs(d.j), std::abs(d.k)});
  if (m == 0) return 1;
  for (int a = 0; a < 3; ++a)
    if (std::abs(d[a]) == m && step[a] != 0 && (step[a] > 0) == (d[a] > 0)) return 0;
  return 1;
}

}  // namespace detail

/// Best-first search over f = g + h with an expanded-once closed set.
/// Throws RoutingError when the goal is unreachable or an endpoint is
/// blocked or out of bounds.
inline RoutePath findPath(const GridWorld& w, const GridIndex& start, const GridIndex& goal,
                          const RouterParams& params) {
  for (const auto& [what, g] : {std::pair{"start", start}, std::pair{"goal", goal}}) {
    if (!w.inBounds(g)) throw RoutingError(std::string(what) + " " + g.str() + " is out of bounds");
    if (w.blocked(g)) throw RoutingError(std::string(what) + " " + g.str() + " is blocked");
  }

  const double pitch = w.pitch();
  const std::size_t n = w.cellCount();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best(n, kInf);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);

  std::priority_queue<detail::FrontierEntry, std::vector<detail::FrontierEntry>,
                      std::greater<>> open;
  std::size_t openCount = 0, peak = 0, explored = 0;

  const std::size_t s0 = w.linear(start);
  best[s0] = 0;
  open.push({heuristic(start, goal, params, pitch), 0, 0, start, 0.0});
  openCount = peak = 1;

  const auto& steps = detail::neighborSteps(params.neighborhood);
  bool found = false;
  while (!open.empty()) {
    const detail::FrontierEntry e = open.top();
    open.pop();
    const std::size_t ei = w.linear(e.node);
    if (closed[ei] || e.g != best[ei]) continue;
    closed[ei] = 1;
    --openCount;
    ++explored;
    if (e.node == goal) {
      found = true;
      break;
    }

    SearchState state{e.node, e.g, e.f, std::nullopt, {}};
    if (parent[ei] >= 0) {
      state.parent = w.fromLinear(static_cast<std::size_t>(parent[ei]));
      state.incoming_dir = e.node - *state.parent;
    }
    for (const GridIndex& d : steps) {
      if (!stepAllowed(w, e.node, d)) continue;
      const GridIndex s = e.node + d;
      const std::size_t si = w.linear(s);
      if (closed[si]) continue;
      const double g = stepCost(state, s, params, pitch);
      if (!(g < best[si])) continue;
      if (best[si] == kInf) peak = std::max(peak, ++openCount);
      best[si] = g;
      parent[si] = static_cast<std::int64_t>(ei);
      const std::uint8_t turn = state.parent && d == state.incoming_dir ? 0 : 1;
      open.push({g + heuristic(s, goal, params, pitch), turn,
                 detail::dominantAxisKey(e.node, goal, d), s, g});
    }
  }
  if (!found)
    throw RoutingError("no path from " + start.str() + " to " + goal.str() + " (" +
                       std::to_string(explored) + " nodes explored)");

  RoutePath path;
  for (std::int64_t c = static_cast<std::int64_t>(w.linear(goal)); c >= 0; c = parent[c])
    path.nodes.push_back(w.fromLinear(static_cast<std::size_t>(c)));
  std::reverse(path.nodes.begin(), path.nodes.end());
  refreshGeometry(path, w);
  path.metrics.explored_count = explored;
  path.metrics.frontier_peak = peak;
  path.metrics.cost = best[w.linear(goal)];
  return path;
}

struct SearchComparison {
  RoutePath modified;
  RoutePath standard;
};

/// Runs both search modes on the same world.
inline SearchComparison compareSearch(const GridWorld& w, const GridIndex& start,
                                      const GridIndex& goal, RouterParams params) {
  SearchComparison out;
  params.mode = SearchMode::Modified;
  out.modified = findPath(w, start, goal, params);
  params.mode = SearchMode::Standard;
  out.standard = findPath(w, start, goal, params);
  return out;
}

}  // namespace fluidcc
