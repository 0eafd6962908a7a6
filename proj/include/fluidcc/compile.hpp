#pragma once

// The compile pipeline: place, route, mesh, check, and report.

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/library.hpp"
#include "fluidcc/mesh.hpp"
#include "fluidcc/netbuild.hpp"
#include "fluidcc/netlist.hpp"
#include "fluidcc/router.hpp"
#include "fluidcc/scene.hpp"
#include "fluidcc/stl.hpp"

namespace fluidcc {

inline constexpr int kReportSchemaVersion = 1;

struct CompileOptions {
  std::map<std::string, double> param_overrides;  // take precedence over `param` lines
  SearchMode mode = SearchMode::Modified;
  Neighborhood neighborhood = Neighborhood::Full26;
  RouteOrder order = RouteOrder::Source;
  bool keep_going = false;
  SceneOptions scene;
};

struct CompileOutput {
  Netlist netlist;  // with overrides and automatic placements applied
  RoutedNetwork network;
  Scene scene;
  nlohmann::ordered_json report;
};

namespace detail {

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline nlohmann::ordered_json vecJson(const Vec3& v) {
  return nlohmann::ordered_json::array({round6(v.x), round6(v.y), round6(v.z)});
}

inline const char* toString(RouteOrder o) { return o == RouteOrder::Source ? "source" : "length"; }

}  // namespace detail

/// Applies parameter overrides and places unplaced gates. Throws Error on
/// out-of-range parameters.
inline Netlist effectiveNetlist(Netlist n, const ComponentLibrary& lib, const CompileOptions& opt) {
  for (const auto& [key, value] : opt.param_overrides) {
    double* slot = paramSlot(n.params, key);
    if (!slot) throw Error("unknown parameter '" + key + "'");
    *slot = value;
  }
  if (const auto errs = checkParams(n.params); !errs.empty()) throw Error(errs.front());
  bool unplaced = false;
  for (const auto& g : n.gates) unplaced |= !g.placement;
  if (unplaced) applyPlacement(n, autoPlace(n, lib, n.params.bed));
  return n;
}

/// Routes and meshes a validated netlist. RoutingError and MeshError
/// propagate; every shell is checked for watertightness.
inline CompileOutput compileNetlist(const Netlist& input, const ComponentLibrary& lib,
                                    const CompileOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  auto ms = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  const auto t0 = Clock::now();
  CompileOutput out;
  out.netlist = effectiveNetlist(input, lib, opt);
  const Netlist& n = out.netlist;
  const auto t1 = Clock::now();

  RouterParams rp{n.params.alpha, n.params.beta, opt.neighborhood, opt.mode};
  checkRouterParams(rp);
  BuildOptions bo;
  bo.order = opt.order;
  bo.keep_going = opt.keep_going;
  bo.segments = opt.scene.segments;
  out.network = buildNetwork(n, lib, rp, bo);
  const auto t2 = Clock::now();

  out.scene = assembleScene(out.network, n.params, opt.scene);
  for (const auto& shell : out.scene.shells) {
    const auto r = watertightCheck(shell);
    if (!r.ok())
      throw MeshError(shell.label + " is not watertight (" + std::to_string(r.non_manifold_edges) +
                      " non-manifold edges, " + std::to_string(r.winding_conflicts) +
                      " winding conflicts, " + std::to_string(r.degenerate_triangles) +
                      " degenerate triangles)");
  }
  const auto t3 = Clock::now();

  using J = nlohmann::ordered_json;
  J& rep = out.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["tool"] = "fluidcc " FLUIDCC_VERSION;
  rep["circuit"] = n.name;

  J params;
  for (const auto& key : paramKeys()) params[key] = paramValue(n.params, key);
  rep["config"] = {{"params", params},
                   {"router",
                    {{"mode", toString(opt.mode)},
                     {"neighborhood", toString(opt.neighborhood)},
                     {"order", detail::toString(opt.order)}}},
                   {"mesh",
                    {{"segments", opt.scene.segments},
                     {"fillet_radius", opt.scene.fillet_radius.value_or(n.params.tube_outer_d)},
                     {"subdiv", opt.scene.subdiv},
                     {"press_fit_interference", opt.scene.interference}}}};

  std::size_t inputs = 0, outputs = 0;
  for (const auto& e : n.externals) (e.is_input ? inputs : outputs)++;
  rep["netlist"] = {{"gates", n.gates.size()},
                    {"connections", n.connections.size()},
                    {"inputs", inputs},
                    {"outputs", outputs}};

  J routes = J::array();
  std::size_t explored = 0;
  for (const auto& r : out.network.routes) {
    explored += r.metrics.explored_count;
    routes.push_back({{"connection", r.label},
                      {"explored", r.metrics.explored_count},
                      {"frontier_peak", r.metrics.frontier_peak},
                      {"length_mm", detail::round6(r.metrics.length_mm)},
                      {"turns", r.metrics.turn_count},
                      {"cost", detail::round6(r.metrics.cost)},
                      {"junctions_created", r.splits}});
  }
  rep["routing"] = {{"connections", routes}, {"explored_total", explored}};

  double tubeLength = 0;
  for (const auto& [id, p] : out.network.registry.paths()) tubeLength += p.metrics.length_mm;
  rep["network"] = {{"paths", out.network.registry.size()},
                    {"junctions", out.network.junctions.size()},
                    {"tube_length_mm", detail::round6(tubeLength)}};

  const auto& st = out.scene.stats;
  rep["mesh"] = {{"shells", st.shell_count},
                 {"triangles", st.triangle_count},
                 {"bbox_min", detail::vecJson(st.bounds.lo)},
                 {"bbox_max", detail::vecJson(st.bounds.hi)},
                 {"swept_length_mm", detail::round6(st.tube_length_mm)},
                 {"stl_bytes", stlBinarySize(st.triangle_count)},
                 {"watertight_shells", st.shell_count}};
  rep["warnings"] = out.scene.warnings;
  rep["timings_ms"] = {{"place", ms(t0, t1)}, {"route", ms(t1, t2)}, {"mesh", ms(t2, t3)},
                       {"total", ms(t0, t3)}};
  return out;
}

}  // namespace fluidcc
