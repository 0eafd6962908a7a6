// fluidcc command-line driver.
//
// Exit codes: 0 success, 1 diagnostics / usage / simulation errors,
// 2 routing or mesh failures.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluidcc/bench.hpp"
#include "fluidcc/compile.hpp"
#include "fluidcc/sim.hpp"
#include "fluidcc/stl.hpp"

namespace fs = std::filesystem;
using namespace fluidcc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitBuild = 2;

std::string libraryPath(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FLUIDCC_LIBRARY"); env && *env) return env;
  return FLUIDCC_DEFAULT_LIBRARY;
}

struct Loaded {
  ComponentLibrary library;
  Netlist netlist;
};

// Parses and validates; prints diagnostics and returns nothing on errors.
std::optional<Loaded> load(const std::string& file, const std::string& libFlag) {
  const std::string libPath = libraryPath(libFlag);
  auto lr = loadLibraryFile(libPath);
  std::cerr << format(lr.diagnostics, libPath);
  if (!lr.library || hasErrors(lr.diagnostics)) return std::nullopt;

  std::string text;
  try {
    text = readTextFile(file);
  } catch (const Error&) {
    std::cerr << file << ":0:0: error: file not found or unreadable\n";
    return std::nullopt;
  }
  auto pr = parseNetlist(text, *lr.library);
  Diagnostics diags = pr.diagnostics;
  if (pr.netlist && !hasErrors(diags)) {
    const auto v = validateNetlist(*pr.netlist, *lr.library);
    diags.insert(diags.end(), v.begin(), v.end());
  }
  std::cerr << format(diags, file);
  if (!pr.netlist || hasErrors(diags)) return std::nullopt;
  if (pr.netlist->name.empty()) pr.netlist->name = fs::path(file).stem().string();
  return Loaded{std::move(*lr.library), std::move(*pr.netlist)};
}

// "2s", "250ms", "1500us" or plain seconds.
std::optional<double> parseDuration(std::string s) {
  double scale = 1;
  auto strip = [&](const std::string& suffix, double f) {
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.resize(s.size() - suffix.size());
      scale = f;
      return true;
    }
    return false;
  };
  strip("ms", 1e-3) || strip("us", 1e-6) || strip("s", 1);
  const auto v = detail::parseNumber(s);
  if (!v) return std::nullopt;
  return *v * scale;
}

std::vector<std::string> splitList(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::optional<GridIndex> parseIndex(const std::string& s) {
  const auto parts = splitList(s, ',');
  if (parts.size() != 3) return std::nullopt;
  GridIndex g;
  int* slots[3] = {&g.i, &g.j, &g.k};
  for (int a = 0; a < 3; ++a) {
    const auto v = detail::parseInt(parts[a]);
    if (!v) return std::nullopt;
    *slots[a] = *v;
  }
  return g;
}

bool writeFile(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  out << data;
  return static_cast<bool>(out);
}

nlohmann::ordered_json nodesJson(const std::vector<GridIndex>& nodes) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& g : nodes) arr.push_back({g.i, g.j, g.k});
  return arr;
}

// ---------------------------------------------------------------------------

struct RouterFlags {
  std::string mode = "modified";
  std::string order = "source";
  std::string neighborhood = "full26";
  std::optional<double> alpha, beta;
};

void addRouterFlags(CLI::App* cmd, RouterFlags& f) {
  cmd->add_option("--mode", f.mode, "Search mode")->check(CLI::IsMember({"modified", "standard"}));
  cmd->add_option("--order", f.order, "Connection routing order")
      ->check(CLI::IsMember({"source", "length"}));
  cmd->add_option("--neighborhood", f.neighborhood, "Grid moves")->check(CLI::IsMember({"full26", "axis6"}));
  cmd->add_option("--alpha", f.alpha, "Downward/straight reward weight");
  cmd->add_option("--beta", f.beta, "On-ground reward weight");
}

CompileOptions compileOptions(const RouterFlags& f, const std::vector<std::string>& params) {
  CompileOptions o;
  o.mode = f.mode == "standard" ? SearchMode::Standard : SearchMode::Modified;
  o.order = f.order == "length" ? RouteOrder::SortedByLength : RouteOrder::Source;
  o.neighborhood = f.neighborhood == "axis6" ? Neighborhood::Axis6 : Neighborhood::Full26;
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    const auto v = eq == std::string::npos ? std::nullopt : detail::parseNumber(kv.substr(eq + 1));
    if (!v) throw Error("--param expects key=value, got '" + kv + "'");
    o.param_overrides[kv.substr(0, eq)] = *v;
  }
  if (f.alpha) o.param_overrides["alpha"] = *f.alpha;
  if (f.beta) o.param_overrides["beta"] = *f.beta;
  return o;
}

// ---------------------------------------------------------------------------

struct CompileArgs {
  std::string file, out = ".", library;
  bool ascii = false, keep_going = false, timings = true;
  int segments = 16;
  std::optional<double> fillet;
  std::vector<std::string> params;
  RouterFlags router;
};

int runCompile(const CompileArgs& a) {
  auto loaded = load(a.file, a.library);
  if (!loaded) return kExitDiagnostics;
  CompileOptions opt;
  try {
    opt = compileOptions(a.router, a.params);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  opt.keep_going = a.keep_going;
  opt.scene.segments = a.segments;
  opt.scene.fillet_radius = a.fillet;

  CompileOutput result;
  try {
    result = compileNetlist(loaded->netlist, loaded->library, opt);
  } catch (const NetworkBuildError& e) {
    for (const auto& f : e.failures())
      std::cerr << a.file << ": error: cannot route connection '" << f.label << "': " << f.message << "\n";
    return kExitBuild;
  } catch (const RoutingError& e) {
    std::cerr << a.file << ": error: routing failed: " << e.what() << "\n";
    return kExitBuild;
  } catch (const MeshError& e) {
    std::cerr << a.file << ": error: mesh generation failed: " << e.what() << "\n";
    return kExitBuild;
  } catch (const Error& e) {
    std::cerr << a.file << ": error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  for (const auto& w : result.scene.warnings) std::cerr << a.file << ": warning: " << w << "\n";

  std::error_code ec;
  fs::create_directories(a.out, ec);
  const std::string stem = fs::path(a.file).stem().string();
  const fs::path stlPath = fs::path(a.out) / (stem + ".stl");
  const fs::path reportPath = fs::path(a.out) / (stem + ".report.json");

  std::ostringstream stl;
  if (a.ascii) writeStlAscii(result.scene.shells, stl, stem);
  else writeStlBinary(result.scene.shells, stl);
  result.report["mesh"]["format"] = a.ascii ? "ascii" : "binary";
  if (a.ascii) result.report["mesh"]["stl_bytes"] = stl.str().size();
  if (!a.timings) result.report.erase("timings_ms");
  if (!writeFile(stlPath, stl.str()) || !writeFile(reportPath, result.report.dump(2) + "\n")) {
    std::cerr << "error: cannot write output to '" << a.out << "'\n";
    return kExitDiagnostics;
  }
  std::cout << stlPath.string() << ": " << result.scene.stats.shell_count << " shells, "
            << result.scene.stats.triangle_count << " triangles\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimArgs {
  std::string file, library, inputs, until, watch, stimulus, delay, format = "csv", out;
  bool truth = false, frequency = false;
  std::string settle = "0";
};

int runSim(const SimArgs& a) {
  auto loaded = load(a.file, a.library);
  if (!loaded) return kExitDiagnostics;
  try {
    const SimCircuit c = buildSimCircuit(loaded->netlist, loaded->library);
    const int modes = int(a.truth) + int(!a.inputs.empty()) + int(!a.until.empty());
    if (modes != 1) throw SimError("choose exactly one of --inputs, --truth-table or --until");

    if (a.truth) {
      std::cout << truthTable(c).format();
      return kExitOk;
    }
    if (!a.inputs.empty()) {
      std::map<std::string, Level> in;
      for (const auto& kv : splitList(a.inputs, ',')) {
        const auto eq = kv.find('=');
        const std::string v = eq == std::string::npos ? "" : kv.substr(eq + 1);
        if (v != "0" && v != "1") throw SimError("--inputs expects NAME=0|1, got '" + kv + "'");
        in[kv.substr(0, eq)] = Level(v == "1");
      }
      for (const auto& [name, lv] : topoEvaluate(c, in)) std::cout << name << "=" << int(lv) << "\n";
      return kExitOk;
    }

    SimConfig cfg;
    cfg.gate_delay = loaded->netlist.params.gate_delay;
    if (!a.delay.empty()) {
      const auto d = parseDuration(a.delay);
      if (!d) throw SimError("bad --delay '" + a.delay + "'");
      cfg.gate_delay = *d;
    }
    const auto horizon = parseDuration(a.until);
    if (!horizon) throw SimError("bad --until '" + a.until + "'");
    cfg.horizon = *horizon;
    std::vector<Stimulus> stim;
    if (!a.stimulus.empty()) {
      try {
        stim = parseStimulusCsv(readTextFile(a.stimulus));
      } catch (const SimError&) {
        throw;
      } catch (const Error& e) {
        throw SimError(e.what());
      }
    }
    const auto watch = splitList(a.watch, ',');
    for (const auto& w : watch)
      if (c.findNet(w) < 0) throw SimError("unknown net '" + w + "' in --watch");
    const Waveform wf = eventSimulate(c, cfg, stim);

    if (a.frequency) {
      if (watch.empty()) throw SimError("--frequency needs --watch");
      const auto settle = parseDuration(a.settle);
      if (!settle) throw SimError("bad --settle '" + a.settle + "'");
      for (const auto& w : watch) {
        const auto m = measureFrequency(*wf.find(w), toTicks(*settle));
        std::cout << w << ": " << m.hz << " Hz, period " << m.period_s << " s, jitter " << m.jitter_s
                  << " s over " << m.cycles << " cycles\n";
      }
      return kExitOk;
    }
    const std::string text = a.format == "json" ? waveformJson(wf, watch).dump(2) + "\n" : waveformCsv(wf, watch);
    if (a.out.empty()) std::cout << text;
    else if (!writeFile(a.out, text)) throw SimError("cannot write '" + a.out + "'");
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << a.file << ": error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
}

// ---------------------------------------------------------------------------

struct RouteDebugArgs {
  std::string file, library, grid, start, goal, voxels;
  RouterFlags router;
};

int runRouteDebug(const RouteDebugArgs& a) {
  using J = nlohmann::ordered_json;
  J out;
  out["schema_version"] = kReportSchemaVersion;
  try {
    if (!a.grid.empty()) {
      const auto s = parseIndex(a.start), g = parseIndex(a.goal);
      if (!s || !g) {
        std::cerr << "error: --grid needs --start and --goal as i,j,k\n";
        return kExitDiagnostics;
      }
      const GridWorld w = parseVoxelDump(readTextFile(a.grid));
      const auto opt = compileOptions(a.router, {});
      RouterParams rp;
      rp.mode = opt.mode;
      rp.neighborhood = opt.neighborhood;
      if (a.router.alpha) rp.alpha = *a.router.alpha;
      if (a.router.beta) rp.beta = *a.router.beta;
      checkRouterParams(rp);
      const RoutePath p = findPath(w, *s, *g, rp);
      out["searches"] = J::array({{{"mode", toString(rp.mode)},
                                   {"explored", p.metrics.explored_count},
                                   {"frontier_peak", p.metrics.frontier_peak},
                                   {"turns", p.metrics.turn_count},
                                   {"length_mm", detail::round6(p.metrics.length_mm)},
                                   {"cost", detail::round6(p.metrics.cost)},
                                   {"nodes", nodesJson(p.nodes)}}});
      if (!a.voxels.empty()) writeFile(a.voxels, voxelDump(w, &p));
    } else {
      auto loaded = load(a.file, a.library);
      if (!loaded) return kExitDiagnostics;
      const auto opt = compileOptions(a.router, {});
      const Netlist n = effectiveNetlist(loaded->netlist, loaded->library, opt);
      RouterParams rp{n.params.alpha, n.params.beta, opt.neighborhood, opt.mode};
      BuildOptions bo;
      bo.order = opt.order;
      const RoutedNetwork net = buildNetwork(n, loaded->library, rp, bo);
      J searches = J::array();
      for (const auto& r : net.routes)
        searches.push_back({{"connection", r.label},
                            {"explored", r.metrics.explored_count},
                            {"frontier_peak", r.metrics.frontier_peak},
                            {"turns", r.metrics.turn_count},
                            {"length_mm", detail::round6(r.metrics.length_mm)},
                            {"cost", detail::round6(r.metrics.cost)}});
      out["circuit"] = n.name;
      out["searches"] = searches;
      J paths = J::array();
      for (const auto& [id, p] : net.registry.paths()) paths.push_back({{"id", id}, {"nodes", nodesJson(p.nodes)}});
      out["paths"] = paths;
      J junctions = J::array();
      for (const auto& jn : net.junctions) junctions.push_back({jn.point.i, jn.point.j, jn.point.k});
      out["junctions"] = junctions;
      if (!a.voxels.empty()) writeFile(a.voxels, voxelDump(net.world));
    }
  } catch (const RoutingError& e) {
    std::cerr << "error: routing failed: " << e.what() << "\n";
    return kExitBuild;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluidcc: fluidic logic circuit compiler"};
  app.set_version_flag("--version", "fluidcc " FLUIDCC_VERSION);
  app.require_subcommand(1);

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "Route and mesh a netlist into STL plus a JSON report");
  compile->add_option("file", ca.file, "Netlist (.fcc)")->required();
  compile->add_option("-o,--output", ca.out, "Output directory");
  compile->add_option("--library", ca.library, "Component library (.fclib)");
  compile->add_flag("--ascii", ca.ascii, "Write ASCII STL");
  compile->add_flag("--keep-going", ca.keep_going, "Report every unroutable connection");
  compile->add_option("--segments", ca.segments, "Tube cross-section segments")->check(CLI::Range(3, 256));
  compile->add_option("--fillet-radius", ca.fillet, "Bend fillet radius, mm");
  compile->add_option("--param", ca.params, "Override a circuit parameter, key=value");
  compile->add_flag("!--no-timings", ca.timings, "Omit timings from the report");
  addRouterFlags(compile, ca.router);

  SimArgs sa;
  auto* sim = app.add_subcommand("sim", "Simulate a netlist at gate level");
  sim->add_option("file", sa.file, "Netlist (.fcc)")->required();
  sim->add_option("--library", sa.library, "Component library (.fclib)");
  sim->add_option("--inputs", sa.inputs, "Combinational evaluation, e.g. A=1,B=0");
  sim->add_flag("--truth-table", sa.truth, "Print the full truth table");
  sim->add_option("--until", sa.until, "Event simulation horizon, e.g. 2s or 500ms");
  sim->add_option("--watch", sa.watch, "Comma-separated nets to export");
  sim->add_option("--stimulus", sa.stimulus, "Input transitions, CSV time_s,net,level");
  sim->add_option("--delay", sa.delay, "Uniform gate delay");
  sim->add_option("--format", sa.format, "Waveform format")->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("-o,--output", sa.out, "Waveform file (default stdout)");
  sim->add_flag("--frequency", sa.frequency, "Measure oscillation frequency of watched nets");
  sim->add_option("--settle", sa.settle, "Ignore transitions before this time when measuring");

  RouteDebugArgs ra;
  auto* rdbg = app.add_subcommand("route-debug", "Print per-search router statistics as JSON");
  rdbg->add_option("file", ra.file, "Netlist (.fcc)");
  rdbg->add_option("--library", ra.library, "Component library (.fclib)");
  rdbg->add_option("--grid", ra.grid, "Route on a voxel dump instead of a netlist");
  rdbg->add_option("--start", ra.start, "Start cell i,j,k (with --grid)");
  rdbg->add_option("--goal", ra.goal, "Goal cell i,j,k (with --grid)");
  rdbg->add_option("--voxels", ra.voxels, "Write a voxel dump of the final grid");
  addRouterFlags(rdbg, ra.router);

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Compare modified and standard search on random scenes");
  bench->add_option("--scenes", bo.scenes, "Number of scenes")->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", bo.seed, "Random seed");
  bench->add_option("--density", bo.density, "Obstacle density")->check(CLI::Range(0.0, 0.9));

  std::string checkFile, checkLibrary;
  auto* check = app.add_subcommand("check", "Parse and validate a netlist");
  check->add_option("file", checkFile, "Netlist (.fcc)")->required();
  check->add_option("--library", checkLibrary, "Component library (.fclib)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitDiagnostics;
  }

  if (*compile) return runCompile(ca);
  if (*sim) return runSim(sa);
  if (*rdbg) {
    if (ra.file.empty() == ra.grid.empty()) {
      std::cerr << "error: route-debug needs either a netlist or --grid\n";
      return kExitDiagnostics;
    }
    return runRouteDebug(ra);
  }
  if (*bench) {
    std::cout << benchJson(runBench(bo)).dump(2) << "\n";
    return kExitOk;
  }
  if (*check) {
    auto loaded = load(checkFile, checkLibrary);
    if (!loaded) return kExitDiagnostics;
    std::cout << checkFile << ": ok (" << loaded->netlist.gates.size() << " gates, "
              << loaded->netlist.connections.size() << " connections)\n";
    return kExitOk;
  }
  return kExitDiagnostics;
}
