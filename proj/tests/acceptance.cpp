// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fluidcc/bench.hpp"
#include "fluidcc/compile.hpp"
#include "fluidcc/sim.hpp"
#include "fluidcc/stl.hpp"
#include "oracle.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace fluidcc;
using Clock = std::chrono::steady_clock;

namespace {

double secondsSince(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fullAdder() {
  const auto t0 = Clock::now();
  const Netlist n = testsupport::loadCircuit("full_adder");
  bool typesOk = true;
  for (const auto& g : n.gates) typesOk &= g.type == "AND" || g.type == "OR" || g.type == "INHIBIT";
  const TruthTable t = truthTable(buildSimCircuit(n, testsupport::defaultLibrary()));
  int good = 0;
  for (const auto& [in, out] : t.rows) {
    const int a = in[0], b = in[1], c = in[2];
    good += out[0] == (a ^ b ^ c) && out[1] == (a + b + c >= 2);
  }
  const double s = secondsSince(t0);
  return {n.gates.size() == 9 && typesOk && t.rows.size() == 8 && good == 8 && s < 1.0,
          fmt("%zu gates, AND/OR/INHIBIT only: %s, %d/8 rows correct, %.3f s", n.gates.size(),
              typesOk ? "yes" : "no", good, s)};
}

Outcome routerEfficiency() {
  const auto t0 = Clock::now();
  const BenchResult r = runBench(BenchOptions{});
  const double s = secondsSince(t0);
  const auto& m = r.summary;
  return {m.solvable > 0 && m.fewer_fraction >= 0.8 && m.median_reduction >= 0.15 && s < 30,
          fmt("%d/%d solvable, modified fewer in %d (%.2f), median reduction %.3f, explored %zu vs %zu, %.2f s",
              m.solvable, m.scenes, m.modified_fewer, m.fewer_fraction, m.median_reduction, m.modified_total,
              m.standard_total, s)};
}

Outcome optimality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  RouterParams p;
  p.mode = SearchMode::Standard;
  int solvable = 0, match = 0, agreeUnsolvable = 0, unsolvable = 0;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    GridIndex s, t;
    const GridWorld w = oracle::randomGrid(rng, s, t);
    const double best = oracle::dijkstra(w, s, t);
    if (std::isinf(best)) {
      ++unsolvable;
      try {
        findPath(w, s, t, p);
      } catch (const RoutingError&) {
        ++agreeUnsolvable;
      }
      continue;
    }
    ++solvable;
    try {
      const double rel = std::abs(findPath(w, s, t, p).metrics.cost - best) / std::max(1.0, best);
      worst = std::max(worst, rel);
      match += rel <= 1e-9;
    } catch (const RoutingError&) {
    }
  }
  const double s = secondsSince(t0);
  return {match == solvable && agreeUnsolvable == unsolvable && s < 60,
          fmt("%d/%d solvable grids optimal (worst rel. error %.1e), %d/%d unreachable agreed, %.2f s", match,
              solvable, worst, agreeUnsolvable, unsolvable, s)};
}

Outcome rewardExactness() {
  const RouterParams p;
  const double down = stepCost(SearchState{{0, 0, 1}, 0, 0, {}, {}}, {0, 0, 0}, p);
  const double ground = stepCost(SearchState{{0, 0, 0}, 0, 0, {}, {}}, {1, 0, 0}, p);
  const double up = stepCost(SearchState{{0, 0, 0}, 0, 0, {}, {}}, {0, 0, 1}, p);
  const bool ok = std::abs(down + p.alpha) < 1e-12 && std::abs(ground - (1 - p.alpha)) < 1e-12 &&
                  std::abs(up - 1) < 1e-12;
  return {ok, fmt("straight down %.12g, on-ground %.12g, upward %.12g (alpha %.2g)", down, ground, up, p.alpha)};
}

Outcome junctionProperty() {
  auto build = [](const std::string& name) {
    const Netlist n = testsupport::loadCircuit(name);
    return std::pair{n, buildNetwork(n, testsupport::defaultLibrary(), RouterParams{n.params.alpha, n.params.beta})};
  };
  const auto [n2, f2] = build("fanout2");
  const auto [n3, f3] = build("fanout3");
  bool ok = f2.registry.size() == 3 && f2.junctions.size() == 1 && f3.registry.size() == 5 && f3.junctions.size() == 2;
  std::string bad;
  for (const char* name : testsupport::kShippedCircuits) {
    const auto [n, net] = build(name);
    bool good = net.registry.size() == n.connections.size() + net.junctions.size();
    for (const auto& j : net.junctions) {
      int at = 0;
      for (const auto& inc : j.incident) {
        const auto& nodes = net.registry.at(inc.path).nodes;
        at += (inc.at_start ? nodes.front() : nodes.back()) == j.point;
      }
      good &= j.incident.size() == 3 && at == 3;
    }
    if (!good) bad += std::string(" ") + name;
    ok &= good;
  }
  return {ok, fmt("fanout2 paths=%zu junctions=%zu; fanout3 paths=%zu junctions=%zu; conservation and 3-way "
                  "incidence on all %zu examples%s",
                  f2.registry.size(), f2.junctions.size(), f3.registry.size(), f3.junctions.size(),
                  std::size(testsupport::kShippedCircuits), bad.empty() ? "" : (", failing:" + bad).c_str())};
}

Outcome meshIntegrity() {
  std::size_t shells = 0, failing = 0;
  for (const char* name : testsupport::kShippedCircuits) {
    const CompileOutput out = compileNetlist(testsupport::loadCircuit(name), testsupport::defaultLibrary());
    for (const auto& s : out.scene.shells) {
      ++shells;
      const auto r = watertightCheck(s);
      failing += !(r.non_manifold_edges == 0 && r.winding_conflicts == 0);
    }
  }
  const std::vector<Vec3> line{{0, 0, 0}, {10, 0, 0}};
  const std::vector<TriMesh> tube{sweepTube(line, SweepProfile{16, 0.75, 1.25}).mesh};
  std::ostringstream os;
  writeStlBinary(tube, os);
  const std::string bytes = os.str();
  std::istringstream is(bytes);
  const TriMesh back = readStlBinary(is);
  bool bitsOk = back.triangles.size() == tube[0].triangles.size();
  for (std::size_t t = 0; bitsOk && t < back.triangles.size(); ++t)
    for (int c = 0; c < 3; ++c) {
      const Vec3& a = tube[0].vertices[tube[0].triangles[t][c]];
      const Vec3& b = back.vertices[back.triangles[t][c]];
      bitsOk &= float(a.x) == float(b.x) && float(a.y) == float(b.y) && float(a.z) == float(b.z);
    }
  const std::size_t T = tube[0].triangles.size();
  const bool ok = failing == 0 && T == 128 && bitsOk && bytes.size() == 84 + 50 * T;
  return {ok, fmt("%zu/%zu shells watertight; straight tube %zu triangles; STL %zu bytes = 84 + 50*%zu; round trip %s",
                  shells - failing, shells, T, bytes.size(), T, bitsOk ? "exact" : "MISMATCH")};
}

Outcome ringOscillator() {
  const double tau = 0.02;
  SimConfig cfg;
  cfg.gate_delay = tau;
  cfg.horizon = 3.0;
  auto period = [&](const std::string& name, std::map<std::string, Level> init) {
    SimConfig c = cfg;
    c.initial = std::move(init);
    const Waveform w = eventSimulate(buildSimCircuit(testsupport::loadCircuit(name), testsupport::defaultLibrary()), c);
    return toTicks(measureFrequency(*w.find("out"), toTicks(0.5)).period_s);
  };
  const Ticks p3 = period("ring3", {}), p5 = period("ring5", {});
  const Ticks v3 = period("ring_oscillator", {{"C", 0}}), v5 = period("ring_oscillator", {{"C", 1}});
  const Ticks t = toTicks(tau);
  const bool ok = std::llabs(p3 - 6 * t) <= 1 && std::llabs(p5 - 10 * t) <= 1 && v5 * 3 == v3 * 5;
  return {ok, fmt("ring3 %s s (6tau), ring5 %s s (10tau); variable ring C=0 %s s, C=1 %s s, f ratio %lld:%lld",
                  formatSeconds(p3).c_str(), formatSeconds(p5).c_str(), formatSeconds(v3).c_str(),
                  formatSeconds(v5).c_str(), (long long)(v5 / std::gcd(v3, v5)), (long long)(v3 / std::gcd(v3, v5)))};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("fluidcc_acceptance_" + std::to_string(::getpid()));
  bool same = true;
  std::string diff;
  double adderSeconds = 0;
  nlohmann::json adder;
  int rcBad = 0;
  for (const char* name : testsupport::kShippedCircuits) {
    std::string stl[2], rep[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path dir = root / (std::string(name) + std::to_string(k));
      const std::string cmd = std::string("'") + FLUIDCC_CLI + "' compile '" +
                              testsupport::sourcePath("circuits/" + std::string(name) + ".fcc") + "' -o '" +
                              dir.string() + "' >/dev/null 2>&1";
      const auto t0 = Clock::now();
      const int status = std::system(cmd.c_str());
      if (std::string(name) == "full_adder") adderSeconds = std::max(adderSeconds, secondsSince(t0));
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++rcBad;
      stl[k] = slurp(dir / (std::string(name) + ".stl"));
      auto j = nlohmann::json::parse(slurp(dir / (std::string(name) + ".report.json")), nullptr, false);
      if (std::string(name) == "full_adder") adder = j;
      if (j.is_object()) j.erase("timings_ms");
      rep[k] = j.dump();
    }
    if (stl[0].empty() || stl[0] != stl[1] || rep[0] != rep[1]) {
      same = false;
      diff += std::string(" ") + name;
    }
  }
  fs::remove_all(root);
  bool fits = false;
  std::string box = "no report";
  if (adder.is_object()) {
    const auto& lo = adder["mesh"]["bbox_min"];
    const auto& hi = adder["mesh"]["bbox_max"];
    fits = lo[0].get<double>() >= 0 && lo[1].get<double>() >= 0 && hi[0].get<double>() <= 250 &&
           hi[1].get<double>() <= 210;
    box = fmt("bbox x %.1f..%.1f, y %.1f..%.1f, z %.3f..%.1f mm", lo[0].get<double>(), hi[0].get<double>(),
              lo[1].get<double>(), hi[1].get<double>(), lo[2].get<double>(), hi[2].get<double>());
  }
  return {same && rcBad == 0 && adderSeconds < 60 && fits,
          fmt("%zu examples compiled twice, byte-identical: %s%s; full adder %.2f s, %s (bed 250x210)",
              std::size(testsupport::kShippedCircuits), same ? "yes" : "no", diff.c_str(), adderSeconds, box.c_str())};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"full-adder structure and truth table", fullAdder},
      {"router efficiency on 50 seeded scenes", routerEfficiency},
      {"standard mode matches Dijkstra on 200 grids", optimality},
      {"reward formula exactness", rewardExactness},
      {"junction property and path conservation", junctionProperty},
      {"mesh integrity and STL round trip", meshIntegrity},
      {"ring oscillator periods and 5:3 switch", ringOscillator},
      {"end-to-end determinism and bed fit", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << index << " " << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
