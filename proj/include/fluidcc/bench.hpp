#pragma once

// Seeded comparison of the modified and standard search on random voxel
// scenes: even scenes are flat 40x40x1, odd scenes 30x30x10.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidcc/router.hpp"

namespace fluidcc {

struct BenchOptions {
  int scenes = 50;
  std::uint64_t seed = 7;
  double density = 0.2;  // blocked cell fraction
  RouterParams params;
};

struct BenchScene {
  int index = 0;
  std::string kind;
  int ni = 0, nj = 0, nk = 0;
  GridIndex start, goal;
  bool solvable = false;
  std::size_t modified_explored = 0, standard_explored = 0;
  double modified_cost = 0, standard_cost = 0;
  double modified_length = 0, standard_length = 0;
};

struct BenchSummary {
  int scenes = 0;
  int solvable = 0;
  int modified_fewer = 0;
  double fewer_fraction = 0;    // of solvable scenes
  double median_reduction = 0;  // 1 - modified/standard explored
  std::size_t modified_total = 0, standard_total = 0;
};

struct BenchResult {
  BenchOptions options;
  std::vector<BenchScene> scenes;
  BenchSummary summary;
};

namespace detail {

// Uniform integer in [0, n) by rejection, so draws are identical on every
// standard library (std::uniform_int_distribution is not specified).
inline int uniformIndex(std::mt19937_64& rng, int n) {
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return static_cast<int>(x % un);
}

inline double uniformUnit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Scene `index` of the suite: occupancy plus two distinct free endpoints.
inline GridWorld benchScene(std::mt19937_64& rng, int index, double density, GridIndex& start,
                            GridIndex& goal) {
  const bool flat = index % 2 == 0;
  const int ni = flat ? 40 : 30, nj = flat ? 40 : 30, nk = flat ? 1 : 10;
  GridWorld w(ni, nj, nk, 1.0);
  for (int k = 0; k < nk; ++k)
    for (int j = 0; j < nj; ++j)
      for (int i = 0; i < ni; ++i)
        if (detail::uniformUnit(rng) < density) w.block({i, j, k}, CellTag::Footprint);
  auto pick = [&] {
    for (;;) {
      const GridIndex g{detail::uniformIndex(rng, ni), detail::uniformIndex(rng, nj),
                        detail::uniformIndex(rng, nk)};
      if (!w.blocked(g)) return g;
    }
  };
  start = pick();
  do goal = pick();
  while (goal == start);
  return w;
}

inline BenchResult runBench(const BenchOptions& opt) {
  BenchResult r;
  r.options = opt;
  std::mt19937_64 rng(opt.seed);
  std::vector<double> reductions;
  for (int s = 0; s < opt.scenes; ++s) {
    BenchScene sc;
    sc.index = s;
    const GridWorld w = benchScene(rng, s, opt.density, sc.start, sc.goal);
    sc.ni = w.dims()[0];
    sc.nj = w.dims()[1];
    sc.nk = w.dims()[2];
    sc.kind = sc.nk == 1 ? "flat" : "3d";
    try {
      const auto cmp = compareSearch(w, sc.start, sc.goal, opt.params);
      sc.solvable = true;
      sc.modified_explored = cmp.modified.metrics.explored_count;
      sc.standard_explored = cmp.standard.metrics.explored_count;
      sc.modified_cost = cmp.modified.metrics.cost;
      sc.standard_cost = cmp.standard.metrics.cost;
      sc.modified_length = cmp.modified.metrics.length_mm;
      sc.standard_length = cmp.standard.metrics.length_mm;
      ++r.summary.solvable;
      if (sc.modified_explored < sc.standard_explored) ++r.summary.modified_fewer;
      r.summary.modified_total += sc.modified_explored;
      r.summary.standard_total += sc.standard_explored;
      reductions.push_back(1.0 - double(sc.modified_explored) / double(sc.standard_explored));
    } catch (const RoutingError&) {
    }
    r.scenes.push_back(sc);
  }
  r.summary.scenes = opt.scenes;
  if (r.summary.solvable > 0) {
    r.summary.fewer_fraction = double(r.summary.modified_fewer) / r.summary.solvable;
    std::sort(reductions.begin(), reductions.end());
    const std::size_t m = reductions.size();
    r.summary.median_reduction =
        m % 2 ? reductions[m / 2] : 0.5 * (reductions[m / 2 - 1] + reductions[m / 2]);
  }
  return r;
}

inline nlohmann::ordered_json benchJson(const BenchResult& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["seed"] = r.options.seed;
  j["density"] = r.options.density;
  j["alpha"] = r.options.params.alpha;
  j["beta"] = r.options.params.beta;
  j["scenes"] = nlohmann::ordered_json::array();
  for (const auto& s : r.scenes) {
    nlohmann::ordered_json e;
    e["index"] = s.index;
    e["kind"] = s.kind;
    e["dims"] = {s.ni, s.nj, s.nk};
    e["start"] = {s.start.i, s.start.j, s.start.k};
    e["goal"] = {s.goal.i, s.goal.j, s.goal.k};
    e["solvable"] = s.solvable;
    if (s.solvable) {
      e["modified_explored"] = s.modified_explored;
      e["standard_explored"] = s.standard_explored;
      e["modified_length"] = s.modified_length;
      e["standard_length"] = s.standard_length;
    }
    j["scenes"].push_back(std::move(e));
  }
  const auto& m = r.summary;
  j["aggregate"] = {{"scenes", m.scenes},
                    {"solvable", m.solvable},
                    {"modified_fewer", m.modified_fewer},
                    {"fewer_fraction", m.fewer_fraction},
                    {"median_reduction", m.median_reduction},
                    {"modified_explored_total", m.modified_total},
                    {"standard_explored_total", m.standard_total}};
  return j;
}

}  // namespace fluidcc
