#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "fluidcc/bench.hpp"
#include "fluidcc/grid.hpp"
#include "fluidcc/router.hpp"
#include "oracle.hpp"

using namespace fluidcc;
using oracle::boxFree;
using oracle::dijkstra;
using oracle::randomGrid;

namespace {

RouterParams standard() {
  RouterParams p;
  p.mode = SearchMode::Standard;
  return p;
}

}  // namespace

TEST_CASE("stepCost reward terms on hand-built cases", "[router][reward]") {
  RouterParams p;  // alpha = beta = 0.5, modified
  SearchState above{{0, 0, 1}, 0.0, 0.0, {}, {}};
  CHECK(std::abs(stepCost(above, {0, 0, 0}, p) - (-0.5)) < 1e-12);  // straight down onto the bed
  SearchState ground{{0, 0, 0}, 0.0, 0.0, {}, {}};
  CHECK(std::abs(stepCost(ground, {1, 0, 0}, p) - 0.5) < 1e-12);  // along the bed
  CHECK(std::abs(stepCost(ground, {0, 0, 1}, p) - 1.0) < 1e-12);  // upward
}

TEST_CASE("stepCost scales with pitch and accumulates g", "[router][reward]") {
  RouterParams p;
  SearchState mid{{0, 0, 2}, 4.0, 0.0, {}, {}};
  // Diagonal descent keeps only the horizontal part: 4 + 3 * sqrt(2).
  CHECK(stepCost(mid, {1, 1, 1}, p, 3.0) == Catch::Approx(4 + 3 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(stepCost(mid, {1, 1, 1}, standard(), 3.0) == Catch::Approx(4 + 3 * std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("heuristic is Chebyshev plus beta Euclid", "[router]") {
  RouterParams p;
  CHECK(std::abs(heuristic({0, 0, 0}, {3, 4, 0}, p) - 6.5) < 1e-12);
  CHECK(heuristic({2, 2, 2}, {2, 2, 2}, p) == 0);
  CHECK(std::abs(heuristic({0, 0, 0}, {1, 1, 1}, p) - (1 + 0.5 * std::sqrt(3.0))) < 1e-12);
  CHECK(std::abs(heuristic({0, 0, 0}, {3, 4, 0}, standard()) - 5) < 1e-12);
}

TEST_CASE("standard mode matches a Dijkstra optimum on 200 random grids", "[router][oracle]") {
  std::mt19937_64 rng(20240611);
  int solvable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    GridIndex s, t;
    const GridWorld w = randomGrid(rng, s, t);
    const double best = dijkstra(w, s, t);
    INFO("trial " << trial);
    if (std::isinf(best)) {
      CHECK_THROWS_AS(findPath(w, s, t, standard()), RoutingError);
      continue;
    }
    ++solvable;
    const RoutePath p = findPath(w, s, t, standard());
    CHECK(std::abs(p.metrics.cost - best) <= 1e-9 * std::max(1.0, best));
    REQUIRE(p.nodes.front() == s);
    REQUIRE(p.nodes.back() == t);
    for (std::size_t i = 1; i < p.nodes.size(); ++i) CHECK(boxFree(w, p.nodes[i - 1], p.nodes[i]));
  }
  CHECK(solvable > 100);
}

TEST_CASE("modified mode returns legal paths with consistent metrics", "[router]") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    GridIndex s, t;
    const GridWorld w = randomGrid(rng, s, t);
    if (std::isinf(dijkstra(w, s, t))) continue;
    const RoutePath p = findPath(w, s, t, RouterParams{});
    for (std::size_t i = 1; i < p.nodes.size(); ++i) REQUIRE(boxFree(w, p.nodes[i - 1], p.nodes[i]));
    CHECK(p.metrics.turn_count == countTurns(p.nodes));
    CHECK(p.metrics.length_mm == Catch::Approx(polylineLength(p.world_polyline)));
    CHECK(p.metrics.explored_count > 0);
    CHECK(p.metrics.frontier_peak > 0);
  }
}

TEST_CASE("modified mode drops to the bed sooner", "[router]") {
  GridWorld w(12, 5, 4, 1.0);
  auto firstOnBed = [](const RoutePath& p) {
    std::size_t i = 0;
    while (p.nodes[i].k != 0) ++i;
    return i;
  };
  const RoutePath mod = findPath(w, {0, 2, 3}, {11, 2, 0}, RouterParams{});
  const RoutePath std_ = findPath(w, {0, 2, 3}, {11, 2, 0}, standard());
  CHECK(firstOnBed(mod) == 3);
  CHECK(firstOnBed(mod) < firstOnBed(std_));
  CHECK(mod.metrics.cost == Catch::Approx(6.5));

  const RoutePath level = findPath(w, {0, 2, 3}, {11, 2, 3}, standard());
  CHECK(level.nodes.size() == 12);
  CHECK(level.metrics.turn_count == 0);
}

TEST_CASE("no corner cutting past a blocked cell", "[router]") {
  GridWorld w(2, 2, 1, 1.0);
  w.block({1, 0, 0}, CellTag::Footprint);
  w.block({0, 1, 0}, CellTag::Footprint);
  CHECK_THROWS_AS(findPath(w, {0, 0, 0}, {1, 1, 0}, standard()), RoutingError);
}

TEST_CASE("axis-only neighbourhood makes Manhattan paths", "[router]") {
  GridWorld w(6, 6, 1, 1.0);
  RouterParams p = standard();
  p.neighborhood = Neighborhood::Axis6;
  const RoutePath r = findPath(w, {0, 0, 0}, {5, 5, 0}, p);
  CHECK(r.metrics.cost == Catch::Approx(10));
}

TEST_CASE("blocked or out-of-range endpoints throw", "[router]") {
  GridWorld w(3, 3, 1, 1.0);
  w.block({1, 1, 0}, CellTag::Footprint);
  CHECK_THROWS_AS(findPath(w, {1, 1, 0}, {0, 0, 0}, RouterParams{}), RoutingError);
  CHECK_THROWS_AS(findPath(w, {0, 0, 0}, {5, 0, 0}, RouterParams{}), RoutingError);
}

TEST_CASE("search is deterministic", "[router]") {
  std::mt19937_64 rng(5);
  GridIndex s, t;
  const GridWorld w = randomGrid(rng, s, t);
  try {
    CHECK(findPath(w, s, t, RouterParams{}) == findPath(w, s, t, RouterParams{}));
  } catch (const RoutingError&) {
    CHECK_THROWS(findPath(w, s, t, RouterParams{}));
  }
}

TEST_CASE("voxel dump round-trips obstacles", "[router][voxel]") {
  std::mt19937_64 rng(11);
  GridIndex s, t;
  const GridWorld w = randomGrid(rng, s, t);
  const GridWorld back = parseVoxelDump(voxelDump(w));
  REQUIRE(back.dims() == w.dims());
  for (std::size_t c = 0; c < w.cellCount(); ++c)
    CHECK(back.blocked(w.fromLinear(c)) == w.blocked(w.fromLinear(c)));
}

TEST_CASE("voxel dump golden", "[router][voxel]") {
  GridWorld w(4, 3, 1, 1.0);
  w.block({1, 0, 0}, CellTag::Footprint);
  w.block({2, 1, 0}, CellTag::KeepOut);
  w.open({3, 1, 0}, CellTag::Port);
  CHECK(voxelDump(w) == "layer 0\n.#..\n..xP\n....\n");
  const RoutePath p = findPath(w, {0, 0, 0}, {3, 0, 0}, standard());
  CHECK(p.metrics.cost == Catch::Approx(5 + std::sqrt(2.0)));
  CHECK(voxelDump(w, &p) == "layer 0\nS#.G\n*.x*\n.***\n");
}

TEST_CASE("modified search explores fewer nodes on the seeded suite", "[router][bench]") {
  const BenchResult r = runBench(BenchOptions{});
  REQUIRE(r.scenes.size() == 50);
  CHECK(r.summary.solvable > 0);
  CHECK(r.summary.fewer_fraction >= 0.8);
  CHECK(r.summary.median_reduction >= 0.15);
  const BenchResult again = runBench(BenchOptions{});
  CHECK(benchJson(r).dump() == benchJson(again).dump());
}

TEST_CASE("bench RNG helpers are in range", "[router][bench]") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = detail::uniformUnit(rng);
    CHECK((u >= 0 && u < 1));
    const int k = detail::uniformIndex(rng, 7);
    CHECK((k >= 0 && k < 7));
  }
}
