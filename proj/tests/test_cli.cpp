#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fluidcc/stl.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using testsupport::sourcePath;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fluidcc_test_cli_" + std::to_string(::getpid())) / name;
  fs::create_directories(p);
  return p;
}

Run run(const std::string& args, const std::string& env = "") {
  const fs::path dir = scratch("io");
  const std::string cmd = env + " '" + std::string(FLUIDCC_CLI) + "' " + args + " >'" + (dir / "out").string() +
                          "' 2>'" + (dir / "err").string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "out"), slurp(dir / "err")};
}

std::string circuitArg(const std::string& name) { return "'" + sourcePath("circuits/" + name + ".fcc") + "'"; }

}  // namespace

TEST_CASE("compile writes STL and a consistent report", "[cli]") {
  const fs::path out = scratch("adder");
  const Run r = run("compile " + circuitArg("full_adder") + " -o '" + out.string() + "'");
  REQUIRE(r.code == 0);
  const std::string stl = slurp(out / "full_adder.stl");
  const json rep = json::parse(slurp(out / "full_adder.report.json"));
  CHECK(rep["schema_version"] == 1);
  CHECK(rep["netlist"]["gates"] == 9);
  CHECK(rep["config"]["params"]["grid_pitch"] == 3.0);
  CHECK(rep.contains("timings_ms"));
  std::istringstream is(stl);
  const auto mesh = fluidcc::readStlBinary(is);
  CHECK(rep["mesh"]["triangles"] == mesh.triangles.size());
  CHECK(rep["mesh"]["stl_bytes"] == stl.size());
  CHECK(stl.size() == 84 + 50 * mesh.triangles.size());
  CHECK(rep["network"]["paths"].get<int>() == 20 + rep["network"]["junctions"].get<int>());
  CHECK(rep["routing"]["connections"].size() == 20);
  CHECK(rep["mesh"]["bbox_max"][0].get<double>() <= 250);
  CHECK(rep["mesh"]["bbox_max"][1].get<double>() <= 210);
}

TEST_CASE("compile flags take precedence over param lines", "[cli]") {
  const fs::path out = scratch("flags");
  const Run r = run("compile " + circuitArg("fanout2") + " -o '" + out.string() +
                    "' --alpha 0.3 --param beta=0.2 --mode standard --ascii --segments 12");
  REQUIRE(r.code == 0);
  const json rep = json::parse(slurp(out / "fanout2.report.json"));
  CHECK(rep["config"]["params"]["alpha"] == 0.3);
  CHECK(rep["config"]["params"]["beta"] == 0.2);
  CHECK(rep["config"]["router"]["mode"] == "standard");
  CHECK(rep["config"]["mesh"]["segments"] == 12);
  CHECK(slurp(out / "fanout2.stl").rfind("solid fanout2", 0) == 0);
  CHECK(run("compile " + circuitArg("fanout2") + " -o '" + out.string() + "' --param nonsense=1").code == 1);
}

TEST_CASE("compile exit codes", "[cli]") {
  const Run missing = run("compile /nonexistent/x.fcc -o '" + scratch("m").string() + "'");
  CHECK(missing.code == 1);
  CHECK(missing.err.find("not found") != std::string::npos);

  const Run walled = run("compile '" + sourcePath("tests/data/walled.fcc") + "' --library '" +
                         sourcePath("tests/data/walls.fclib") + "' -o '" + scratch("w").string() + "'");
  CHECK(walled.code == 2);
  CHECK(walled.err.find("S.out -> P.in") != std::string::npos);
  CHECK_FALSE(fs::exists(scratch("w") / "walled.stl"));

  CHECK(run("frobnicate").code == 1);
  CHECK(run("").code == 1);
}

TEST_CASE("compile output is byte-identical across runs", "[cli][determinism]") {
  for (const char* name : testsupport::kShippedCircuits) {
    INFO(name);
    const fs::path a = scratch(std::string("det_a_") + name), b = scratch(std::string("det_b_") + name);
    REQUIRE(run("compile " + circuitArg(name) + " -o '" + a.string() + "'").code == 0);
    REQUIRE(run("compile " + circuitArg(name) + " -o '" + b.string() + "'").code == 0);
    CHECK(slurp(a / (std::string(name) + ".stl")) == slurp(b / (std::string(name) + ".stl")));
    json ra = json::parse(slurp(a / (std::string(name) + ".report.json")));
    json rb = json::parse(slurp(b / (std::string(name) + ".report.json")));
    ra.erase("timings_ms");
    rb.erase("timings_ms");
    CHECK(ra.dump() == rb.dump());
  }
}

TEST_CASE("sim subcommand", "[cli][sim]") {
  const Run table = run("sim " + circuitArg("full_adder") + " --truth-table");
  REQUIRE(table.code == 0);
  CHECK(std::count(table.out.begin(), table.out.end(), '\n') == 9);

  const Run point = run("sim " + circuitArg("full_adder") + " --inputs A=1,B=0,Cin=1");
  CHECK(point.code == 0);
  CHECK(point.out == "Sum=0\nCout=1\n");

  const Run wave = run("sim " + circuitArg("ring_oscillator") + " --until 1s --watch out");
  REQUIRE(wave.code == 0);
  CHECK(wave.out.rfind("time_s,net,level\n", 0) == 0);
  CHECK(std::count(wave.out.begin(), wave.out.end(), '\n') >= 3);

  const Run cyc = run("sim " + circuitArg("ring_oscillator") + " --inputs C=0");
  CHECK(cyc.code == 1);
  CHECK(cyc.err.find("--until") != std::string::npos);

  const Run freq = run("sim " + circuitArg("ring3") + " --until 2s --watch out --frequency --settle 0.5s");
  CHECK(freq.code == 0);
  CHECK(freq.out.find("8.33333 Hz") != std::string::npos);

  const Run json_ = run("sim " + circuitArg("ring3") + " --until 300ms --watch out --format json");
  CHECK(json::parse(json_.out)["schema_version"] == 1);

  const fs::path stim = scratch("stim") / "c.csv";
  std::ofstream(stim) << "time_s,net,level\n1.0,C,1\n";
  CHECK(run("sim " + circuitArg("ring_oscillator") + " --until 2s --watch out --stimulus '" + stim.string() + "'")
            .code == 0);
  CHECK(run("sim " + circuitArg("ring3") + " --until 1s --watch nowhere").code == 1);
}

TEST_CASE("bench subcommand", "[cli][bench]") {
  const Run a = run("bench --scenes 50 --seed 7");
  REQUIRE(a.code == 0);
  const json j = json::parse(a.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["scenes"].size() == 50);
  CHECK(run("bench --scenes 50 --seed 7").out == a.out);
  CHECK(run("bench --scenes 50 --seed 8").out != a.out);
  const json empty = json::parse(run("bench --scenes 0").out);
  CHECK(empty["scenes"].empty());
  CHECK(empty["aggregate"]["scenes"] == 0);
}

TEST_CASE("check, route-debug and library resolution", "[cli]") {
  CHECK(run("check " + circuitArg("xor")).code == 0);
  const fs::path bad = scratch("bad") / "bad.fcc";
  std::ofstream(bad) << "circuit bad\ngate G NAND\n";
  const Run r = run("check '" + bad.string() + "'");
  CHECK(r.code == 1);
  CHECK(r.err.find("bad.fcc:2:8: error: unknown gate type 'NAND'") != std::string::npos);

  CHECK(run("check " + circuitArg("xor"), "FLUIDCC_LIBRARY=/nonexistent.fclib").code == 1);
  CHECK(run("check '" + sourcePath("tests/data/walled.fcc") + "'",
            "FLUIDCC_LIBRARY='" + sourcePath("tests/data/walls.fclib") + "'")
            .code == 0);

  const Run dbg = run("route-debug " + circuitArg("fanout2"));
  REQUIRE(dbg.code == 0);
  const json d = json::parse(dbg.out);
  CHECK(d["schema_version"] == 1);
  CHECK(d["searches"].size() == 2);
  CHECK(d["paths"].size() == 3);
  CHECK(d["junctions"].size() == 1);

  const fs::path grid = scratch("grid") / "g.txt";
  std::ofstream(grid) << "layer 0\n.....\n.###.\n.....\n";
  const fs::path vox = scratch("grid") / "v.txt";
  const Run g = run("route-debug --grid '" + grid.string() + "' --start 0,1,0 --goal 4,1,0 --mode standard --voxels '" +
                    vox.string() + "'");
  REQUIRE(g.code == 0);
  CHECK(json::parse(g.out)["searches"][0]["nodes"].size() == 7);
  CHECK(slurp(vox).find('S') != std::string::npos);
}
