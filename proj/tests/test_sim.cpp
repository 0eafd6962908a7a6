#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fluidcc/sim.hpp"
#include "support.hpp"

using namespace fluidcc;
using testsupport::defaultLibrary;

namespace {

SimCircuit circuit(const std::string& name) {
  return buildSimCircuit(testsupport::loadCircuit(name), defaultLibrary());
}

SimCircuit circuitText(const std::string& text) {
  return buildSimCircuit(testsupport::parseOrThrow(text), defaultLibrary());
}

// A loop of n inverters observed at `out`.
std::string ringText(int n) {
  std::string t = "circuit ring\noutput out at 10 10 1\n";
  for (int i = 0; i < n; ++i) t += "gate N" + std::to_string(i) + " NOT\n";
  for (int i = 0; i < n; ++i)
    t += "connect N" + std::to_string(i) + ".out -> N" + std::to_string((i + 1) % n) + ".in\n";
  t += "connect N0.out -> out\n";
  return t;
}

Level finalLevel(const Waveform& w, const std::string& net) { return w.find(net)->changes.back().second; }

FrequencyMeasurement oscillator(Level control) {
  SimConfig cfg;
  cfg.horizon = 3.0;
  cfg.initial["C"] = control;
  const Waveform w = eventSimulate(circuit("ring_oscillator"), cfg);
  return measureFrequency(*w.find("out"), toTicks(0.5));
}

}  // namespace

TEST_CASE("gate truth functions", "[sim]") {
  const auto eval = [](Behavior b, std::vector<Level> in) { return evalGate(b, in); };
  CHECK(eval(Behavior::NOT, {0}) == 1);
  CHECK(eval(Behavior::NOT, {1}) == 0);
  CHECK(eval(Behavior::AND, {1, 1}) == 1);
  CHECK(eval(Behavior::AND, {1, 0}) == 0);
  CHECK(eval(Behavior::OR, {0, 1}) == 1);
  CHECK(eval(Behavior::OR, {0, 0}) == 0);
  CHECK(eval(Behavior::INHIBIT, {1, 0}) == 1);
  CHECK(eval(Behavior::INHIBIT, {1, 1}) == 0);
  CHECK(eval(Behavior::INHIBIT, {0, 0}) == 0);
  CHECK_THROWS_AS(eval(Behavior::AND, {1}), SimError);
}

TEST_CASE("full adder truth table", "[sim][adder]") {
  const TruthTable t = truthTable(circuit("full_adder"));
  REQUIRE(t.inputs == std::vector<std::string>{"A", "B", "Cin"});
  REQUIRE(t.outputs == std::vector<std::string>{"Sum", "Cout"});
  REQUIRE(t.rows.size() == 8);
  for (const auto& [in, out] : t.rows) {
    const int a = in[0], b = in[1], c = in[2];
    CHECK(out[0] == (a ^ b ^ c));
    CHECK(out[1] == ((a + b + c) >= 2));
    CHECK(2 * out[1] + out[0] == a + b + c);
  }
}

TEST_CASE("full adder point evaluations", "[sim][adder]") {
  const SimCircuit c = circuit("full_adder");
  using Out = std::vector<std::pair<std::string, Level>>;
  CHECK(topoEvaluate(c, {{"A", 1}, {"B", 1}, {"Cin", 0}}) == Out{{"Sum", 0}, {"Cout", 1}});
  CHECK(topoEvaluate(c, {{"A", 1}, {"B", 1}, {"Cin", 1}}) == Out{{"Sum", 1}, {"Cout", 1}});
  CHECK_THROWS_AS(topoEvaluate(c, {{"A", 1}, {"B", 1}}), SimError);
  CHECK_THROWS_AS(topoEvaluate(c, {{"A", 1}, {"B", 1}, {"Cin", 1}, {"D", 0}}), SimError);
}

TEST_CASE("XOR from two INHIBIT gates and an OR", "[sim]") {
  const TruthTable t = truthTable(circuit("xor"));
  REQUIRE(t.rows.size() == 4);
  for (const auto& [in, out] : t.rows) CHECK(out[0] == (in[0] ^ in[1]));
}

TEST_CASE("single NOT has two rows", "[sim]") {
  const TruthTable t = truthTable(circuitText("circuit n\ninput A at 1 1 1\noutput Y at 2 2 1\ngate N NOT\n"
                                              "connect A -> N.in\nconnect N.out -> Y\n"));
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].second[0] == 1);
  CHECK(t.rows[1].second[0] == 0);
  CHECK(t.format() == "A | Y\n0 | 1\n1 | 0\n");
}

TEST_CASE("cyclic circuits refuse combinational evaluation", "[sim]") {
  const SimCircuit c = circuit("ring_oscillator");
  CHECK_FALSE(isCombinational(c));
  try {
    topoEvaluate(c, {{"C", 0}});
    FAIL("expected a cycle error");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find("sim --until") != std::string::npos);
  }
}

TEST_CASE("odd rings oscillate with period 2 n tau", "[sim][ring]") {
  for (double tau : {0.02, 0.013}) {
    SimConfig cfg;
    cfg.gate_delay = tau;
    cfg.horizon = 3.0;
    for (int n : {3, 5, 7}) {
      INFO("n=" << n << " tau=" << tau);
      const Waveform w = eventSimulate(circuitText(ringText(n)), cfg);
      const auto m = measureFrequency(*w.find("out"), toTicks(0.2));
      CHECK(std::abs(m.period_s - 2 * n * tau) <= kTickSeconds);
      CHECK(m.jitter_s <= kTickSeconds);
    }
  }
}

TEST_CASE("shipped three- and five-inverter rings", "[sim][ring]") {
  SimConfig cfg;  // 20 ms
  cfg.horizon = 2.0;
  const auto m3 = measureFrequency(*eventSimulate(circuit("ring3"), cfg).find("out"), toTicks(0.2));
  const auto m5 = measureFrequency(*eventSimulate(circuit("ring5"), cfg).find("out"), toTicks(0.2));
  CHECK(std::abs(m3.period_s - 0.120) <= kTickSeconds);
  CHECK(std::abs(m5.period_s - 0.200) <= kTickSeconds);
  CHECK(m3.hz == Catch::Approx(25.0 / 3).epsilon(1e-9));
  CHECK(m5.hz == Catch::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("even rings latch", "[sim][ring]") {
  SimConfig cfg;
  cfg.horizon = 1.0;
  for (int n : {2, 4}) {
    const Waveform w = eventSimulate(circuitText(ringText(n)), cfg);
    CHECK_THROWS_AS(measureFrequency(*w.find("out")), SimError);
  }
}

TEST_CASE("control input switches ring length 3 to 5", "[sim][ring]") {
  const auto fast = oscillator(0);
  const auto slow = oscillator(1);
  CHECK(std::abs(fast.period_s - 6 * 0.02) <= kTickSeconds);
  CHECK(std::abs(slow.period_s - 10 * 0.02) <= kTickSeconds);
  // Periods are exact tick counts, so the ratio is exact.
  CHECK(toTicks(slow.period_s) * 3 == toTicks(fast.period_s) * 5);
}

TEST_CASE("control switch at run time changes frequency", "[sim][ring]") {
  SimConfig cfg;
  cfg.horizon = 4.0;
  const std::vector<Stimulus> stim{{toTicks(2.0), "C", 1}};
  const Waveform w = eventSimulate(circuit("ring_oscillator"), cfg, stim);
  Trace early = *w.find("out"), late = early;
  std::erase_if(early.changes, [](const auto& c) { return c.first > toTicks(1.9); });
  const auto a = measureFrequency(early, toTicks(0.5));
  const auto b = measureFrequency(late, toTicks(2.5));
  CHECK(a.hz / b.hz == Catch::Approx(5.0 / 3).epsilon(1e-9));
}

TEST_CASE("inertial delay swallows short pulses", "[sim][inertial]") {
  const SimCircuit c = circuitText("circuit inv\ninput A at 1 1 1\noutput Y at 2 2 1\ngate N NOT\n"
                                   "connect A -> N.in\nconnect N.out -> Y\n");
  SimConfig cfg;
  cfg.horizon = 1.0;
  const std::vector<Stimulus> shortPulse{{toTicks(0.1), "A", 1}, {toTicks(0.105), "A", 0}};
  const Waveform w1 = eventSimulate(c, cfg, shortPulse);
  CHECK(w1.find("Y")->changes.size() == 1);  // only the t = 0 level

  const std::vector<Stimulus> longPulse{{toTicks(0.1), "A", 1}, {toTicks(0.13), "A", 0}};
  const Waveform w2 = eventSimulate(c, cfg, longPulse);
  const auto& ch = w2.find("Y")->changes;
  REQUIRE(ch.size() == 3);
  CHECK(ch[1] == std::pair<Ticks, Level>{toTicks(0.12), 0});
  CHECK(ch[2] == std::pair<Ticks, Level>{toTicks(0.15), 1});
}

TEST_CASE("event simulation steady state agrees with combinational evaluation", "[sim][oracle]") {
  std::mt19937_64 rng(8);
  for (const char* name : {"full_adder", "xor"}) {
    const SimCircuit c = circuit(name);
    for (int trial = 0; trial < 16; ++trial) {
      std::map<std::string, Level> in;
      for (const auto& i : c.input_names) in[i] = Level(rng() & 1);
      SimConfig cfg;
      cfg.initial = in;
      cfg.horizon = 1.0;
      const Waveform w = eventSimulate(c, cfg);
      for (const auto& [out, lv] : topoEvaluate(c, in)) CHECK(finalLevel(w, out) == lv);
    }
  }
}

TEST_CASE("per-type delay override", "[sim]") {
  SimConfig cfg;
  cfg.horizon = 2.0;
  cfg.type_delay["NOT"] = 0.05;
  const auto m = measureFrequency(*eventSimulate(circuit("ring3"), cfg).find("out"), toTicks(0.5));
  CHECK(std::abs(m.period_s - 0.3) <= kTickSeconds);
}

TEST_CASE("event limit guards runaway simulations", "[sim]") {
  SimConfig cfg;
  cfg.horizon = 10.0;
  cfg.max_events = 100;
  CHECK_THROWS_AS(eventSimulate(circuit("ring3"), cfg), SimError);
  cfg.gate_delay = 1e-8;
  CHECK_THROWS_AS(eventSimulate(circuit("ring3"), cfg), SimError);
}

TEST_CASE("simulation is deterministic and exports CSV", "[sim][export]") {
  SimConfig cfg;
  cfg.horizon = 0.5;
  const SimCircuit c = circuit("ring3");
  const std::string a = waveformCsv(eventSimulate(c, cfg), {"out"});
  CHECK(a == waveformCsv(eventSimulate(c, cfg), {"out"}));
  CHECK(a.rfind("time_s,net,level\n0.000000,out,", 0) == 0);
  const auto j = waveformJson(eventSimulate(c, cfg), {"out"});
  CHECK(j["schema_version"] == 1);
  CHECK(j["traces"].size() == 1);
}

TEST_CASE("stimulus CSV uses the waveform layout", "[sim][export]") {
  const auto s = parseStimulusCsv("time_s,net,level\n0.250000,C,1\n0.1,A,0\n");
  REQUIRE(s.size() == 2);
  CHECK(s[0].time == toTicks(0.1));
  CHECK(s[1].net == "C");
  CHECK(s[1].level == 1);
  CHECK_THROWS_AS(parseStimulusCsv("0.1,A,2\n"), SimError);
  CHECK_THROWS_AS(parseStimulusCsv("x,A,1\n"), SimError);
}

TEST_CASE("frequency measurement", "[sim][measure]") {
  Trace t{"sq", {{0, 0}}};
  for (int i = 1; i <= 20; ++i) t.changes.emplace_back(i * toTicks(0.06), Level(i % 2));
  const auto m = measureFrequency(t);
  CHECK(m.hz == Catch::Approx(1 / 0.12).margin(1e-4));
  CHECK(m.jitter_s == 0);
  Trace flat{"flat", {{0, 1}}};
  CHECK_THROWS_AS(measureFrequency(flat), SimError);
  Trace slow{"s", {{0, 0}}};
  for (int i = 1; i <= 10; ++i) slow.changes.emplace_back(i * toTicks(0.1), Level(i % 2));
  CHECK(measureFrequency(slow).hz == Catch::Approx(5.0));
}

TEST_CASE("seconds format exactly", "[sim]") {
  CHECK(formatSeconds(0) == "0.000000");
  CHECK(formatSeconds(toTicks(0.12)) == "0.120000");
  CHECK(formatSeconds(toTicks(2.5)) == "2.500000");
}
