#pragma once

// Gate-level logic simulation: combinational evaluation, truth tables, and
// an event-driven simulator with uniform inertial gate delay.
//
// Level 1 means supply pressure present, 0 atmospheric. INHIBIT takes
// (signal, inhibitor): out = a AND NOT b.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/lexer.hpp"
#include "fluidcc/library.hpp"
#include "fluidcc/netlist.hpp"

namespace fluidcc {

using Level = std::uint8_t;
using Ticks = std::int64_t;

/// Simulation time resolution: one microsecond.
inline constexpr double kTickSeconds = 1e-6;

inline Ticks toTicks(double seconds) { return std::llround(seconds / kTickSeconds); }
inline double toSeconds(Ticks t) { return double(t) * kTickSeconds; }

/// Exact decimal rendering of a tick count in seconds.
inline std::string formatSeconds(Ticks t) {
  char buf[48];
  const Ticks whole = t / 1000000, frac = t % 1000000;
  std::snprintf(buf, sizeof buf, "%s%lld.%06lld", t < 0 ? "-" : "", (long long)std::llabs(whole),
                (long long)std::llabs(frac));
  return buf;
}

inline Level evalGate(Behavior b, std::span<const Level> in) {
  if (in.size() != static_cast<std::size_t>(inputArity(b)))
    throw SimError(std::string(toString(b)) + " expects " + std::to_string(inputArity(b)) +
                   " input(s), got " + std::to_string(in.size()));
  switch (b) {
    case Behavior::NOT: return !in[0];
    case Behavior::AND: return in[0] && in[1];
    case Behavior::OR: return in[0] || in[1];
    case Behavior::INHIBIT: return in[0] && !in[1];
    case Behavior::SOURCE: return 1;
    case Behavior::PROBE: return in[0];
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Circuit graph

struct SimGate {
  std::string name;
  Behavior behavior = Behavior::NOT;
  std::string type;
  std::vector<int> inputs;  // net per logic input, -1 when undriven
  int output = -1;          // driven net, -1 for probes
};

/// Netlist reduced to driver nets. Net ids: declared inputs first, then gate
/// outputs in declaration order.
struct SimCircuit {
  std::vector<std::string> nets;
  std::vector<SimGate> gates;
  std::vector<int> input_nets;
  std::vector<std::string> input_names;
  std::vector<std::pair<std::string, int>> outputs;  // observed name -> net
  std::vector<std::vector<int>> sinks;               // net -> reading gates
  std::map<std::string, int> by_name;                // net names and output aliases

  int findNet(const std::string& name) const {
    auto it = by_name.find(name);
    return it == by_name.end() ? -1 : it->second;
  }
};

inline SimCircuit buildSimCircuit(const Netlist& n, const ComponentLibrary& lib) {
  SimCircuit c;
  std::map<Terminal, int> driverNet;
  for (const auto& e : n.externals)
    if (e.is_input) {
      const int id = static_cast<int>(c.nets.size());
      c.nets.push_back(e.name);
      c.input_nets.push_back(id);
      c.input_names.push_back(e.name);
      driverNet[Terminal{e.name, ""}] = id;
    }
  std::map<Terminal, std::pair<int, int>> sinkSlot;  // gate input -> (gate, slot)
  for (const auto& g : n.gates) {
    const GateType* t = lib.find(g.type);
    if (!t) throw SimError("unknown gate type '" + g.type + "'");
    SimGate sg{g.name, t->behavior, g.type, {}, -1};
    const auto ins = t->inputs();
    for (std::size_t s = 0; s < ins.size(); ++s) {
      sinkSlot[Terminal{g.name, ins[s]->name}] = {static_cast<int>(c.gates.size()), static_cast<int>(s)};
      sg.inputs.push_back(-1);
    }
    if (const PortSpec* out = t->output()) {
      sg.output = static_cast<int>(c.nets.size());
      c.nets.push_back(g.name + "." + out->name);
      driverNet[Terminal{g.name, out->name}] = sg.output;
    }
    c.gates.push_back(std::move(sg));
  }
  for (std::size_t i = 0; i < c.nets.size(); ++i) c.by_name[c.nets[i]] = static_cast<int>(i);

  std::map<std::string, int> outputNet;
  for (const auto& conn : n.connections) {
    const Terminal* drv = nullptr;
    const Terminal* snk = nullptr;
    for (const Terminal* t : {&conn.from, &conn.to}) {
      if (driverNet.count(*t)) drv = t;
      else snk = t;
    }
    if (!drv || !snk)
      throw SimError("connection " + conn.from.str() + " -> " + conn.to.str() +
                     " does not join a driver to a sink");
    const int net = driverNet.at(*drv);
    if (auto it = sinkSlot.find(*snk); it != sinkSlot.end()) {
      c.gates[it->second.first].inputs[it->second.second] = net;
    } else if (snk->port.empty()) {
      outputNet[snk->name] = net;
    }
    // Supply and other auxiliary ports carry no logic signal.
  }

  c.sinks.assign(c.nets.size(), {});
  for (std::size_t g = 0; g < c.gates.size(); ++g)
    for (int in : c.gates[g].inputs)
      if (in >= 0) c.sinks[in].push_back(static_cast<int>(g));
  for (auto& s : c.sinks) s.erase(std::unique(s.begin(), s.end()), s.end());

  for (const auto& e : n.externals)
    if (!e.is_input) {
      auto it = outputNet.find(e.name);
      if (it == outputNet.end()) continue;
      c.outputs.emplace_back(e.name, it->second);
      c.by_name.emplace(e.name, it->second);
    }
  for (const auto& g : c.gates)
    if (g.behavior == Behavior::PROBE && g.inputs[0] >= 0) {
      c.outputs.emplace_back(g.name, g.inputs[0]);
      c.by_name.emplace(g.name, g.inputs[0]);
    }
  return c;
}

namespace detail {

inline Level evalSimGate(const SimGate& g, const std::vector<Level>& values) {
  std::vector<Level> in;
  for (int i : g.inputs) in.push_back(i >= 0 ? values[i] : 0);
  return evalGate(g.behavior, in);
}

// Gate order for a single settling pass. Feedback loops are broken at the
// lowest-index gate still waiting; those gates are appended to `cycleGates`.
inline std::vector<int> evaluationOrder(const SimCircuit& c, std::vector<int>* cycleGates = nullptr) {
  const std::size_t G = c.gates.size();
  std::vector<int> driverGate(c.nets.size(), -1);
  for (std::size_t g = 0; g < G; ++g)
    if (c.gates[g].output >= 0) driverGate[c.gates[g].output] = static_cast<int>(g);
  std::vector<int> pending(G, 0);
  for (std::size_t g = 0; g < G; ++g)
    for (int in : c.gates[g].inputs)
      if (in >= 0 && driverGate[in] >= 0) ++pending[g];
  std::vector<char> done(G, 0);
  std::set<int> ready;
  for (std::size_t g = 0; g < G; ++g)
    if (!pending[g]) ready.insert(static_cast<int>(g));
  std::vector<int> order;
  while (order.size() < G) {
    int g;
    if (!ready.empty()) {
      g = *ready.begin();
      ready.erase(ready.begin());
    } else {
      g = 0;
      while (done[g]) ++g;
      if (cycleGates) cycleGates->push_back(g);
    }
    done[g] = 1;
    order.push_back(g);
    const int out = c.gates[g].output;
    if (out < 0) continue;
    for (int s : c.sinks[out]) {
      if (done[s]) continue;
      for (int in : c.gates[s].inputs)
        if (in == out) --pending[s];
      if (pending[s] <= 0) ready.insert(s);
    }
  }
  return order;
}

}  // namespace detail

inline bool isCombinational(const SimCircuit& c) {
  std::vector<int> cyc;
  detail::evaluationOrder(c, &cyc);
  return cyc.empty();
}

/// Output levels, in declaration order, for one input assignment. Throws
/// SimError on feedback loops and on missing inputs.
inline std::vector<std::pair<std::string, Level>> topoEvaluate(
    const SimCircuit& c, const std::map<std::string, Level>& inputs) {
  std::vector<int> cyc;
  const auto order = detail::evaluationOrder(c, &cyc);
  if (!cyc.empty())
    throw SimError("circuit has a feedback loop through gate '" + c.gates[cyc.front()].name +
                   "'; combinational evaluation does not apply, use event simulation (sim --until)");
  std::vector<Level> values(c.nets.size(), 0);
  for (std::size_t i = 0; i < c.input_nets.size(); ++i) {
    auto it = inputs.find(c.input_names[i]);
    if (it == inputs.end()) throw SimError("no level given for input '" + c.input_names[i] + "'");
    values[c.input_nets[i]] = it->second ? 1 : 0;
  }
  for (const auto& [name, lv] : inputs)
    if (std::find(c.input_names.begin(), c.input_names.end(), name) == c.input_names.end())
      throw SimError("'" + name + "' is not a declared input");
  for (int g : order)
    if (c.gates[g].output >= 0) values[c.gates[g].output] = detail::evalSimGate(c.gates[g], values);
  std::vector<std::pair<std::string, Level>> out;
  for (const auto& [name, net] : c.outputs) out.emplace_back(name, values[net]);
  return out;
}

struct TruthTable {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::vector<Level>, std::vector<Level>>> rows;

  std::string format() const {
    std::ostringstream os;
    for (const auto& n : inputs) os << n << ' ';
    os << '|';
    for (const auto& n : outputs) os << ' ' << n;
    os << '\n';
    for (const auto& [in, out] : rows) {
      for (std::size_t i = 0; i < in.size(); ++i)
        os << std::string(inputs[i].size() - 1, ' ') << int(in[i]) << ' ';
      os << '|';
      for (std::size_t i = 0; i < out.size(); ++i)
        os << ' ' << std::string(outputs[i].size() - 1, ' ') << int(out[i]);
      os << '\n';
    }
    return os.str();
  }
};

inline constexpr std::size_t kMaxTruthTableInputs = 20;

/// Exhaustive table; the first declared input is the most significant bit.
inline TruthTable truthTable(const SimCircuit& c) {
  const std::size_t k = c.input_names.size();
  if (k > kMaxTruthTableInputs)
    throw SimError("truth table limited to " + std::to_string(kMaxTruthTableInputs) + " inputs, circuit has " +
                   std::to_string(k));
  TruthTable t;
  t.inputs = c.input_names;
  for (const auto& o : c.outputs) t.outputs.push_back(o.first);
  for (std::uint64_t r = 0; r < (std::uint64_t(1) << k); ++r) {
    std::map<std::string, Level> in;
    std::vector<Level> bits;
    for (std::size_t i = 0; i < k; ++i) {
      const Level b = (r >> (k - 1 - i)) & 1;
      bits.push_back(b);
      in[c.input_names[i]] = b;
    }
    std::vector<Level> out;
    for (const auto& [name, lv] : topoEvaluate(c, in)) out.push_back(lv);
    t.rows.emplace_back(std::move(bits), std::move(out));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Event simulation

struct SimConfig {
  double gate_delay = 0.02;                   // s
  std::map<std::string, double> type_delay;   // per gate type override, s
  double horizon = 1.0;                       // s
  std::map<std::string, Level> initial;       // input levels at t = 0
  std::size_t max_events = 1000000;
};

struct Stimulus {
  Ticks time = 0;
  std::string net;
  Level level = 0;
};

struct Trace {
  std::string net;
  std::vector<std::pair<Ticks, Level>> changes;  // first entry at t = 0
};

struct Waveform {
  std::vector<Trace> traces;
  Ticks horizon = 0;
  std::size_t events = 0;

  const Trace* find(const std::string& net) const {
    for (const auto& t : traces)
      if (t.net == net) return &t;
    return nullptr;
  }
};

/// Discrete-event simulation with inertial delay. Every net starts at 0 (or
/// its initial input level); one settling pass in evaluation order then
/// fixes gate outputs, and any gate left inconsistent (a loop) fires first.
inline Waveform eventSimulate(const SimCircuit& c, const SimConfig& cfg,
                              std::span<const Stimulus> stimulus = {}) {
  if (!(cfg.gate_delay > 0)) throw SimError("gate delay must be positive");
  if (!(cfg.horizon > 0)) throw SimError("simulation horizon must be positive");
  const Ticks horizon = toTicks(cfg.horizon);
  std::vector<Ticks> delay(c.gates.size());
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    auto it = cfg.type_delay.find(c.gates[g].type);
    const double d = it != cfg.type_delay.end() ? it->second : cfg.gate_delay;
    delay[g] = toTicks(d);
    if (delay[g] < 1)
      throw SimError("gate '" + c.gates[g].name + "' delay rounds to zero ticks; zero-delay loops are not simulated");
  }

  std::vector<Level> values(c.nets.size(), 0);
  auto inputNet = [&](const std::string& name) {
    for (std::size_t i = 0; i < c.input_names.size(); ++i)
      if (c.input_names[i] == name) return c.input_nets[i];
    throw SimError("'" + name + "' is not a declared input");
  };
  for (const auto& [name, lv] : cfg.initial) values[inputNet(name)] = lv ? 1 : 0;
  std::vector<Stimulus> later;
  for (const auto& s : stimulus) {
    if (s.time < 0) throw SimError("stimulus time must not be negative");
    if (s.time == 0) values[inputNet(s.net)] = s.level ? 1 : 0;
    else later.push_back(s);
  }

  for (int g : detail::evaluationOrder(c))
    if (c.gates[g].output >= 0) values[c.gates[g].output] = detail::evalSimGate(c.gates[g], values);

  Waveform w;
  w.horizon = horizon;
  for (std::size_t i = 0; i < c.nets.size(); ++i) w.traces.push_back({c.nets[i], {{0, values[i]}}});

  // Queue entries: (time, net, serial, level). A gate output has at most one
  // live transaction, identified by serial.
  using Event = std::tuple<Ticks, int, std::uint64_t, Level>;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> q;
  std::vector<std::uint64_t> live(c.nets.size(), 0);
  std::vector<std::optional<Level>> pendingLevel(c.nets.size());
  std::uint64_t serial = 0;
  for (const auto& s : later) q.emplace(s.time, inputNet(s.net), 0, s.level ? 1 : 0);

  auto reevaluate = [&](int g, Ticks now) {
    const SimGate& gate = c.gates[g];
    if (gate.output < 0) return;
    const int out = gate.output;
    const Level v = detail::evalSimGate(gate, values);
    if (pendingLevel[out] && *pendingLevel[out] == v) return;  // already heading there
    live[out] = 0;
    pendingLevel[out].reset();
    if (v == values[out]) return;  // pulse swallowed
    live[out] = ++serial;
    pendingLevel[out] = v;
    q.emplace(now + delay[g], out, serial, v);
  };
  for (std::size_t g = 0; g < c.gates.size(); ++g) reevaluate(static_cast<int>(g), 0);

  while (!q.empty()) {
    const auto [t, net, id, level] = q.top();
    if (t > horizon) break;
    q.pop();
    if (id != 0) {
      if (live[net] != id) continue;  // cancelled
      live[net] = 0;
      pendingLevel[net].reset();
    }
    if (++w.events > cfg.max_events)
      throw SimError("event limit of " + std::to_string(cfg.max_events) +
                     " exceeded; the circuit may contain a zero-delay loop, or shorten the horizon");
    if (values[net] == level) continue;
    values[net] = level;
    w.traces[net].changes.emplace_back(t, level);
    for (int g : c.sinks[net]) reevaluate(g, t);
  }

  for (const auto& [name, net] : c.outputs)
    if (name != c.nets[net]) {
      Trace alias = w.traces[net];
      alias.net = name;
      w.traces.push_back(std::move(alias));
    }
  return w;
}

// ---------------------------------------------------------------------------
// Measurement and export

struct FrequencyMeasurement {
  double hz = 0;
  double period_s = 0;
  double jitter_s = 0;  // largest deviation of a single period from the mean
  std::size_t cycles = 0;
};

/// Frequency from rising edges after `settle`. Needs at least four
/// transitions past the settling prefix.
inline FrequencyMeasurement measureFrequency(const Trace& t, Ticks settle = 0) {
  std::vector<Ticks> rises;
  std::size_t transitions = 0;
  for (std::size_t i = 1; i < t.changes.size(); ++i) {
    if (t.changes[i].first < settle) continue;
    ++transitions;
    if (t.changes[i].second == 1) rises.push_back(t.changes[i].first);
  }
  if (transitions < 4 || rises.size() < 2)
    throw SimError("no oscillation detected on net '" + t.net + "'");
  FrequencyMeasurement m;
  m.cycles = rises.size() - 1;
  const double mean = double(rises.back() - rises.front()) / double(m.cycles);
  for (std::size_t i = 1; i < rises.size(); ++i)
    m.jitter_s = std::max(m.jitter_s, std::abs(double(rises[i] - rises[i - 1]) - mean) * kTickSeconds);
  m.period_s = mean * kTickSeconds;
  m.hz = 1.0 / m.period_s;
  return m;
}

/// `time_s,net,level` rows, sorted by time then trace order.
inline std::string waveformCsv(const Waveform& w, const std::vector<std::string>& only = {}) {
  std::vector<std::tuple<Ticks, std::size_t, Level>> rows;
  for (std::size_t i = 0; i < w.traces.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), w.traces[i].net) == only.end()) continue;
    for (const auto& [t, lv] : w.traces[i].changes) rows.emplace_back(t, i, lv);
  }
  std::stable_sort(rows.begin(), rows.end());
  std::string out = "time_s,net,level\n";
  for (const auto& [t, i, lv] : rows)
    out += formatSeconds(t) + "," + w.traces[i].net + "," + std::to_string(int(lv)) + "\n";
  return out;
}

inline nlohmann::ordered_json waveformJson(const Waveform& w, const std::vector<std::string>& only = {}) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["tick_s"] = kTickSeconds;
  j["horizon_s"] = toSeconds(w.horizon);
  j["traces"] = nlohmann::ordered_json::array();
  for (const auto& t : w.traces) {
    if (!only.empty() && std::find(only.begin(), only.end(), t.net) == only.end()) continue;
    nlohmann::ordered_json tr;
    tr["net"] = t.net;
    tr["transitions"] = nlohmann::ordered_json::array();
    for (const auto& [tk, lv] : t.changes) tr["transitions"].push_back({toSeconds(tk), int(lv)});
    j["traces"].push_back(std::move(tr));
  }
  return j;
}

/// Parses a stimulus file in the waveform CSV layout.
inline std::vector<Stimulus> parseStimulusCsv(const std::string& text) {
  std::vector<Stimulus> out;
  std::istringstream is(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || (lineNo == 1 && line.rfind("time", 0) == 0)) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string col; std::getline(ls, col, ',');) cols.push_back(col);
    const auto where = "stimulus line " + std::to_string(lineNo) + ": ";
    if (cols.size() != 3) throw SimError(where + "expected time_s,net,level");
    const auto t = detail::parseNumber(cols[0]);
    if (!t || *t < 0) throw SimError(where + "bad time '" + cols[0] + "'");
    if (cols[2] != "0" && cols[2] != "1") throw SimError(where + "level must be 0 or 1");
    out.push_back({toTicks(*t), cols[1], Level(cols[2] == "1")});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Stimulus& a, const Stimulus& b) { return a.time < b.time; });
  return out;
}

}  // namespace fluidcc
