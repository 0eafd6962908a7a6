#pragma once

// Netlist model and the `.fcc` circuit description language.
//
//   circuit <name>
//   param <key> <value>
//   gate <name> <TYPE> [at <x> <y> <rot>]
//   input <name> at <x> <y> <z>
//   output <name> at <x> <y> <z>
//   connect <terminal> -> <terminal> [inner_d <mm>] [outer_d <mm>]
//
// A terminal is `gate.port` or the name of a declared input/output.
// Connections are kept in source order; that order is the routing order.

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fluidcc/diagnostics.hpp"
#include "fluidcc/geometry.hpp"
#include "fluidcc/lexer.hpp"
#include "fluidcc/library.hpp"

namespace fluidcc {

struct CircuitParams {
  Vec3 bed{250, 210, 210};  // Prusa MK3S build volume
  double grid_pitch = 3.0;
  double tube_inner_d = 1.5;
  double tube_outer_d = 2.5;
  double clearance = 0.5;
  double alpha = 0.5;
  double beta = 0.5;
  double gate_delay = 0.02;

  bool operator==(const CircuitParams&) const = default;
};

inline const std::vector<std::string>& paramKeys() {
  static const std::vector<std::string> keys = {
      "bed_x", "bed_y", "bed_z", "grid_pitch", "tube_inner_d", "tube_outer_d",
      "clearance", "alpha", "beta", "gate_delay"};
  return keys;
}

inline double* paramSlot(CircuitParams& p, std::string_view key) {
  if (key == "bed_x") return &p.bed.x;
  if (key == "bed_y") return &p.bed.y;
  if (key == "bed_z") return &p.bed.z;
  if (key == "grid_pitch") return &p.grid_pitch;
  if (key == "tube_inner_d") return &p.tube_inner_d;
  if (key == "tube_outer_d") return &p.tube_outer_d;
  if (key == "clearance") return &p.clearance;
  if (key == "alpha") return &p.alpha;
  if (key == "beta") return &p.beta;
  if (key == "gate_delay") return &p.gate_delay;
  return nullptr;
}

inline double paramValue(const CircuitParams& p, std::string_view key) {
  return *paramSlot(const_cast<CircuitParams&>(p), key);
}

/// Range violations, one message per broken constraint.
inline std::vector<std::string> checkParams(const CircuitParams& p) {
  using detail::formatNumber;
  std::vector<std::string> errs;
  auto bad = [&](const std::string& key, double v, const std::string& rule) {
    errs.push_back("parameter '" + key + "' = " + formatNumber(v) + " out of range: " + rule);
  };
  if (!(p.alpha > 0 && p.alpha < 1)) bad("alpha", p.alpha, "alpha must lie in (0,1)");
  if (!(p.beta > 0 && p.beta < 1)) bad("beta", p.beta, "beta must lie in (0,1)");
  if (!(p.tube_inner_d > 0)) bad("tube_inner_d", p.tube_inner_d, "tube_inner_d must be > 0");
  if (!(p.tube_outer_d > p.tube_inner_d))
    bad("tube_outer_d", p.tube_outer_d, "tube_outer_d must exceed tube_inner_d");
  if (!(p.clearance >= 0)) bad("clearance", p.clearance, "clearance must be >= 0");
  if (!(p.grid_pitch >= p.tube_outer_d + p.clearance))
    bad("grid_pitch", p.grid_pitch, "grid_pitch must be >= tube_outer_d + clearance");
  if (!(p.gate_delay > 0)) bad("gate_delay", p.gate_delay, "gate_delay must be > 0");
  if (!(p.bed.x > 0)) bad("bed_x", p.bed.x, "bed_x must be > 0");
  if (!(p.bed.y > 0)) bad("bed_y", p.bed.y, "bed_y must be > 0");
  if (!(p.bed.z > 0)) bad("bed_z", p.bed.z, "bed_z must be > 0");
  return errs;
}

struct Placement {
  double x = 0, y = 0;
  int rotation = 0;  // degrees, one of 0/90/180/270
  bool operator==(const Placement&) const = default;
};

struct GateInstance {
  std::string name;
  std::string type;
  std::optional<Placement> placement;
  SourceLoc loc;

  bool operator==(const GateInstance& o) const {
    return name == o.name && type == o.type && placement == o.placement;
  }
};

struct ExternalTerminal {
  std::string name;
  bool is_input = true;
  Vec3 position;
  SourceLoc loc;

  bool operator==(const ExternalTerminal& o) const {
    return name == o.name && is_input == o.is_input && position == o.position;
  }
};

/// `gate.port`, or a declared input/output when `port` is empty.
struct Terminal {
  std::string name;
  std::string port;

  bool isExternal() const { return port.empty(); }
  std::string str() const { return port.empty() ? name : name + "." + port; }
  auto operator<=>(const Terminal&) const = default;
};

struct TubeOverride {
  std::optional<double> inner_d;
  std::optional<double> outer_d;
  bool operator==(const TubeOverride&) const = default;
};

struct Connection {
  Terminal from;
  Terminal to;
  TubeOverride tube;
  SourceLoc loc;

  bool operator==(const Connection& o) const {
    return from == o.from && to == o.to && tube == o.tube;
  }
};

struct Netlist {
  std::string name;
  CircuitParams params;
  std::vector<GateInstance> gates;
  std::vector<ExternalTerminal> externals;
  std::vector<Connection> connections;

  const GateInstance* gate(std::string_view n) const {
    for (const auto& g : gates)
      if (g.name == n) return &g;
    return nullptr;
  }
  GateInstance* gate(std::string_view n) {
    for (auto& g : gates)
      if (g.name == n) return &g;
    return nullptr;
  }
  const ExternalTerminal* external(std::string_view n) const {
    for (const auto& e : externals)
      if (e.name == n) return &e;
    return nullptr;
  }

  std::vector<const ExternalTerminal*> inputs() const {
    std::vector<const ExternalTerminal*> out;
    for (const auto& e : externals)
      if (e.is_input) out.push_back(&e);
    return out;
  }
  std::vector<const ExternalTerminal*> outputs() const {
    std::vector<const ExternalTerminal*> out;
    for (const auto& e : externals)
      if (!e.is_input) out.push_back(&e);
    return out;
  }

  bool operator==(const Netlist&) const = default;
};

// ---------------------------------------------------------------------------
// Placement geometry

/// World-space outline of a placed gate.
inline Box placedOutline(const GateType& t, const Placement& p) {
  const Box local = t.footprint.outline();
  const Vec3 a = rotateQuarterTurns(local.lo, p.rotation);
  const Vec3 b = rotateQuarterTurns(local.hi, p.rotation);
  const Vec3 off{p.x, p.y, 0};
  return {Vec3{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)} + off,
          Vec3{std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)} + off};
}

struct PortSite {
  Vec3 position;   // nozzle root on the outline, world mm
  Vec3 direction;  // outward unit vector
  double outer_d = 0;
};

inline PortSite placedPort(const PortSpec& spec, const Placement& p) {
  return {rotateQuarterTurns(spec.offset, p.rotation) + Vec3{p.x, p.y, 0},
          rotateQuarterTurns(spec.direction, p.rotation), spec.outer_d};
}

// ---------------------------------------------------------------------------
// Parsing

struct ParseResult {
  std::optional<Netlist> netlist;
  Diagnostics diagnostics;
};

namespace detail {

inline std::optional<Terminal> parseTerminal(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos) {
    if (!isIdentifier(text)) return std::nullopt;
    return Terminal{text, ""};
  }
  Terminal t{text.substr(0, dot), text.substr(dot + 1)};
  if (!isIdentifier(t.name) || !isIdentifier(t.port)) return std::nullopt;
  return t;
}

}  // namespace detail

inline ParseResult parseNetlist(std::string_view text, const ComponentLibrary& lib) {
  using detail::parseNumber;
  ParseResult result;
  auto diag = [&](SourceLoc loc, std::string msg) {
    result.diagnostics.push_back({Severity::Error, loc, std::move(msg)});
  };

  Netlist n;
  bool haveName = false;
  std::map<std::string, SourceLoc> identifiers;
  auto declare = [&](const detail::Token& tok) {
    if (!detail::isIdentifier(tok.text)) {
      diag(tok.loc, "invalid identifier '" + tok.text + "'");
      return false;
    }
    auto [it, fresh] = identifiers.emplace(tok.text, tok.loc);
    if (!fresh) {
      diag(tok.loc, "duplicate identifier '" + tok.text + "' (first declared at line " +
                        std::to_string(it->second.line) + ")");
      return false;
    }
    return true;
  };

  struct PendingConnection {
    Connection conn;
    SourceLoc fromLoc, toLoc;
  };
  std::vector<PendingConnection> pending;
  std::map<std::string, SourceLoc> paramLocs;

  for (const auto& line : detail::tokenize(text)) {
    const auto& tk = line.tokens;
    const std::string& kw = tk[0].text;
    if (kw == "circuit") {
      if (tk.size() != 2 || !detail::isIdentifier(tk[1].text)) {
        diag(tk[0].loc, "expected 'circuit <name>'");
      } else if (haveName) {
        diag(tk[0].loc, "circuit name declared twice");
      } else {
        n.name = tk[1].text;
        haveName = true;
      }
    } else if (kw == "param") {
      if (tk.size() != 3) {
        diag(tk[0].loc, "expected 'param <key> <value>'");
        continue;
      }
      double* slot = paramSlot(n.params, tk[1].text);
      if (!slot) {
        diag(tk[1].loc, "unknown parameter '" + tk[1].text + "'");
        continue;
      }
      auto v = parseNumber(tk[2].text);
      if (!v) {
        diag(tk[2].loc, "expected a number, got '" + tk[2].text + "'");
        continue;
      }
      *slot = *v;
      paramLocs[tk[1].text] = tk[2].loc;
    } else if (kw == "gate") {
      if (tk.size() != 3 && tk.size() != 7) {
        diag(tk[0].loc, "expected 'gate <name> <TYPE> [at <x> <y> <rot>]'");
        continue;
      }
      GateInstance g{tk[1].text, tk[2].text, std::nullopt, tk[1].loc};
      if (!lib.find(g.type)) {
        diag(tk[2].loc, "unknown gate type '" + g.type + "'");
        continue;
      }
      if (tk.size() == 7) {
        if (tk[3].text != "at") {
          diag(tk[3].loc, "expected 'at'");
          continue;
        }
        auto x = parseNumber(tk[4].text), y = parseNumber(tk[5].text);
        auto rot = detail::parseInt(tk[6].text);
        if (!x || !y || !rot) {
          diag(tk[4].loc, "expected '<x> <y> <rot>' after 'at'");
          continue;
        }
        if (*rot != 0 && *rot != 90 && *rot != 180 && *rot != 270) {
          diag(tk[6].loc, "rotation must be one of 0, 90, 180, 270");
          continue;
        }
        g.placement = Placement{*x, *y, *rot};
      }
      if (declare(tk[1])) n.gates.push_back(std::move(g));
    } else if (kw == "input" || kw == "output") {
      if (tk.size() != 6 || tk[2].text != "at") {
        diag(tk[0].loc, "expected '" + kw + " <name> at <x> <y> <z>'");
        continue;
      }
      auto x = parseNumber(tk[3].text), y = parseNumber(tk[4].text), z = parseNumber(tk[5].text);
      if (!x || !y || !z) {
        diag(tk[3].loc, "expected '<x> <y> <z>' after 'at'");
        continue;
      }
      ExternalTerminal e{tk[1].text, kw == "input", {*x, *y, *z}, tk[1].loc};
      if (declare(tk[1])) n.externals.push_back(std::move(e));
    } else if (kw == "connect") {
      if (tk.size() < 4 || tk[2].text != "->" || (tk.size() - 4) % 2 != 0) {
        diag(tk[0].loc, "expected 'connect <terminal> -> <terminal> [inner_d <mm>] [outer_d <mm>]'");
        continue;
      }
      auto from = detail::parseTerminal(tk[1].text);
      auto to = detail::parseTerminal(tk[3].text);
      if (!from) {
        diag(tk[1].loc, "malformed terminal '" + tk[1].text + "'");
        continue;
      }
      if (!to) {
        diag(tk[3].loc, "malformed terminal '" + tk[3].text + "'");
        continue;
      }
      Connection c{*from, *to, {}, tk[0].loc};
      bool ok = true;
      for (std::size_t i = 4; i + 1 < tk.size(); i += 2) {
        auto v = parseNumber(tk[i + 1].text);
        if (!v) {
          diag(tk[i + 1].loc, "expected a number, got '" + tk[i + 1].text + "'");
          ok = false;
        } else if (tk[i].text == "inner_d") {
          c.tube.inner_d = *v;
        } else if (tk[i].text == "outer_d") {
          c.tube.outer_d = *v;
        } else {
          diag(tk[i].loc, "unknown tube option '" + tk[i].text + "'");
          ok = false;
        }
      }
      if (ok) pending.push_back({std::move(c), tk[1].loc, tk[3].loc});
    } else {
      diag(tk[0].loc, "unknown statement '" + kw + "'");
    }
  }

  if (!haveName) diag({1, 1}, "missing 'circuit <name>' declaration");

  for (const auto& msg : checkParams(n.params)) {
    // Attribute the message to the offending `param` line when there is one.
    SourceLoc loc{1, 1};
    for (const auto& key : paramKeys())
      if (msg.rfind("parameter '" + key + "'", 0) == 0 && paramLocs.count(key))
        loc = paramLocs[key];
    diag(loc, msg);
  }

  // Resolve terminals. Returns the port role, or nullopt after diagnosing.
  enum class End { Source, Sink };
  auto resolve = [&](const Terminal& t, SourceLoc loc, End end) -> std::optional<PortRole> {
    if (t.isExternal()) {
      const ExternalTerminal* e = n.external(t.name);
      if (!e) {
        if (n.gate(t.name))
          diag(loc, "gate '" + t.name + "' used without a port; write '" + t.name + ".<port>'");
        else
          diag(loc, "unknown terminal '" + t.name + "'");
        return std::nullopt;
      }
      if (end == End::Source && !e->is_input) {
        diag(loc, "output '" + t.name + "' cannot drive a connection");
        return std::nullopt;
      }
      if (end == End::Sink && e->is_input) {
        diag(loc, "input '" + t.name + "' cannot be driven");
        return std::nullopt;
      }
      return e->is_input ? PortRole::Out : PortRole::In;
    }
    const GateInstance* g = n.gate(t.name);
    if (!g) {
      diag(loc, "unknown gate '" + t.name + "'");
      return std::nullopt;
    }
    const GateType* type = lib.find(g->type);
    const PortSpec* p = type->footprint.port(t.port);
    if (!p) {
      diag(loc, "gate type '" + g->type + "' has no port '" + t.port + "'");
      return std::nullopt;
    }
    if (end == End::Source && p->role == PortRole::In) {
      diag(loc, "input port '" + t.str() + "' cannot drive a connection");
      return std::nullopt;
    }
    if (end == End::Sink && p->role == PortRole::Out) {
      diag(loc, "output port '" + t.str() + "' cannot be driven");
      return std::nullopt;
    }
    return p->role;
  };

  std::map<Terminal, SourceLoc> drivenInputs;
  for (auto& pc : pending) {
    auto& c = pc.conn;
    auto fromRole = resolve(c.from, pc.fromLoc, End::Source);
    auto toRole = resolve(c.to, pc.toLoc, End::Sink);
    if (!fromRole || !toRole) continue;
    if (c.from == c.to) {
      diag(c.loc, "connection joins '" + c.from.str() + "' to itself");
      continue;
    }
    if (*toRole == PortRole::In) {
      auto [it, fresh] = drivenInputs.emplace(c.to, pc.toLoc);
      if (!fresh) {
        diag(pc.toLoc, "input '" + c.to.str() + "' is driven twice (first driver at line " +
                           std::to_string(it->second.line) + ")");
        continue;
      }
    }
    const double inner = c.tube.inner_d.value_or(n.params.tube_inner_d);
    const double outer = c.tube.outer_d.value_or(n.params.tube_outer_d);
    if (!(inner > 0 && outer > inner)) {
      diag(c.loc, "tube override requires 0 < inner_d < outer_d");
      continue;
    }
    n.connections.push_back(std::move(c));
  }

  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                   [](const Diagnostic& a, const Diagnostic& b) {
                     return std::pair(a.loc.line, a.loc.column) <
                            std::pair(b.loc.line, b.loc.column);
                   });
  if (!hasErrors(result.diagnostics)) result.netlist = std::move(n);
  return result;
}

inline std::string printNetlist(const Netlist& n) {
  using detail::formatNumber;
  std::ostringstream os;
  os << "circuit " << n.name << "\n";
  for (const auto& key : paramKeys())
    os << "param " << key << ' ' << formatNumber(paramValue(n.params, key)) << "\n";
  for (const auto& e : n.externals)
    os << (e.is_input ? "input " : "output ") << e.name << " at " << formatNumber(e.position.x)
       << ' ' << formatNumber(e.position.y) << ' ' << formatNumber(e.position.z) << "\n";
  for (const auto& g : n.gates) {
    os << "gate " << g.name << ' ' << g.type;
    if (g.placement)
      os << " at " << formatNumber(g.placement->x) << ' ' << formatNumber(g.placement->y) << ' '
         << g.placement->rotation;
    os << "\n";
  }
  for (const auto& c : n.connections) {
    os << "connect " << c.from.str() << " -> " << c.to.str();
    if (c.tube.inner_d) os << " inner_d " << formatNumber(*c.tube.inner_d);
    if (c.tube.outer_d) os << " outer_d " << formatNumber(*c.tube.outer_d);
    os << "\n";
  }
  return os.str();
}

inline std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Validation

inline Diagnostics validateNetlist(const Netlist& n, const ComponentLibrary& lib) {
  Diagnostics out;
  auto diag = [&](SourceLoc loc, std::string msg) {
    out.push_back({Severity::Error, loc, std::move(msg)});
  };

  std::set<Terminal> driven;
  for (const auto& c : n.connections) driven.insert(c.to);

  for (const auto& g : n.gates) {
    const GateType* t = lib.find(g.type);
    if (!t) {
      diag(g.loc, "unknown gate type '" + g.type + "'");
      continue;
    }
    for (const PortSpec* p : t->inputs())
      if (!driven.count(Terminal{g.name, p->name}))
        diag(g.loc, "input '" + g.name + "." + p->name + "' is not driven");
  }
  for (const auto& e : n.externals) {
    if (!e.is_input && !driven.count(Terminal{e.name, ""}))
      diag(e.loc, "output '" + e.name + "' is not connected");
    const Box bed{{0, 0, 0}, n.params.bed};
    if (!bed.contains(e.position))
      diag(e.loc, "terminal '" + e.name + "' lies outside the print bed");
  }

  const Box bed{{0, 0, 0}, n.params.bed};
  std::vector<std::pair<const GateInstance*, Box>> boxes;
  for (const auto& g : n.gates) {
    const GateType* t = lib.find(g.type);
    if (!t || !g.placement) continue;
    const Box b = placedOutline(*t, *g.placement);
    if (!bed.contains(b.lo) || !bed.contains(b.hi))
      diag(g.loc, "gate '" + g.name + "' exceeds the print bed");
    boxes.emplace_back(&g, b);
  }
  const double c = n.params.clearance;
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (boxes[i].second.inflated(c).intersects(boxes[j].second.inflated(c)))
        diag(boxes[j].first->loc, "gate '" + boxes[j].first->name + "' overlaps gate '" +
                                      boxes[i].first->name + "'");

  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::pair(a.loc.line, a.loc.column) < std::pair(b.loc.line, b.loc.column);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Automatic placement

struct AutoPlaceOptions {
  double margin = 10.0;  // distance from bed edges
  double gap = 30.0;     // routing channel between neighbouring footprints
};

/// Assigns row-major positions to every unplaced gate, in netlist order,
/// avoiding gates that already carry a placement. Throws when the bed is
/// too small.
inline std::map<std::string, Placement> autoPlace(const Netlist& n, const ComponentLibrary& lib,
                                                  const Vec3& bed, AutoPlaceOptions opt = {}) {
  std::vector<Box> taken;
  for (const auto& g : n.gates)
    if (g.placement)
      if (const GateType* t = lib.find(g.type)) taken.push_back(placedOutline(*t, *g.placement));

  std::map<std::string, Placement> assignment;
  double x = opt.margin, y = opt.margin, rowDepth = 0;
  for (const auto& g : n.gates) {
    if (g.placement) continue;
    const GateType* t = lib.find(g.type);
    if (!t) throw Error("unknown gate type '" + g.type + "'");
    const Vec3 sz = t->footprint.size;
    while (true) {
      if (x + sz.x > bed.x - opt.margin) {
        x = opt.margin;
        y += rowDepth + opt.gap;
        rowDepth = 0;
      }
      if (y + sz.y > bed.y - opt.margin || x + sz.x > bed.x - opt.margin)
        throw Error("insufficient bed area to place gate '" + g.name + "' (" +
                    std::to_string(n.gates.size()) + " gates on " + detail::formatNumber(bed.x) +
                    " x " + detail::formatNumber(bed.y) + " mm)");
      const Placement p{x + sz.x / 2, y + sz.y / 2, 0};
      const Box b = placedOutline(*t, p);
      const Box keep = b.inflated(opt.gap / 2);
      bool clash = false;
      for (const auto& o : taken)
        if (keep.intersects(o.inflated(opt.gap / 2))) clash = true;
      if (!clash) {
        assignment[g.name] = p;
        taken.push_back(b);
        rowDepth = std::max(rowDepth, sz.y);
        x += sz.x + opt.gap;
        break;
      }
      x += opt.gap / 2;
    }
  }
  return assignment;
}

inline void applyPlacement(Netlist& n, const std::map<std::string, Placement>& assignment) {
  for (auto& g : n.gates)
    if (auto it = assignment.find(g.name); it != assignment.end()) g.placement = it->second;
}

}  // namespace fluidcc
