#pragma once

// Gate component library: logical gate types and their physical footprints.
//
// File grammar (line oriented, `#` comments):
//
//   gatetype <NAME>
//     behavior <NOT|AND|OR|INHIBIT|SOURCE|PROBE>
//     outline <width> <depth> <height>
//     port <name> <in|out|aux> <ox> <oy> <oz> <dx> <dy> <dz> <outer_d>
//   end
//
// Outlines are centred on the local origin in x/y and rest on z = 0. Port
// offsets are relative to that origin; (dx, dy, dz) is the outward unit
// direction of the port nozzle. `aux` ports are physical-only (supply or
// exhaust lines) and take no part in logic evaluation.

#include <cmath>
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

namespace fluidcc {

enum class Behavior { NOT, AND, OR, INHIBIT, SOURCE, PROBE };

inline const char* toString(Behavior b) {
  switch (b) {
    case Behavior::NOT: return "NOT";
    case Behavior::AND: return "AND";
    case Behavior::OR: return "OR";
    case Behavior::INHIBIT: return "INHIBIT";
    case Behavior::SOURCE: return "SOURCE";
    case Behavior::PROBE: return "PROBE";
  }
  return "?";
}

inline std::optional<Behavior> behaviorFromString(std::string_view s) {
  for (auto b : {Behavior::NOT, Behavior::AND, Behavior::OR, Behavior::INHIBIT, Behavior::SOURCE,
                 Behavior::PROBE})
    if (s == toString(b)) return b;
  return std::nullopt;
}

/// Number of logical inputs the behaviour consumes.
inline int inputArity(Behavior b) {
  switch (b) {
    case Behavior::NOT:
    case Behavior::PROBE: return 1;
    case Behavior::SOURCE: return 0;
    default: return 2;
  }
}

inline int outputArity(Behavior b) { return b == Behavior::PROBE ? 0 : 1; }

enum class PortRole { In, Out, Aux };

inline const char* toString(PortRole r) {
  switch (r) {
    case PortRole::In: return "in";
    case PortRole::Out: return "out";
    case PortRole::Aux: return "aux";
  }
  return "?";
}

struct PortSpec {
  std::string name;
  PortRole role = PortRole::In;
  Vec3 offset;     // mm, local frame
  Vec3 direction;  // outward unit vector
  double outer_d = 0;

  bool operator==(const PortSpec&) const = default;
};

struct Footprint {
  Vec3 size;  // width (x), depth (y), height (z) in mm
  std::vector<PortSpec> ports;

  Box outline() const { return {{-size.x / 2, -size.y / 2, 0}, {size.x / 2, size.y / 2, size.z}}; }

  const PortSpec* port(std::string_view name) const {
    for (const auto& p : ports)
      if (p.name == name) return &p;
    return nullptr;
  }

  bool operator==(const Footprint&) const = default;
};

struct GateType {
  std::string name;
  Behavior behavior = Behavior::NOT;
  Footprint footprint;

  /// Logical ports in declaration order, inputs first.
  std::vector<const PortSpec*> inputs() const {
    std::vector<const PortSpec*> out;
    for (const auto& p : footprint.ports)
      if (p.role == PortRole::In) out.push_back(&p);
    return out;
  }

  const PortSpec* output() const {
    for (const auto& p : footprint.ports)
      if (p.role == PortRole::Out) return &p;
    return nullptr;
  }

  bool operator==(const GateType&) const = default;
};

class ComponentLibrary {
 public:
  const GateType* find(std::string_view name) const {
    auto it = types_.find(std::string(name));
    return it == types_.end() ? nullptr : &it->second;
  }

  void add(GateType t) { types_.insert_or_assign(t.name, std::move(t)); }

  const std::map<std::string, GateType>& types() const { return types_; }
  std::size_t size() const { return types_.size(); }

  bool operator==(const ComponentLibrary&) const = default;

 private:
  std::map<std::string, GateType> types_;
};

/// Checks the structural invariants of a gate type; returns human-readable
/// violations (empty when valid).
inline std::vector<std::string> checkGateType(const GateType& t) {
  std::vector<std::string> errs;
  const auto& fp = t.footprint;
  if (!(fp.size.x > 0 && fp.size.y > 0 && fp.size.z > 0))
    errs.push_back("gate type '" + t.name + "': outline dimensions must be positive");

  std::set<std::string> seen;
  int ins = 0, outs = 0;
  const Box box = fp.outline();
  for (const auto& p : fp.ports) {
    if (!seen.insert(p.name).second)
      errs.push_back("gate type '" + t.name + "': duplicate port '" + p.name + "'");
    if (p.role == PortRole::In) ++ins;
    if (p.role == PortRole::Out) ++outs;
    if (!(p.outer_d > 0))
      errs.push_back("gate type '" + t.name + "': port '" + p.name + "' diameter must be > 0");
    if (std::abs(norm(p.direction) - 1.0) > 1e-6)
      errs.push_back("gate type '" + t.name + "': port '" + p.name +
                     "' direction must be a unit vector");
    if (box.strictlyContains(p.offset, 1e-9))
      errs.push_back("gate type '" + t.name + "': port '" + p.name +
                     "' lies inside the outline");
  }
  const int wantIn = inputArity(t.behavior);
  const int wantOut = outputArity(t.behavior);
  if (ins != wantIn)
    errs.push_back("gate type '" + t.name + "': behavior " + toString(t.behavior) + " needs " +
                   std::to_string(wantIn) + " input port(s), found " + std::to_string(ins));
  if (outs != wantOut)
    errs.push_back("gate type '" + t.name + "': behavior " + toString(t.behavior) + " needs " +
                   std::to_string(wantOut) + " output port(s), found " + std::to_string(outs));
  return errs;
}

struct LibraryResult {
  std::optional<ComponentLibrary> library;
  Diagnostics diagnostics;
};

inline LibraryResult loadLibrary(std::string_view text) {
  using detail::parseNumber;
  LibraryResult result;
  auto error = [&](SourceLoc loc, std::string msg) {
    result.diagnostics.push_back({Severity::Error, loc, std::move(msg)});
  };

  ComponentLibrary lib;
  std::optional<GateType> current;
  SourceLoc currentLoc;
  bool haveBehavior = false, haveOutline = false;

  for (const auto& line : detail::tokenize(text)) {
    const auto& tk = line.tokens;
    const std::string& kw = tk[0].text;
    if (kw == "gatetype") {
      if (current) {
        error(tk[0].loc, "'gatetype' inside unterminated gatetype '" + current->name + "'");
        current.reset();
      }
      if (tk.size() != 2 || !detail::isIdentifier(tk[1].text)) {
        error(tk[0].loc, "expected 'gatetype <NAME>'");
        continue;
      }
      if (lib.find(tk[1].text)) error(tk[1].loc, "duplicate gate type '" + tk[1].text + "'");
      current = GateType{tk[1].text, Behavior::NOT, {}};
      currentLoc = tk[0].loc;
      haveBehavior = haveOutline = false;
      continue;
    }
    if (!current) {
      error(tk[0].loc, "'" + kw + "' outside of a gatetype block");
      continue;
    }
    if (kw == "behavior") {
      std::optional<Behavior> b;
      if (tk.size() == 2) b = behaviorFromString(tk[1].text);
      if (!b) {
        error(tk[0].loc, "expected 'behavior <NOT|AND|OR|INHIBIT|SOURCE|PROBE>'");
        continue;
      }
      current->behavior = *b;
      haveBehavior = true;
    } else if (kw == "outline") {
      std::optional<double> w, d, h;
      if (tk.size() == 4) {
        w = parseNumber(tk[1].text);
        d = parseNumber(tk[2].text);
        h = parseNumber(tk[3].text);
      }
      if (!w || !d || !h) {
        error(tk[0].loc, "expected 'outline <width> <depth> <height>'");
        continue;
      }
      current->footprint.size = {*w, *d, *h};
      haveOutline = true;
    } else if (kw == "port") {
      if (tk.size() != 10) {
        error(tk[0].loc, "expected 'port <name> <in|out|aux> <ox> <oy> <oz> <dx> <dy> <dz> <outer_d>'");
        continue;
      }
      PortSpec p;
      p.name = tk[1].text;
      if (tk[2].text == "in") p.role = PortRole::In;
      else if (tk[2].text == "out") p.role = PortRole::Out;
      else if (tk[2].text == "aux") p.role = PortRole::Aux;
      else {
        error(tk[2].loc, "port role must be in, out or aux");
        continue;
      }
      double v[7];
      bool ok = detail::isIdentifier(p.name);
      for (int i = 0; i < 7 && ok; ++i) {
        auto n = parseNumber(tk[3 + i].text);
        if (!n) {
          error(tk[3 + i].loc, "expected a number, got '" + tk[3 + i].text + "'");
          ok = false;
        } else {
          v[i] = *n;
        }
      }
      if (!ok) {
        if (!detail::isIdentifier(p.name)) error(tk[1].loc, "invalid port name '" + p.name + "'");
        continue;
      }
      p.offset = {v[0], v[1], v[2]};
      p.direction = {v[3], v[4], v[5]};
      p.outer_d = v[6];
      current->footprint.ports.push_back(std::move(p));
    } else if (kw == "end") {
      if (!haveBehavior) error(currentLoc, "gate type '" + current->name + "' lacks a behavior");
      if (!haveOutline) error(currentLoc, "gate type '" + current->name + "' lacks an outline");
      for (auto& msg : checkGateType(*current)) error(currentLoc, msg);
      lib.add(std::move(*current));
      current.reset();
    } else {
      error(tk[0].loc, "unknown library keyword '" + kw + "'");
    }
  }
  if (current) error(currentLoc, "gatetype '" + current->name + "' is missing 'end'");
  if (!hasErrors(result.diagnostics)) result.library = std::move(lib);
  return result;
}

inline std::string serializeLibrary(const ComponentLibrary& lib) {
  using detail::formatNumber;
  std::ostringstream os;
  for (const auto& [name, t] : lib.types()) {
    os << "gatetype " << name << "\n";
    os << "  behavior " << toString(t.behavior) << "\n";
    os << "  outline " << formatNumber(t.footprint.size.x) << ' '
       << formatNumber(t.footprint.size.y) << ' ' << formatNumber(t.footprint.size.z) << "\n";
    for (const auto& p : t.footprint.ports) {
      os << "  port " << p.name << ' ' << toString(p.role);
      for (double v : {p.offset.x, p.offset.y, p.offset.z, p.direction.x, p.direction.y,
                        p.direction.z, p.outer_d})
        os << ' ' << formatNumber(v);
      os << "\n";
    }
    os << "end\n";
  }
  return os.str();
}

inline LibraryResult loadLibraryFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    LibraryResult r;
    r.diagnostics.push_back({Severity::Error, {}, "cannot open component library '" + path + "'"});
    return r;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return loadLibrary(ss.str());
}

}  // namespace fluidcc
