#pragma once

#include <string>

#include "fluidcc/library.hpp"
#include "fluidcc/netlist.hpp"

namespace testsupport {

inline std::string sourcePath(const std::string& rel) { return std::string(FLUIDCC_SOURCE_DIR) + "/" + rel; }

inline const fluidcc::ComponentLibrary& defaultLibrary() {
  static const fluidcc::ComponentLibrary lib = [] {
    auto r = fluidcc::loadLibraryFile(FLUIDCC_DEFAULT_LIBRARY);
    if (!r.library) throw fluidcc::Error("default library failed to load");
    return *r.library;
  }();
  return lib;
}

inline fluidcc::Netlist parseOrThrow(const std::string& text,
                                     const fluidcc::ComponentLibrary& lib = defaultLibrary()) {
  auto r = fluidcc::parseNetlist(text, lib);
  if (!r.netlist) throw fluidcc::Error("parse failed: " + fluidcc::format(r.diagnostics, "<text>"));
  return *r.netlist;
}

inline fluidcc::Netlist loadCircuit(const std::string& name) {
  return parseOrThrow(fluidcc::readTextFile(sourcePath("circuits/" + name + ".fcc")));
}

inline const char* const kShippedCircuits[] = {"fanout2", "fanout3", "full_adder", "ring3",
                                               "ring5",   "ring_oscillator", "single", "xor"};

}  // namespace testsupport
