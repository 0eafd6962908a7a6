#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fluidcc {

enum class Severity { Note, Warning, Error };

inline const char* toString(Severity s) {
  switch (s) {
    case Severity::Note: return "note";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "error";
}

struct SourceLoc {
  int line = 0;
  int column = 0;
  constexpr bool operator==(const SourceLoc&) const = default;
};

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceLoc loc;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

/// Renders `file:line:col: severity: message`. Locations of 0 are rendered as-is
/// so that output stays byte-stable.
inline std::string format(const Diagnostic& d, const std::string& file) {
  return file + ":" + std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": " +
         toString(d.severity) + ": " + d.message;
}

inline std::string format(const Diagnostics& ds, const std::string& file) {
  std::string out;
  for (const auto& d : ds) {
    out += format(d, file);
    out += '\n';
  }
  return out;
}

inline bool hasErrors(const Diagnostics& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

/// Base class of all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RoutingError : public Error {
 public:
  using Error::Error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class SimError : public Error {
 public:
  using Error::Error;
};

}  // namespace fluidcc
