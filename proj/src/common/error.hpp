#pragma once

#include <stdexcept>
#include <string>

namespace n2olab {

enum class ErrorKind {
  Parameter,      // invalid numeric argument or kinetic parameter
  Configuration,  // malformed or inconsistent config document
  Structural,     // dimension/shape mismatch between internal objects
  Solver,         // integrator failure
  Schema,         // dataset columns do not match what was requested
  Io,             // filesystem / parse failure of an input file
  Data,           // statistically undefined input (too short, zero variance, ...)
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Configuration: return "config";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Io: return "io";
    case ErrorKind::Data: return "data";
  }
  return "unknown";
}

}  // namespace n2olab
