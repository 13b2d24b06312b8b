#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace beol {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed GDSII stream. Carries the byte offset of the offending record.
struct ParseError : Error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off)
      : Error(msg + " (byte offset " + std::to_string(off) + ")"), offset(off) {}
};

// Cyclic SREF/AREF reference chain.
struct CycleError : Error {
  using Error::Error;
};

// Tech-stack JSON violates the documented schema.
struct SchemaError : Error {
  using Error::Error;
};

// Layout feature outside the supported GDSII subset (non-90 rotation, mag != 1).
struct UnsupportedError : Error {
  using Error::Error;
};

// Window / thickness not an integer multiple of the voxel resolution.
struct ResolutionError : Error {
  using Error::Error;
};

// Coordinate does not fit the signed 32-bit GDSII database unit range.
struct RangeError : Error {
  using Error::Error;
};

// Iterative solver failed to converge. Carries the residual history.
struct SolverError : Error {
  std::vector<double> residual_history;
  SolverError(const std::string& msg, std::vector<double> history)
      : Error(msg), residual_history(std::move(history)) {}
};

// Property-map file schema or version mismatch.
struct FormatError : Error {
  using Error::Error;
};

// Too many failed cells while building a property map.
struct MapError : Error {
  using Error::Error;
};

// Steady problem with no Dirichlet or Robin face.
struct SingularError : Error {
  using Error::Error;
};

// Requested timestep absent from a map's dt list.
struct KeyError : Error {
  using Error::Error;
};

// Bad CLI configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace beol
