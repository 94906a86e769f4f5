#pragma once

#include <stdexcept>
#include <string>

namespace codesign {

struct InvalidSpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateGeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyDesignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulationDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace codesign
