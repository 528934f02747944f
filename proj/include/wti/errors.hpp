#pragma once

#include <stdexcept>
#include <string>

namespace wti {

// Error categories map one-to-one onto the CLI exit codes.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PlanningError : std::runtime_error {
  explicit PlanningError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when the drone sits (numerically) on the vertical line through the
// inspection point and the planar visual functions lose their meaning.
struct DegenerateGeometry : std::runtime_error {
  explicit DegenerateGeometry(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wti
