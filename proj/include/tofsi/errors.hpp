#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tofsi {

// Process exit codes used by the CLI.
enum ExitCode : int {
  exit_ok = 0,
  exit_config_error = 2,
  exit_convergence_error = 3,
  exit_geometry_error = 4,
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inverted elements, invalid meshes. Carries offending element ids.
class GeometryError : public std::runtime_error {
 public:
  GeometryError(const std::string& msg, std::vector<int> elements = {})
      : std::runtime_error(msg), bad_elements(std::move(elements)) {}
  std::vector<int> bad_elements;
};

// Nonlinear / outer-loop convergence failures. Carries the residual history.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, std::vector<double> history = {})
      : std::runtime_error(msg), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tofsi
