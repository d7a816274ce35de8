#pragma once

#include <stdexcept>
#include <string>

namespace cgauge {

struct degenerate_configuration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quadrature failed to reach the requested tolerance; carries the estimate.
struct convergence_error : std::runtime_error {
  double estimated_error;
  convergence_error(const std::string &msg, double est)
      : std::runtime_error(msg), estimated_error(est) {}
};

struct unsupported_mode_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct excluded_transfer_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct solver_error : std::runtime_error {
  double residual;
  solver_error(const std::string &msg, double res)
      : std::runtime_error(msg), residual(res) {}
};

struct normalization_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct stiffness_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct collision_error : std::runtime_error {
  double time;
  collision_error(const std::string &msg, double t)
      : std::runtime_error(msg), time(t) {}
};

struct alignment_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace cgauge
