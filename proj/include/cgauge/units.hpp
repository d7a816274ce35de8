#pragma once

#include "cgauge/errors.hpp"

namespace cgauge {

// Gaussian units, nondimensionalized so lengths/masses/charges are order 1.
// c is configurable so tests can exaggerate or suppress the 1/c^2 effects.
struct UnitSystem {
  double c = 137.036;
  double hbar = 1.0;

  void validate() const {
    if (!(c > 0.0))
      throw config_error("UnitSystem: c must be positive");
    if (!(hbar > 0.0))
      throw config_error("UnitSystem: hbar must be positive");
  }
};

} // namespace cgauge
