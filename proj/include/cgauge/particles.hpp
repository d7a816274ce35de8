#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cgauge/errors.hpp"

namespace cgauge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Classical phase-space configuration of N point charges.
struct ParticleSet {
  std::vector<double> mass;
  std::vector<double> charge;
  std::vector<Vec3> position;
  std::vector<Vec3> momentum;

  int n() const { return static_cast<int>(mass.size()); }

  void validate() const {
    const auto N = mass.size();
    if (charge.size() != N || position.size() != N || momentum.size() != N)
      throw config_error("ParticleSet: mismatched field lengths");
    for (double m : mass)
      if (!(m > 0.0))
        throw config_error("ParticleSet: masses must be strictly positive");
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i + 1; j < N; ++j)
        if ((position[i] - position[j]).norm() == 0.0)
          throw degenerate_configuration_error(
              "ParticleSet: coincident particles");
  }
};

// n_ij = (r_i - r_j)/|r_i - r_j|
inline Vec3 pair_unit_vector(const Vec3 &ri, const Vec3 &rj) {
  const Vec3 d = ri - rj;
  const double R = d.norm();
  if (R == 0.0)
    throw degenerate_configuration_error(
        "pair_unit_vector: coincident positions");
  return d / R;
}

} // namespace cgauge
