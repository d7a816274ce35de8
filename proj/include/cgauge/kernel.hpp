#pragma once

#include <cmath>

#include "cgauge/particles.hpp"

namespace cgauge {

enum class ModelTag { CoulombOnly, Darwin, TransverseLiteral, TransverseProjection };

enum class KernelEval { ClosedForm, Quadrature };

// Reading of the inner gradient in the transverse-kernel integral: with
// respect to the integration point, or with respect to the source position
// (which flips the sign of the correction relative to the bare 1/R term).
enum class InnerGradient { IntegrationPoint, SourcePoint };

struct HamiltonianModel {
  ModelTag tag = ModelTag::Darwin;
  KernelEval eval = KernelEval::ClosedForm;
  InnerGradient reading = InnerGradient::IntegrationPoint;
};

// 3x3 pair tensor T(r) = a*I + b*nn, rotationally symmetric about n.
struct PairKernel {
  Mat3 T;
  double a = 0.0; // coefficient of the identity (1/length)
  double b = 0.0; // coefficient of n (x) n (1/length)
  double R = 0.0; // separation length
  double estimated_error = 0.0; // nonzero only for quadrature kernels

  static PairKernel from_coefficients(double a, double b, const Vec3 &nhat,
                                      double R) {
    PairKernel k;
    k.a = a;
    k.b = b;
    k.R = R;
    k.T = a * Mat3::Identity() + b * (nhat * nhat.transpose());
    return k;
  }
};

// Isotropic coefficients (alpha, beta) such that T(r) = (alpha*I + beta*nn)/R.
//
//   Darwin / TransverseProjection:  (I + nn)/(2R), the Darwin bracket over 2R.
//   TransverseLiteral:              7I/(6R) - nn/(2R), the pointwise
//                                   (principal-value) evaluation of the
//                                   smeared dipole integral; the SourcePoint
//                                   reading flips the correction's sign,
//                                   giving 5I/(6R) + nn/(2R).
inline void kernel_coefficients(ModelTag tag, InnerGradient reading,
                                double &alpha, double &beta) {
  switch (tag) {
  case ModelTag::CoulombOnly:
    alpha = 0.0;
    beta = 0.0;
    break;
  case ModelTag::Darwin:
  case ModelTag::TransverseProjection:
    alpha = 0.5;
    beta = 0.5;
    break;
  case ModelTag::TransverseLiteral:
    if (reading == InnerGradient::IntegrationPoint) {
      alpha = 7.0 / 6.0;
      beta = -0.5;
    } else {
      alpha = 5.0 / 6.0;
      beta = 0.5;
    }
    break;
  }
}

inline PairKernel kernel_closed(const HamiltonianModel &model, const Vec3 &r) {
  const double R = r.norm();
  if (R == 0.0)
    throw degenerate_configuration_error("kernel_closed: zero separation");
  const Vec3 nhat = r / R;
  double alpha = 0.0, beta = 0.0;
  kernel_coefficients(model.tag, model.reading, alpha, beta);
  return PairKernel::from_coefficients(alpha / R, beta / R, nhat, R);
}

} // namespace cgauge
