#pragma once

#include <cmath>

namespace veds {

/// Scheduler weight/approximation parameters shared across the online
/// algorithm, the subproblem solvers and the bound calculators.
struct VedsParams {
  double v_weight = 0.2;   // V: bit-value vs energy-queue tradeoff
  double alpha = 2.0;      // sigmoid approximation sharpness
  double model_bits = 5e7; // Q
  double kappa = 0.1;      // slot seconds
  int total_slots = 0;     // T_k
};

/// Shifted sigmoid sigma(zeta) = 1 / (1 + exp(-alpha (zeta - Q) / Q)).
inline double sigma(double zeta, double alpha, double model_bits) {
  return 1.0 / (1.0 + std::exp(-alpha * (zeta - model_bits) / model_bits));
}

/// d sigma / d zeta = alpha sigma (1 - sigma) / Q; increasing on [0, Q].
inline double dsigma(double zeta, double alpha, double model_bits) {
  const double s = sigma(zeta, alpha, model_bits);
  return alpha * s * (1.0 - s) / model_bits;
}

/// psi(alpha) = dsigma(0) / dsigma(Q) = 4 sigma(0) (1 - sigma(0)).
inline double psi(double alpha) {
  const double s0 = 1.0 / (1.0 + std::exp(alpha));
  return 4.0 * s0 * (1.0 - s0);
}

}  // namespace veds
