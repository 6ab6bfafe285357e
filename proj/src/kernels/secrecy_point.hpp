#pragma once

// Reference expression for one allocation. The vector variants evaluate the
// same operations in the same order.

#include <algorithm>

#include "ehrelay/kernels/secrecy_kernel.hpp"

namespace ehrelay::kernels::detail {

inline double secrecy_gain_point(const SecrecyConstants& k, double beta, double p1, double p2,
                                 double pj) {
  const double bt = 1.0 - beta;
  const double e1 = p1 * k.c1;  // gamma-hat_i
  const double e2 = p2 * k.c2;
  const double eJ = pj * k.cJ;
  const double r1 = p1 * k.t1;  // gamma at the worst-case true channel
  const double r2 = p2 * k.t2;
  const double rJ = pj * k.tJ;
  const double sum_true = (r1 + r2) + rJ;
  const double sum_est = (e1 + e2) + eJ;
  const double leak = (p1 * k.w1 + p2 * k.w2) + pj * k.wJ;

  const double snr_r2 = (bt * r1) / (bt * (r2 + rJ) + 1.0);
  const double snr_r1 = (bt * r2) / (bt * (r1 + rJ) + 1.0);
  const double a2 = (beta * k.eta * sum_true) / (bt * sum_true + 1.0);

  const double den2 = 1.0 + a2 * ((k.G2 + bt * k.e2sq * sum_est) + bt * k.g2 * leak);
  const double den1 = 1.0 + a2 * ((k.G1 + bt * k.e1sq * sum_est) + bt * k.g1 * leak);
  const double snr_s2 = (k.g2 * a2 * bt * e1) / den2;
  const double snr_s1 = (k.g1 * a2 * bt * e2) / den1;

  const double q1 = (1.0 + snr_s1) / (1.0 + snr_r1);
  const double q2 = (1.0 + snr_s2) / (1.0 + snr_r2);
  return std::max(q1, 1.0) * std::max(q2, 1.0);
}

}  // namespace ehrelay::kernels::detail
