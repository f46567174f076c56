#pragma once

#include <cmath>

#include "geoheat/common.hpp"

namespace geoheat {

/// Smooth monotone bump in the squared-distance variable: identically 1 on
/// [0,a], identically 0 on [b,inf), C-infinity in between. The support bound b
/// stays strictly below injrad^2/4.
struct CutoffChi {
  double plateau_end = 0.0;   // a
  double support_end = 0.0;   // b

  static CutoffChi for_injectivity_radius(double injrad) {
    CutoffChi chi;
    chi.plateau_end = injrad * injrad / 8.0;
    chi.support_end = 0.2499 * injrad * injrad;
    return chi;
  }

  double operator()(double u) const {
    if (u <= plateau_end) return 1.0;
    if (u >= support_end) return 0.0;
    const double s = (u - plateau_end) / (support_end - plateau_end);
    const double g0 = bump(s);
    const double g1 = bump(1.0 - s);
    return g1 / (g0 + g1);
  }

 private:
  static double bump(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
};

inline double cutoff_chi(const CutoffChi& chi, double u) {
  if (u < 0.0) throw DomainError("cutoff_chi: negative squared length");
  return chi(u);
}

}  // namespace geoheat
