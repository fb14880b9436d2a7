#pragma once

// Matrix exponential for symmetric 2x2 matrices by scaling/squaring with a
// degree-6 Pade approximant, written once over a generic scalar type so the
// same code produces values (double) and directional derivatives (Tangent).
// This genericity is the architectural core of the project: element residuals
// and everything they call, including this function, are differentiated by
// instantiation instead of by maintaining hand-derived Jacobian code.
//
// The small-norm branch is configurable because its naive form (return the
// identity) silently zeroes every derivative near M = 0; taylor_fix (return
// I + M) is the default remedy, and naive_identity is retained only to
// reproduce that failure in tests.

#include <array>
#include <cmath>

#include "tanfem/mat2.hpp"
#include "tanfem/tangent.hpp"

namespace tanfem {

enum class SmallNormPolicy { naive_identity, taylor_fix, no_return };

struct ExpmConfig {
  double norm_floor = 1e-12;
  SmallNormPolicy policy = SmallNormPolicy::taylor_fix;
  // Degree-6 Pade coefficients; alternating signs in the denominator L.
  static constexpr std::array<double, 6> pade = {
      1.0 / 2, 5.0 / 44, 1.0 / 66, 1.0 / 792, 1.0 / 15840, 1.0 / 665280};
};

// ceil(log2(x)) with exact powers of two mapping to their integer exponent.
inline int ceil_log2(double x) {
  int e = 0;
  const double mant = std::frexp(x, &e);  // x = mant * 2^e, mant in [0.5, 1)
  return mant == 0.5 ? e - 1 : e;
}

template <class T>
Sym2<T> expm(const Sym2<T>& m, const ExpmConfig& cfg = {}) {
  const double nrm = infnorm2(m);
  int j = 0;
  if (nrm >= cfg.norm_floor) {
    j = ceil_log2(nrm);
    if (j < 1) j = 1;
  } else {
    switch (cfg.policy) {
      case SmallNormPolicy::naive_identity:
        return Sym2<T>::identity();
      case SmallNormPolicy::taylor_fix:
        return {m.m11 + 1.0, m.m12, m.m22 + 1.0};
      case SmallNormPolicy::no_return:
        j = 0;
        break;
    }
  }

  const Mat2<T> a = to_mat(m) * std::ldexp(1.0, -j);
  Mat2<T> l = Mat2<T>::identity();
  Mat2<T> k = Mat2<T>::identity();
  Mat2<T> pw = Mat2<T>::identity();
  double sign = -1.0;
  for (int i = 0; i < 6; ++i) {
    pw = matmul2(pw, a);
    add_scaled(l, pw, sign * ExpmConfig::pade[i]);
    add_scaled(k, pw, ExpmConfig::pade[i]);
    sign = -sign;
  }
  k = matinv2(l) * k;  // throws singular_matrix on |det L| < 1e-300
  for (int i = 0; i < j; ++i) k = k * k;
  return sym_part(k);
}

inline constexpr double kSeriesSwitch = 0.25;

// g(M) = (gamma^2 + M12^2)^{-3/2} (sinh s - s), s = sqrt(gamma^2 + M12^2),
// with an even Taylor series below the switch to dodge the 0/0.
inline double g_func(const Sym2<double>& m) {
  const double gm = gamma(m);
  const double s2 = gm * gm + m.m12 * m.m12;
  if (s2 >= kSeriesSwitch * kSeriesSwitch) {
    const double s = std::sqrt(s2);
    return (std::sinh(s) - s) / (s2 * s);
  }
  return 1.0 / 6 +
         s2 * (1.0 / 120 +
               s2 * (1.0 / 5040 +
                     s2 * (1.0 / 362880 +
                           s2 * (1.0 / 39916800 + s2 * (1.0 / 6227020800.0)))));
}

// f from the constitutive equation; the removable singularity at s = 0 is
// handled by an even series in s^2, which keeps the small branch free of
// sqrt and therefore smooth for tangents at Psi = 0. The branch itself is a
// branch in the tangent sense: each side is differentiated independently.
template <class T>
T f_func(const Sym2<T>& psi) {
  using std::exp;
  using std::sqrt;
  const T gm = gamma(psi);
  const T s2 = gm * gm + psi.m12 * psi.m12;
  if (value_of(s2) >= kSeriesSwitch * kSeriesSwitch) {
    const T s = sqrt(s2);
    return (s + 2.0 * s / (exp(2.0 * s) - 1.0) - 1.0) / s2;
  }
  return 1.0 / 3 +
         s2 * (-1.0 / 45 +
               s2 * (2.0 / 945 +
                     s2 * (-1.0 / 4725 +
                           s2 * (2.0 / 93555 + s2 * (-1382.0 / 638512875.0)))));
}

// Closed-form directional derivative of expm (reals only): the oracle the
// tangent-mode path is checked against.
inline Sym2<double> dexpm_closed(const Sym2<double>& m, const Sym2<double>& dm) {
  ExpmConfig cfg;
  cfg.policy = SmallNormPolicy::taylor_fix;
  const Sym2<double> eh = expm(m * 0.5, cfg);
  const double gm = gamma(m);
  const double bracket = gm * dm.m12 - m.m12 * gamma(dm);
  const double scale = bracket * g_func(m);
  const Sym2<double> inner{dm.m11 - m.m12 * scale, dm.m12 + gm * scale,
                           dm.m22 + m.m12 * scale};
  const Mat2<double> r = matmul2(to_mat(eh), matmul2(to_mat(inner), to_mat(eh)));
  return sym_part(r);
}

// Spectral-decomposition variant. Values are fine everywhere; tangents are
// numerically unstable near degenerate eigenvalues because the projector
// derivatives blow up like 1/gap even though their sum stays bounded. Kept to
// demonstrate exactly that.
template <class T>
Sym2<T> expm_spectral(const Sym2<T>& m) {
  using std::exp;
  using std::sqrt;
  const T mean = (m.m11 + m.m22) * 0.5;
  const T gm = gamma(m);
  const T s2 = gm * gm + m.m12 * m.m12;
  if (value_of(s2) == 0.0) {
    const T e = exp(mean);
    return {e, T(0.0), e};
  }
  const T s = sqrt(s2);
  const T l1 = mean + s;
  const T l2 = mean - s;
  // Eigenvector formulas picked per sign of gamma so neither degenerates;
  // the two projectors are built independently on purpose.
  T v1x, v1y, v2x, v2y;
  if (value_of(gm) >= 0.0) {
    v1x = s + gm;
    v1y = m.m12;
    v2x = m.m12;
    v2y = -(gm + s);
  } else {
    v1x = m.m12;
    v1y = s - gm;
    v2x = s - gm;
    v2y = -m.m12;
  }
  const T w1 = exp(l1) / (v1x * v1x + v1y * v1y);
  const T w2 = exp(l2) / (v2x * v2x + v2y * v2y);
  return {w1 * v1x * v1x + w2 * v2x * v2x, w1 * v1x * v1y + w2 * v2x * v2y,
          w1 * v1y * v1y + w2 * v2y * v2y};
}

}  // namespace tanfem
