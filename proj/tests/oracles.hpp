#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "tanfem/mat2.hpp"
#include "tanfem/tangent.hpp"

namespace oracles {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

// Plain truncated Taylor sum with normalized terms; no scaling, no Pade.
inline tanfem::Sym2<double> taylor_expm(const tanfem::Sym2<double>& m,
                                        int terms = 40) {
  using tanfem::Mat2;
  const Mat2<double> a = tanfem::to_mat(m);
  Mat2<double> term = Mat2<double>::identity();
  Mat2<double> sum = Mat2<double>::identity();
  for (int k = 1; k <= terms; ++k) {
    term = term * a * (1.0 / k);
    sum = sum + term;
  }
  return tanfem::sym_part(sum);
}

inline double max_abs_diff(const tanfem::Sym2<double>& a,
                           const tanfem::Sym2<double>& b) {
  return std::max({std::abs(a.m11 - b.m11), std::abs(a.m12 - b.m12),
                   std::abs(a.m22 - b.m22)});
}

inline double fro_norm(const tanfem::Sym2<double>& a) {
  return std::sqrt(a.m11 * a.m11 + 2 * a.m12 * a.m12 + a.m22 * a.m22);
}

inline double fro_diff(const tanfem::Sym2<double>& a,
                       const tanfem::Sym2<double>& b) {
  const double d11 = a.m11 - b.m11, d12 = a.m12 - b.m12, d22 = a.m22 - b.m22;
  return std::sqrt(d11 * d11 + 2 * d12 * d12 + d22 * d22);
}

// Entries uniform in [-c/2, c/2] keep the max absolute row sum at or below c.
inline tanfem::Sym2<double> random_sym2(Rng& rng, double norm_bound) {
  const double h = norm_bound / 2;
  return {rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-h, h)};
}

// Directional tangent of expm: lifts M with a single direction dM.
inline tanfem::Sym2<tanfem::Tangent> lift_direction(
    const tanfem::Sym2<double>& m, const tanfem::Sym2<double>& dm) {
  using tanfem::DerivVec;
  using tanfem::Tangent;
  auto one = [](double v, double d) {
    DerivVec dv = DerivVec::uninitialized(1);
    dv[0] = d;
    return Tangent(v, std::move(dv));
  };
  return {one(m.m11, dm.m11), one(m.m12, dm.m12), one(m.m22, dm.m22)};
}

inline tanfem::Sym2<double> tangent_values(const tanfem::Sym2<tanfem::Tangent>& m) {
  return {m.m11.value(), m.m12.value(), m.m22.value()};
}

inline tanfem::Sym2<double> tangent_derivs(const tanfem::Sym2<tanfem::Tangent>& m,
                                           std::size_t dir = 0) {
  return {m.m11.deriv(dir), m.m12.deriv(dir), m.m22.deriv(dir)};
}

// Central finite differences of a scalar-vector function, one column.
template <class F>
std::vector<double> central_diff(F&& f, std::span<const double> x, std::size_t j,
                                 double h) {
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  xp[j] += h;
  xm[j] -= h;
  std::vector<double> fp = f(xp), fm = f(xm);
  std::vector<double> out(fp.size());
  for (std::size_t i = 0; i < fp.size(); ++i) out[i] = (fp[i] - fm[i]) / (2 * h);
  return out;
}

}  // namespace oracles
