#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tanfem/matexp.hpp"

using namespace tanfem;
using oracles::fro_diff;
using oracles::fro_norm;
using oracles::lift_direction;
using oracles::max_abs_diff;
using oracles::random_sym2;
using oracles::tangent_derivs;
using oracles::tangent_values;
using oracles::taylor_expm;

namespace {

Sym2<double> tangent_of_expm(const Sym2<double>& m, const Sym2<double>& dm,
                             const ExpmConfig& cfg) {
  const Sym2<Tangent> lifted = lift_direction(m, dm);
  return tangent_derivs(expm(lifted, cfg));
}

}  // namespace

TEST_CASE("gamma") {
  CHECK(gamma(Sym2<double>{3, 1, 1}) == 1.0);
  CHECK(gamma(Sym2<double>{2.5, -0.3, 2.5}) == 0.0);
  CHECK(gamma(Sym2<double>{0, 0, -4}) == 2.0);
}

TEST_CASE("2x2 plumbing") {
  CHECK(infnorm2(Sym2<double>{1, -2, 0.5}) == 3.0);

  const Mat2<double> inv_i = matinv2(Mat2<double>::identity());
  CHECK(inv_i.a11 == 1.0);
  CHECK(inv_i.a12 == 0.0);
  CHECK(inv_i.a22 == 1.0);

  oracles::Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    Mat2<double> a{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
                   rng.uniform(-2, 2)};
    a.a11 += (a.a11 < 0 ? -2.5 : 2.5);  // keep well-conditioned
    a.a22 += (a.a22 < 0 ? -2.5 : 2.5);
    const Mat2<double> p = a * matinv2(a);
    CHECK(std::abs(p.a11 - 1.0) <= 1e-13);
    CHECK(std::abs(p.a12) <= 1e-13);
    CHECK(std::abs(p.a21) <= 1e-13);
    CHECK(std::abs(p.a22 - 1.0) <= 1e-13);
  }

  CHECK_THROWS_AS((void)matinv2(Mat2<double>{0, 0, 0, 0}), Error);
}

TEST_CASE("ceil_log2 maps exact powers of two to their exponent") {
  CHECK(ceil_log2(1.0) == 0);
  CHECK(ceil_log2(2.0) == 1);
  CHECK(ceil_log2(4.0) == 2);
  CHECK(ceil_log2(0.5) == -1);
  CHECK(ceil_log2(3.0) == 2);
  CHECK(ceil_log2(4.0001) == 3);
  CHECK(ceil_log2(0.7) == 0);
}

TEST_CASE("pade coefficients are pinned") {
  CHECK(ExpmConfig::pade[0] == 0.5);
  CHECK(ExpmConfig::pade[1] == 5.0 / 44);
  CHECK(ExpmConfig::pade[2] == 1.0 / 66);
  CHECK(ExpmConfig::pade[3] == 1.0 / 792);
  CHECK(ExpmConfig::pade[4] == 1.0 / 15840);
  CHECK(ExpmConfig::pade[5] == 1.0 / 665280);
}

TEST_CASE("expm(0) = I under every policy") {
  for (auto policy : {SmallNormPolicy::naive_identity, SmallNormPolicy::taylor_fix,
                      SmallNormPolicy::no_return}) {
    ExpmConfig cfg;
    cfg.policy = policy;
    const Sym2<double> e = expm(Sym2<double>::zero(), cfg);
    CHECK(e.m11 == 1.0);
    CHECK(e.m12 == 0.0);
    CHECK(e.m22 == 1.0);
  }
}

TEST_CASE("expm of an off-diagonal matrix matches the Taylor oracle") {
  const Sym2<double> m{0, 0.7, 0};
  CHECK(max_abs_diff(expm(m), taylor_expm(m)) <= 1e-12);
}

TEST_CASE("expm of diag(1,-1)") {
  const Sym2<double> e = expm(Sym2<double>{1, 0, -1});
  CHECK(std::abs(e.m11 - std::exp(1.0)) <= 1e-12);
  CHECK(std::abs(e.m12) <= 1e-14);
  CHECK(std::abs(e.m22 - std::exp(-1.0)) <= 1e-12);
}

TEST_CASE("expm oracle equivalence and determinant identity") {
  oracles::Rng rng(90210);
  double worst = 0, worst_det = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Sym2<double> m = random_sym2(rng, 4.0);
    const Sym2<double> e = expm(m);
    worst = std::max(worst, max_abs_diff(e, taylor_expm(m)));
    const double det_err =
        std::abs(det2(e) - std::exp(trace(m))) / std::exp(trace(m));
    worst_det = std::max(worst_det, det_err);
  }
  CHECK(worst <= 1e-11);
  CHECK(worst_det <= 1e-10);
}

TEST_CASE("dexpm_closed at M = 0 is the identity map") {
  const Sym2<double> dm{0.3, -1.1, 0.45};
  const Sym2<double> d = dexpm_closed(Sym2<double>::zero(), dm);
  CHECK(max_abs_diff(d, dm) <= 1e-15);
}

TEST_CASE("dexpm_closed at M = a*I is scalar scaling") {
  const double a = 0.8;
  const Sym2<double> dm{1.3, 0.2, -0.7};
  const Sym2<double> d = dexpm_closed(Sym2<double>{a, 0, a}, dm);
  const Sym2<double> want = dm * std::exp(a);
  CHECK(max_abs_diff(d, want) <= 1e-13);
}

TEST_CASE("dexpm_closed matches central differences") {
  oracles::Rng rng(31);
  const double h = 1e-6;
  for (int rep = 0; rep < 100; ++rep) {
    const Sym2<double> m = random_sym2(rng, 2.0);
    const Sym2<double> dm = random_sym2(rng, 2.0);
    const Sym2<double> ep = expm(m + dm * h);
    const Sym2<double> em = expm(m - dm * h);
    const Sym2<double> fd = (ep - em) * (1.0 / (2 * h));
    CHECK(max_abs_diff(dexpm_closed(m, dm), fd) <= 1e-8);
  }
}

TEST_CASE("g_func limits and values") {
  CHECK(std::abs(g_func(Sym2<double>{0.9, 0, 0.9}) - 1.0 / 6) <= 1e-15);
  // s = 1: g = sinh(1) - 1
  CHECK(std::abs(g_func(Sym2<double>{1, 0, -1}) - (std::sinh(1.0) - 1.0)) <= 1e-15);
  CHECK(g_func(Sym2<double>{1, 0, -1}) == doctest::Approx(0.1752011936).epsilon(1e-9));
}

TEST_CASE("g_func branch continuity at the series switch") {
  // both formulas evaluated at the switch point itself
  const double s = kSeriesSwitch;
  const Sym2<double> m{s, 0, -s};  // gamma = s, m12 = 0
  const double direct = (std::sinh(s) - s) / (s * s * s);
  const double series = g_func(Sym2<double>{std::nextafter(s, 0.0), 0,
                                            -std::nextafter(s, 0.0)});
  CHECK(std::abs(g_func(m) - direct) == 0.0);  // at the switch the direct branch runs
  CHECK(std::abs(series - direct) / direct <= 1e-14);
}

TEST_CASE("f_func limits and values") {
  CHECK(std::abs(f_func(Sym2<double>{0.4, 0, 0.4}) - 1.0 / 3) <= 1e-15);
  // s = 1: f = 2 / (e^2 - 1)
  const double want = 2.0 / (std::exp(2.0) - 1.0);
  CHECK(std::abs(f_func(Sym2<double>{1, 0, -1}) - want) <= 1e-14);
  CHECK(f_func(Sym2<double>{1, 0, -1}) == doctest::Approx(0.3130352855).epsilon(1e-9));
}

TEST_CASE("f_func branch continuity at the series switch") {
  const double s = kSeriesSwitch;
  const Sym2<double> just_above{s, 0, -s};
  const Sym2<double> just_below{std::nextafter(s, 0.0), 0, -std::nextafter(s, 0.0)};
  const double fa = f_func(just_above);
  const double fb = f_func(just_below);
  CHECK(std::abs(fa - fb) / std::abs(fa) <= 1e-10);
}

TEST_CASE("f_func flows through tangents") {
  // f is even in (gamma, m12), so its derivative at Psi = 0 vanishes
  const Sym2<Tangent> z = lift_direction(Sym2<double>::zero(), {1, 2, 3});
  const Tangent f0 = f_func(z);
  CHECK(f0.value() == doctest::Approx(1.0 / 3));
  CHECK(f0.deriv(0) == 0.0);

  // away from zero, compare against central differences along a direction
  oracles::Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const Sym2<double> m = random_sym2(rng, 2.0);
    const Sym2<double> dm = random_sym2(rng, 2.0);
    const double h = 1e-6;
    const double fd = (f_func(m + dm * h) - f_func(m - dm * h)) / (2 * h);
    const Tangent f = f_func(lift_direction(m, dm));
    CHECK(std::abs(f.deriv(0) - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("AD through expm equals the closed form (taylor_fix)") {
  ExpmConfig cfg;
  cfg.policy = SmallNormPolicy::taylor_fix;
  oracles::Rng rng(424242);
  double worst = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const Sym2<double> m = random_sym2(rng, 2.0);
    const Sym2<double> dm = random_sym2(rng, 2.0);
    worst = std::max(worst, max_abs_diff(tangent_of_expm(m, dm, cfg),
                                         dexpm_closed(m, dm)));
  }
  // the pitfall points: M = 0 and near-degenerate spectra
  const Sym2<double> dirs[] = {{1, 0, 0}, {0, 1, 0}, {0.4, -0.3, 0.8}};
  for (const auto& dm : dirs) {
    worst = std::max(worst, max_abs_diff(tangent_of_expm(Sym2<double>::zero(), dm, cfg),
                                         dexpm_closed(Sym2<double>::zero(), dm)));
    for (double delta : {1e-8, 1e-10, 1e-12}) {
      const Sym2<double> m{1.0, delta, 1.0};
      worst = std::max(worst, max_abs_diff(tangent_of_expm(m, dm, cfg),
                                           dexpm_closed(m, dm)));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("naive_identity zeroes the tangent at M = 0; the fix restores it") {
  const Sym2<double> dm{0.7, -0.2, 1.1};
  ExpmConfig naive;
  naive.policy = SmallNormPolicy::naive_identity;
  const Sym2<double> t_naive = tangent_of_expm(Sym2<double>::zero(), dm, naive);
  CHECK(t_naive.m11 == 0.0);
  CHECK(t_naive.m12 == 0.0);
  CHECK(t_naive.m22 == 0.0);

  ExpmConfig fix;
  fix.policy = SmallNormPolicy::taylor_fix;
  CHECK(max_abs_diff(tangent_of_expm(Sym2<double>::zero(), dm, fix), dm) == 0.0);

  ExpmConfig noret;
  noret.policy = SmallNormPolicy::no_return;
  CHECK(max_abs_diff(tangent_of_expm(Sym2<double>::zero(), dm, noret), dm) <= 1e-15);
}

TEST_CASE("taylor_fix and no_return agree below the norm floor") {
  ExpmConfig fix, noret;
  fix.policy = SmallNormPolicy::taylor_fix;
  noret.policy = SmallNormPolicy::no_return;
  oracles::Rng rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    const Sym2<double> m = random_sym2(rng, 0.9e-12);
    const Sym2<double> dm = random_sym2(rng, 2.0);
    CHECK(max_abs_diff(expm(m, fix), expm(m, noret)) <= 1e-12);
    CHECK(max_abs_diff(tangent_of_expm(m, dm, fix), tangent_of_expm(m, dm, noret)) <=
          1e-12);
  }
}

TEST_CASE("expm_spectral values agree with scaling/squaring") {
  oracles::Rng rng(6021023);
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Sym2<double> m = random_sym2(rng, 2.0);
    worst = std::max(worst, max_abs_diff(expm_spectral(m), expm(m)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("expm_spectral tangent is fine for well-separated eigenvalues") {
  const Sym2<double> m{2, 0, -1};
  const Sym2<double> dirs[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.3, 0.5, -0.2}};
  for (const auto& dm : dirs) {
    const Sym2<double> t = tangent_derivs(expm_spectral(lift_direction(m, dm)));
    CHECK(max_abs_diff(t, dexpm_closed(m, dm)) <= 1e-10);
  }
}

TEST_CASE("expm_spectral tangent degrades near a degenerate spectrum") {
  // the 4.2-style demo: value ok, derivative garbage, while scaling/squaring
  // stays consistent with the closed form
  const Sym2<double> m{1.0, 1e-10, 1.0};
  const Sym2<double> dm{1.0, 0.0, 0.0};  // moves gamma, the unstable direction
  const Sym2<double> ref = dexpm_closed(m, dm);

  const Sym2<double> t_spec = tangent_derivs(expm_spectral(lift_direction(m, dm)));
  ExpmConfig cfg;
  cfg.policy = SmallNormPolicy::taylor_fix;
  const Sym2<double> t_pade = tangent_of_expm(m, dm, cfg);

  const double dev_spec = fro_diff(t_spec, ref) / fro_norm(ref);
  const double dev_pade = fro_diff(t_pade, ref) / fro_norm(ref);
  CHECK(dev_pade <= 1e-8);
  CHECK(dev_spec > 1e3 * dev_pade);
}
