#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tanfem/tangent.hpp"

using namespace tanfem;

namespace {

Tangent seeded1(double v, double d) {
  DerivVec dv = DerivVec::uninitialized(1);
  dv[0] = d;
  return Tangent(v, std::move(dv));
}

Tangent seeded2(double v, double d0, double d1) {
  DerivVec dv = DerivVec::uninitialized(2);
  dv[0] = d0;
  dv[1] = d1;
  return Tangent(v, std::move(dv));
}

}  // namespace

TEST_CASE("lift with identity seed") {
  const double vals[] = {4.0, 5.0};
  auto t = lift(vals, SeedMatrix::identity(2));
  REQUIRE(t.size() == 2);
  CHECK(t[0].value() == 4.0);
  CHECK(t[0].deriv(0) == 1.0);
  CHECK(t[0].deriv(1) == 0.0);
  CHECK(t[1].value() == 5.0);
  CHECK(t[1].deriv(0) == 0.0);
  CHECK(t[1].deriv(1) == 1.0);
}

TEST_CASE("lift with DOF-block seed") {
  const double vals[] = {1.5, -2.0, 3.0, 7.0};
  auto t = lift(vals, SeedMatrix::dof_block(2, 2, 0));
  REQUIRE(t.size() == 4);
  CHECK(t[0].deriv(0) == 1.0);
  CHECK(t[0].deriv(1) == 0.0);
  CHECK(t[1].deriv(0) == 0.0);
  CHECK(t[1].deriv(1) == 1.0);
  CHECK(t[2].deriv(0) == 0.0);
  CHECK(t[2].deriv(1) == 0.0);
  CHECK(t[3].deriv(0) == 0.0);
  CHECK(t[3].deriv(1) == 0.0);
  // unseeded entries are constants, the sparse-seed fast path
  CHECK(t[2].is_constant());
  CHECK(t[3].is_constant());

  auto t1 = lift(vals, SeedMatrix::dof_block(2, 2, 1));
  CHECK(t1[0].is_constant());
  CHECK(t1[2].deriv(0) == 1.0);
  CHECK(t1[3].deriv(1) == 1.0);
}

TEST_CASE("lift with zero seed gives constants") {
  const double vals[] = {7.0};
  auto t = lift(vals, SeedMatrix::zero(1, 1));
  CHECK(t[0].value() == 7.0);
  CHECK(t[0].deriv(0) == 0.0);
}

TEST_CASE("lift dimension mismatch") {
  const double vals[] = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS((void)lift(vals, SeedMatrix::identity(2)), Error);
}

TEST_CASE("arithmetic: product rule") {
  const Tangent a = seeded2(3.0, 1.0, 0.0);
  const Tangent b = seeded2(2.0, 0.0, 1.0);
  const Tangent c = a * b;
  CHECK(c.value() == 6.0);
  CHECK(c.deriv(0) == 2.0);
  CHECK(c.deriv(1) == 3.0);
}

TEST_CASE("arithmetic: subtraction to exact zero") {
  const Tangent a = seeded1(5.0, 2.0);
  const Tangent c = a - a;
  CHECK(c.value() == 0.0);
  CHECK(c.deriv(0) == 0.0);
}

TEST_CASE("arithmetic: quotient rule") {
  const Tangent a = seeded1(1.0, 1.0);
  const Tangent b(2.0, DerivVec::zeros(1));
  const Tangent c = a / b;
  CHECK(c.value() == 0.5);
  CHECK(c.deriv(0) == 0.5);
}

TEST_CASE("division by zero value is a domain error") {
  const Tangent a = seeded1(1.0, 1.0);
  const Tangent z = seeded1(0.0, 1.0);
  CHECK_THROWS_AS((void)(a / z), Error);
  CHECK_THROWS_AS((void)(1.0 / z), Error);
  try {
    (void)(a / z);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain_error);
  }
}

TEST_CASE("mixed direction counts are rejected") {
  const Tangent a = seeded1(1.0, 1.0);
  const Tangent b = seeded2(1.0, 1.0, 0.0);
  CHECK_THROWS_AS((void)(a + b), Error);
  CHECK_THROWS_AS((void)(a * b), Error);
}

TEST_CASE("elementary functions") {
  const Tangent e = exp(seeded1(0.0, 1.0));
  CHECK(e.value() == 1.0);
  CHECK(e.deriv(0) == 1.0);

  const Tangent s = sqrt(seeded1(4.0, 2.0));
  CHECK(s.value() == 2.0);
  CHECK(s.deriv(0) == doctest::Approx(0.5).epsilon(1e-15));

  const Tangent sh = sinh(seeded1(0.0, 3.0));
  CHECK(sh.value() == 0.0);
  CHECK(sh.deriv(0) == 3.0);

  const Tangent l = log(seeded1(2.0, 1.0));
  CHECK(l.value() == doctest::Approx(std::log(2.0)));
  CHECK(l.deriv(0) == doctest::Approx(0.5));

  const Tangent ch = cosh(seeded1(0.0, 3.0));
  CHECK(ch.value() == 1.0);
  CHECK(ch.deriv(0) == 0.0);
}

TEST_CASE("sqrt at zero") {
  // nonzero direction: singular derivative must not leak out as infinity
  CHECK_THROWS_AS((void)sqrt(seeded1(0.0, 1.0)), Error);
  // zero direction: well-defined
  const Tangent ok = sqrt(Tangent(0.0, DerivVec::zeros(2)));
  CHECK(ok.value() == 0.0);
  CHECK(ok.deriv(0) == 0.0);
  CHECK_THROWS_AS((void)sqrt(seeded1(-1.0, 0.0)), Error);
  CHECK_THROWS_AS((void)log(seeded1(0.0, 1.0)), Error);
}

TEST_CASE("abs and the nonsmooth counter") {
  NonsmoothLog log;
  {
    NonsmoothScope scope(log);
    const Tangent p = abs(seeded1(2.0, 3.0));
    CHECK(p.value() == 2.0);
    CHECK(p.deriv(0) == 3.0);
    const Tangent n = abs(seeded1(-2.0, 3.0));
    CHECK(n.value() == 2.0);
    CHECK(n.deriv(0) == -3.0);
    CHECK(log.kinks == 0);
    const Tangent z = abs(seeded1(0.0, 3.0));
    CHECK(z.value() == 0.0);
    CHECK(z.deriv(0) == 0.0);  // subgradient 0
    CHECK(log.kinks == 1);
  }
}

TEST_CASE("branch_max / branch_min") {
  NonsmoothLog log;
  NonsmoothScope scope(log);

  const Tangent a = seeded1(2.0, 1.0);
  const Tangent b = seeded1(3.0, 0.0);
  const Tangent m = branch_max(a, b);
  CHECK(m.value() == 3.0);
  CHECK(m.deriv(0) == 0.0);
  CHECK(log.ties == 0);

  const Tangent t1 = seeded1(3.0, 1.0);
  const Tangent t2 = seeded1(3.0, 5.0);
  const Tangent t = branch_max(t1, t2);
  CHECK(t.value() == 3.0);
  CHECK(t.deriv(0) == 1.0);  // tie goes to the first argument
  CHECK(log.ties == 1);

  const Tangent mn = branch_min(seeded1(-1.0, 2.0), seeded1(0.0, 9.0));
  CHECK(mn.value() == -1.0);
  CHECK(mn.deriv(0) == 2.0);
  CHECK(log.ties == 1);
}

TEST_CASE("nonsmooth counter is per-scope") {
  NonsmoothLog outer, inner;
  NonsmoothScope so(outer);
  (void)abs(seeded1(0.0, 1.0));
  {
    NonsmoothScope si(inner);
    (void)abs(seeded1(0.0, 1.0));
    (void)abs(seeded1(0.0, 1.0));
  }
  (void)abs(seeded1(0.0, 1.0));
  CHECK(outer.kinks == 2);
  CHECK(inner.kinks == 2);
}

TEST_CASE("constant subexpressions contribute bit-exact zeros") {
  const Tangent x = seeded1(1.7, 1.0);
  const Tangent c = Tangent(2.0) * Tangent(3.0) - Tangent(6.0);
  CHECK(c.is_constant());
  const Tangent y = x + c;
  CHECK(y.deriv(0) == x.deriv(0));
  const Tangent z = x * (exp(Tangent(0.0)) - 1.0);
  CHECK(z.value() == 0.0);
  CHECK(z.is_constant() == false);
  CHECK(z.deriv(0) == 0.0);
}

namespace {

// A fixed smooth composite used by the derivative property tests.
template <class T>
std::vector<T> smooth_fn(std::span<const T> x) {
  using std::cosh;
  using std::exp;
  using std::log;
  using std::sinh;
  using std::sqrt;
  std::vector<T> out;
  out.push_back(exp(x[0] * 0.3) * sinh(x[1]) + x[2] / (cosh(x[3]) + 2.0));
  out.push_back(sqrt(x[0] * x[0] + x[1] * x[1] + 1.0) * log(x[2] * x[2] + 2.0));
  out.push_back(x[0] * x[1] * x[2] * x[3] - x[3] / (x[0] * x[0] + 0.5));
  return out;
}

std::vector<std::vector<double>> full_jacobian_identity(std::span<const double> x) {
  auto lifted = lift(x, SeedMatrix::identity(x.size()));
  auto y = smooth_fn(std::span<const Tangent>(lifted));
  std::vector<std::vector<double>> jac(y.size(), std::vector<double>(x.size()));
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) jac[i][j] = y[i].deriv(j);
  return jac;
}

}  // namespace

TEST_CASE("derivatives match central finite differences on random inputs") {
  oracles::Rng rng(20240817);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-1.5, 1.5);
    auto jac = full_jacobian_identity(x);
    auto f = [](const std::vector<double>& in) {
      return smooth_fn(std::span<const double>(in));
    };
    for (std::size_t j = 0; j < 4; ++j) {
      auto col = oracles::central_diff(f, x, j, 1e-6 * (1.0 + std::abs(x[j])));
      for (std::size_t i = 0; i < col.size(); ++i) {
        const double scale = std::max({std::abs(col[i]), std::abs(jac[i][j]), 1e-8});
        CHECK(std::abs(col[i] - jac[i][j]) / scale <= 1e-6);
      }
    }
  }
}

TEST_CASE("Jacobian-times-seed contract: seeding with C' equals J * C'^T") {
  oracles::Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-1.2, 1.2);
    auto jac = full_jacobian_identity(x);

    const std::size_t p = 3;
    SeedMatrix c(p, 4);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < 4; ++j) c(i, j) = rng.uniform(-2.0, 2.0);

    auto lifted = lift(x, c);
    auto y = smooth_fn(std::span<const Tangent>(lifted));
    for (std::size_t i = 0; i < y.size(); ++i) {
      for (std::size_t d = 0; d < p; ++d) {
        double want = 0.0;
        for (std::size_t j = 0; j < 4; ++j) want += jac[i][j] * c(d, j);
        const double scale = std::max(std::abs(want), 1.0);
        CHECK(std::abs(y[i].deriv(d) - want) / scale <= 1e-13);
      }
    }
  }
}

TEST_CASE("derivative vectors spill to the heap beyond the inline buffer") {
  const std::size_t p = 100;  // force the chunk-free path too
  std::vector<double> x(4, 0.5);
  SeedMatrix c(p, 4);
  for (std::size_t i = 0; i < p; ++i) c(i, i % 4) = 1.0;
  auto lifted = lift(x, c);
  auto y = smooth_fn(std::span<const Tangent>(lifted));
  CHECK(y[0].dim() == p);
  // direction i seeds input i%4, so deriv(i) must equal the Jacobian column
  auto jac = full_jacobian_identity(x);
  for (std::size_t i = 0; i < p; ++i)
    CHECK(y[2].deriv(i) == doctest::Approx(jac[2][i % 4]).epsilon(1e-12));
}
