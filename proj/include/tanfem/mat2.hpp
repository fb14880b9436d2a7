#pragma once

// 2x2 matrix algebra, generic over the scalar type so tangents flow through.
// Sym2 stores the symmetric part only; general products go through Mat2.

#include <cmath>

#include "tanfem/errors.hpp"
#include "tanfem/tangent.hpp"

namespace tanfem {

template <class T>
struct Mat2 {
  T a11{}, a12{}, a21{}, a22{};

  static Mat2 identity() { return {T(1.0), T(0.0), T(0.0), T(1.0)}; }
};

// Symmetric 2x2: [[m11, m12], [m12, m22]]. Symmetry is structural.
template <class T>
struct Sym2 {
  T m11{}, m12{}, m22{};

  static Sym2 identity() { return {T(1.0), T(0.0), T(1.0)}; }
  static Sym2 zero() { return {T(0.0), T(0.0), T(0.0)}; }
};

template <class T>
T gamma(const Sym2<T>& m) {
  return (m.m11 - m.m22) * 0.5;
}

template <class T>
T trace(const Sym2<T>& m) {
  return m.m11 + m.m22;
}

template <class T>
T det2(const Sym2<T>& m) {
  return m.m11 * m.m22 - m.m12 * m.m12;
}

template <class T>
T det2(const Mat2<T>& m) {
  return m.a11 * m.a22 - m.a12 * m.a21;
}

template <class T>
Mat2<T> to_mat(const Sym2<T>& m) {
  return {m.m11, m.m12, m.m12, m.m22};
}

// Entries taken from the upper triangle; for products of commuting symmetric
// operands the result is symmetric to the bit.
template <class T>
Sym2<T> sym_part(const Mat2<T>& m) {
  return {m.a11, m.a12, m.a22};
}

template <class T>
Sym2<T> operator+(const Sym2<T>& a, const Sym2<T>& b) {
  return {a.m11 + b.m11, a.m12 + b.m12, a.m22 + b.m22};
}
template <class T>
Sym2<T> operator-(const Sym2<T>& a, const Sym2<T>& b) {
  return {a.m11 - b.m11, a.m12 - b.m12, a.m22 - b.m22};
}
template <class T, class S>
Sym2<T> operator*(const Sym2<T>& a, const S& c) {
  return {a.m11 * c, a.m12 * c, a.m22 * c};
}
template <class T>
Sym2<T> operator*(double c, const Sym2<T>& a) {
  return {c * a.m11, c * a.m12, c * a.m22};
}
template <class T>
Sym2<T> operator-(const Sym2<T>& a) {
  return {-a.m11, -a.m12, -a.m22};
}

template <class T>
Mat2<T> operator+(const Mat2<T>& a, const Mat2<T>& b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
template <class T>
Mat2<T> operator-(const Mat2<T>& a, const Mat2<T>& b) {
  return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}
template <class T, class S>
Mat2<T> operator*(const Mat2<T>& a, const S& c) {
  return {a.a11 * c, a.a12 * c, a.a21 * c, a.a22 * c};
}

template <class T>
Mat2<T>& operator+=(Mat2<T>& a, const Mat2<T>& b) {
  a.a11 += b.a11;
  a.a12 += b.a12;
  a.a21 += b.a21;
  a.a22 += b.a22;
  return a;
}

template <class T>
void add_scaled(Mat2<T>& acc, const Mat2<T>& x, double c) {
  add_scaled(acc.a11, x.a11, c);
  add_scaled(acc.a12, x.a12, c);
  add_scaled(acc.a21, x.a21, c);
  add_scaled(acc.a22, x.a22, c);
}

template <class T>
Mat2<T> matmul2(const Mat2<T>& a, const Mat2<T>& b) {
  Mat2<T> r{a.a11 * b.a11, a.a11 * b.a12, a.a21 * b.a11, a.a21 * b.a12};
  fmadd(r.a11, a.a12, b.a21);
  fmadd(r.a12, a.a12, b.a22);
  fmadd(r.a21, a.a22, b.a21);
  fmadd(r.a22, a.a22, b.a22);
  return r;
}

template <class T>
Mat2<T> matmul2(const Sym2<T>& a, const Sym2<T>& b) {
  return matmul2(to_mat(a), to_mat(b));
}

template <class T>
Mat2<T> operator*(const Mat2<T>& a, const Mat2<T>& b) {
  return matmul2(a, b);
}

template <class T>
Mat2<T> matinv2(const Mat2<T>& m) {
  const T det = det2(m);
  if (std::abs(value_of(det)) < 1e-300)
    raise(ErrorCode::singular_matrix, "matinv2: singular 2x2 matrix");
  return {m.a22 / det, -m.a12 / det, -m.a21 / det, m.a11 / det};
}

template <class T>
Mat2<T> matinv2(const Sym2<T>& m) {
  return matinv2(to_mat(m));
}

// Max absolute row sum of the values (derivatives never feed the norm; it only
// steers branches, mirroring what differentiated branch code would do).
template <class T>
double infnorm2(const Mat2<T>& m) {
  const double r1 = std::abs(value_of(m.a11)) + std::abs(value_of(m.a12));
  const double r2 = std::abs(value_of(m.a21)) + std::abs(value_of(m.a22));
  return r1 > r2 ? r1 : r2;
}

template <class T>
double infnorm2(const Sym2<T>& m) {
  return infnorm2(to_mat(m));
}

}  // namespace tanfem
