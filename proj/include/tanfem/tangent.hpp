#pragma once

// Vector forward-mode AD scalar: a value plus p simultaneous directional
// derivatives, p fixed at runtime per computation. Constants carry an empty
// derivative vector and skip all derivative work, which is what makes sparse
// (DOF-blocked) seeding cheap.

#include <cmath>
#include <cstddef>
#include <cstring>
#include <ostream>
#include <span>
#include <vector>

#include "tanfem/errors.hpp"

namespace tanfem {

namespace detail {

// Fixed-size chunk freelist for derivative vectors that do not fit inline.
// Chunks are recycled per thread; anything larger than a chunk falls back to
// plain new[].
inline constexpr std::size_t kChunkDoubles = 40;

struct ChunkPool {
  std::vector<double*> free;
  ~ChunkPool() {
    for (double* p : free) delete[] p;
  }
  double* acquire() {
    if (!free.empty()) {
      double* p = free.back();
      free.pop_back();
      return p;
    }
    return new double[kChunkDoubles];
  }
  void release(double* p) { free.push_back(p); }
};

inline ChunkPool& chunk_pool() {
  thread_local ChunkPool pool;
  return pool;
}

}  // namespace detail

// Small-buffer derivative vector. Up to 8 directions live inline in lanes
// padded with zeros to a multiple of 4, so the element-wise loops run without
// scalar tails and copies are a fixed 64 bytes; the padding lanes always hold
// finite values and all loop kernels are linear, so they never leak into the
// payload.
class DerivVec {
  static constexpr std::size_t kInline = 8;

 public:
  DerivVec() = default;

  static DerivVec zeros(std::size_t n) {
    DerivVec d(n, uninit_tag{});
    std::memset(d.data(), 0, (d.heap_ ? n : kInline) * sizeof(double));
    return d;
  }
  static DerivVec uninitialized(std::size_t n) { return DerivVec(n, uninit_tag{}); }
  static DerivVec unit(std::size_t n, std::size_t dir) {
    DerivVec d = zeros(n);
    d[dir] = 1.0;
    return d;
  }
  static DerivVec from(std::span<const double> v) {
    DerivVec d = zeros(v.size());
    std::memcpy(d.data(), v.data(), v.size() * sizeof(double));
    return d;
  }

  DerivVec(const DerivVec& o) : size_(o.size_) {
    if (o.heap_) {
      heap_ = alloc(size_);
      std::memcpy(heap_, o.heap_, size_ * sizeof(double));
    } else if (size_ > 0) {
      std::memcpy(buf_, o.buf_, kInline * sizeof(double));
    }
  }
  DerivVec(DerivVec&& o) noexcept : size_(o.size_) {
    if (o.heap_) {
      heap_ = o.heap_;
      o.heap_ = nullptr;
      o.size_ = 0;
    } else if (size_ > 0) {
      std::memcpy(buf_, o.buf_, kInline * sizeof(double));
    }
  }
  DerivVec& operator=(const DerivVec& o) {
    if (this != &o) {
      if (o.heap_) {
        if (!heap_ || heap_len(size_) != heap_len(o.size_)) {
          dealloc();
          heap_ = alloc(o.size_);
        }
        std::memcpy(heap_, o.heap_, o.size_ * sizeof(double));
      } else {
        dealloc();
        if (o.size_ > 0) std::memcpy(buf_, o.buf_, kInline * sizeof(double));
      }
      size_ = o.size_;
    }
    return *this;
  }
  DerivVec& operator=(DerivVec&& o) noexcept {
    if (this != &o) {
      dealloc();
      size_ = o.size_;
      if (o.heap_) {
        heap_ = o.heap_;
        o.heap_ = nullptr;
        o.size_ = 0;
      } else if (size_ > 0) {
        std::memcpy(buf_, o.buf_, kInline * sizeof(double));
      }
    }
    return *this;
  }
  ~DerivVec() { dealloc(); }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  double* data() { return heap_ ? heap_ : buf_; }
  const double* data() const { return heap_ ? heap_ : buf_; }
  double operator[](std::size_t i) const { return data()[i]; }
  double& operator[](std::size_t i) { return data()[i]; }
  std::span<const double> span() const { return {data(), size_}; }

  // number of lanes the element-wise kernels process
  std::size_t loop_len() const {
    return heap_ ? size_ : (size_ <= 4 ? 4 : kInline);
  }
  bool on_heap() const { return heap_ != nullptr; }

 private:
  struct uninit_tag {};
  DerivVec(std::size_t n, uninit_tag) : size_(n) {
    if (n > kInline) {
      heap_ = alloc(n);
    } else {
      // keep every inline lane defined; [loop_len, 8) must be zero
      for (std::size_t i = n; i < kInline; ++i) buf_[i] = 0.0;
    }
  }
  static std::size_t heap_len(std::size_t n) {
    return n <= detail::kChunkDoubles ? detail::kChunkDoubles : n;
  }
  static double* alloc(std::size_t n) {
    return n <= detail::kChunkDoubles ? detail::chunk_pool().acquire()
                                      : new double[n];
  }
  void dealloc() {
    if (heap_) {
      if (size_ <= detail::kChunkDoubles)
        detail::chunk_pool().release(heap_);
      else
        delete[] heap_;
      heap_ = nullptr;
    }
  }

  double* heap_ = nullptr;
  std::size_t size_ = 0;
  alignas(32) double buf_[kInline];
};

// Per-evaluation diagnostics for nonsmooth points (abs at 0, max/min ties).
struct NonsmoothLog {
  unsigned long ties = 0;
  unsigned long kinks = 0;
  unsigned long total() const { return ties + kinks; }
};

namespace detail {
inline thread_local NonsmoothLog* g_nonsmooth = nullptr;
}

// Installs a log for the current thread for the lifetime of the scope.
class NonsmoothScope {
 public:
  explicit NonsmoothScope(NonsmoothLog& log) : prev_(detail::g_nonsmooth) {
    detail::g_nonsmooth = &log;
  }
  ~NonsmoothScope() { detail::g_nonsmooth = prev_; }
  NonsmoothScope(const NonsmoothScope&) = delete;
  NonsmoothScope& operator=(const NonsmoothScope&) = delete;

 private:
  NonsmoothLog* prev_;
};

namespace detail {
inline void note_tie() {
  if (g_nonsmooth) ++g_nonsmooth->ties;
}
inline void note_kink() {
  if (g_nonsmooth) ++g_nonsmooth->kinks;
}
}  // namespace detail

class Tangent {
 public:
  Tangent() = default;
  Tangent(double v) : val_(v) {}  // constants convert implicitly
  Tangent(double v, DerivVec d) : val_(v), der_(std::move(d)) {}

  static Tangent seeded(double v, std::size_t p, std::size_t dir) {
    return Tangent(v, DerivVec::unit(p, dir));
  }
  static Tangent constant(double v) { return Tangent(v); }

  double value() const { return val_; }
  bool is_constant() const { return der_.empty(); }
  std::size_t dim() const { return der_.size(); }
  // Reads as zero for constants, whatever the ambient direction count.
  double deriv(std::size_t i) const { return der_.empty() ? 0.0 : der_[i]; }
  const DerivVec& derivatives() const { return der_; }

  Tangent& operator+=(const Tangent& o);
  Tangent& operator-=(const Tangent& o);
  Tangent& operator*=(const Tangent& o);
  Tangent& operator/=(const Tangent& o);
  Tangent& operator+=(double c) { val_ += c; return *this; }
  Tangent& operator-=(double c) { val_ -= c; return *this; }
  Tangent& operator*=(double c);
  Tangent& operator/=(double c);

 private:
  friend void fmadd(Tangent&, const Tangent&, const Tangent&);
  friend void fmadd(Tangent&, const Tangent&, double);

  double val_ = 0.0;
  DerivVec der_;
};

inline double value_of(double x) { return x; }
inline double value_of(const Tangent& x) { return x.value(); }

namespace detail {

[[noreturn]] inline void mixed_dims(std::size_t a, std::size_t b) {
  raise(ErrorCode::dimension_mismatch,
        "tangent direction counts differ: " + std::to_string(a) + " vs " +
            std::to_string(b));
}

inline void check_dims(const Tangent& a, const Tangent& b) {
  if (!a.is_constant() && !b.is_constant() && a.dim() != b.dim())
    mixed_dims(a.dim(), b.dim());
}

// Runs the lane body with a compile-time trip count for the inline sizes, so
// the common small cases become straight vector code.
template <class Body>
inline void for_lanes(const DerivVec& shape, Body&& body) {
  if (!shape.on_heap()) {
    if (shape.size() <= 4) {
      for (std::size_t i = 0; i < 4; ++i) body(i);
    } else {
      for (std::size_t i = 0; i < 8; ++i) body(i);
    }
    return;
  }
  const std::size_t n = shape.size();
  for (std::size_t i = 0; i < n; ++i) body(i);
}

// r[i] = ca*a[i] + cb*b[i]; operands verified same-size.
inline DerivVec combine(const DerivVec& a, double ca, const DerivVec& b, double cb) {
  DerivVec r = DerivVec::uninitialized(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  double* pr = r.data();
  for_lanes(a, [&](std::size_t i) { pr[i] = ca * pa[i] + cb * pb[i]; });
  return r;
}

inline DerivVec scaled(const DerivVec& a, double c) {
  DerivVec r = DerivVec::uninitialized(a.size());
  const double* pa = a.data();
  double* pr = r.data();
  for_lanes(a, [&](std::size_t i) { pr[i] = c * pa[i]; });
  return r;
}

}  // namespace detail

// -- arithmetic ---------------------------------------------------------------

inline Tangent operator+(const Tangent& a, const Tangent& b) {
  detail::check_dims(a, b);
  const double v = a.value() + b.value();
  if (a.is_constant()) {
    if (b.is_constant()) return Tangent(v);
    return Tangent(v, b.derivatives());
  }
  if (b.is_constant()) return Tangent(v, a.derivatives());
  return Tangent(v, detail::combine(a.derivatives(), 1.0, b.derivatives(), 1.0));
}

inline Tangent operator-(const Tangent& a, const Tangent& b) {
  detail::check_dims(a, b);
  const double v = a.value() - b.value();
  if (a.is_constant()) {
    if (b.is_constant()) return Tangent(v);
    return Tangent(v, detail::scaled(b.derivatives(), -1.0));
  }
  if (b.is_constant()) return Tangent(v, a.derivatives());
  return Tangent(v, detail::combine(a.derivatives(), 1.0, b.derivatives(), -1.0));
}

inline Tangent operator*(const Tangent& a, const Tangent& b) {
  detail::check_dims(a, b);
  const double v = a.value() * b.value();
  if (a.is_constant()) {
    if (b.is_constant()) return Tangent(v);
    return Tangent(v, detail::scaled(b.derivatives(), a.value()));
  }
  if (b.is_constant()) return Tangent(v, detail::scaled(a.derivatives(), b.value()));
  return Tangent(v, detail::combine(a.derivatives(), b.value(),
                                    b.derivatives(), a.value()));
}

inline Tangent operator/(const Tangent& a, const Tangent& b) {
  detail::check_dims(a, b);
  if (b.value() == 0.0)
    raise(ErrorCode::domain_error, "tangent division by zero value");
  const double v = a.value() / b.value();
  const double ib = 1.0 / b.value();
  if (b.is_constant()) {
    if (a.is_constant()) return Tangent(v);
    return Tangent(v, detail::scaled(a.derivatives(), ib));
  }
  if (a.is_constant())
    return Tangent(v, detail::scaled(b.derivatives(), -v * ib));
  return Tangent(v, detail::combine(a.derivatives(), ib, b.derivatives(), -v * ib));
}

inline Tangent operator-(const Tangent& a) {
  if (a.is_constant()) return Tangent(-a.value());
  return Tangent(-a.value(), detail::scaled(a.derivatives(), -1.0));
}
inline const Tangent& operator+(const Tangent& a) { return a; }

inline Tangent operator+(const Tangent& a, double c) {
  return Tangent(a.value() + c, a.derivatives());
}
inline Tangent operator+(double c, const Tangent& a) {
  return Tangent(c + a.value(), a.derivatives());
}
inline Tangent operator-(const Tangent& a, double c) {
  return Tangent(a.value() - c, a.derivatives());
}
inline Tangent operator-(double c, const Tangent& a) {
  if (a.is_constant()) return Tangent(c - a.value());
  return Tangent(c - a.value(), detail::scaled(a.derivatives(), -1.0));
}
inline Tangent operator*(const Tangent& a, double c) {
  if (a.is_constant()) return Tangent(a.value() * c);
  return Tangent(a.value() * c, detail::scaled(a.derivatives(), c));
}
inline Tangent operator*(double c, const Tangent& a) {
  if (a.is_constant()) return Tangent(c * a.value());
  return Tangent(c * a.value(), detail::scaled(a.derivatives(), c));
}
inline Tangent operator/(const Tangent& a, double c) {
  if (c == 0.0) raise(ErrorCode::domain_error, "tangent division by zero value");
  if (a.is_constant()) return Tangent(a.value() / c);
  return Tangent(a.value() / c, detail::scaled(a.derivatives(), 1.0 / c));
}
inline Tangent operator/(double c, const Tangent& a) {
  if (a.value() == 0.0)
    raise(ErrorCode::domain_error, "tangent division by zero value");
  const double v = c / a.value();
  if (a.is_constant()) return Tangent(v);
  return Tangent(v, detail::scaled(a.derivatives(), -v / a.value()));
}

// Compound ops update the derivative buffer in place; temporaries only appear
// when a constant grows a derivative.
inline Tangent& Tangent::operator+=(const Tangent& o) {
  detail::check_dims(*this, o);
  val_ += o.value();
  if (o.is_constant()) return *this;
  if (is_constant()) {
    der_ = o.derivatives();
    return *this;
  }
  double* pa = der_.data();
  const double* pb = o.derivatives().data();
  const std::size_t n = der_.loop_len();
  for (std::size_t i = 0; i < n; ++i) pa[i] += pb[i];
  return *this;
}

inline Tangent& Tangent::operator-=(const Tangent& o) {
  detail::check_dims(*this, o);
  val_ -= o.value();
  if (o.is_constant()) return *this;
  if (is_constant()) {
    der_ = detail::scaled(o.derivatives(), -1.0);
    return *this;
  }
  double* pa = der_.data();
  const double* pb = o.derivatives().data();
  const std::size_t n = der_.loop_len();
  for (std::size_t i = 0; i < n; ++i) pa[i] -= pb[i];
  return *this;
}

inline Tangent& Tangent::operator*=(const Tangent& o) {
  detail::check_dims(*this, o);
  if (o.is_constant()) {
    const double c = o.value();
    val_ *= c;
    double* pa = der_.data();
    const std::size_t n = der_.loop_len();
    for (std::size_t i = 0; i < n; ++i) pa[i] *= c;
    return *this;
  }
  if (is_constant()) {
    der_ = detail::scaled(o.derivatives(), val_);
    val_ *= o.value();
    return *this;
  }
  double* pa = der_.data();
  const double* pb = o.derivatives().data();
  const std::size_t n = der_.loop_len();
  const double av = val_, bv = o.value();
  for (std::size_t i = 0; i < n; ++i) pa[i] = pa[i] * bv + av * pb[i];
  val_ = av * bv;
  return *this;
}

inline Tangent& Tangent::operator/=(const Tangent& o) { return *this = *this / o; }

inline Tangent& Tangent::operator*=(double c) {
  val_ *= c;
  double* pa = der_.data();
  const std::size_t n = der_.loop_len();
  for (std::size_t i = 0; i < n; ++i) pa[i] *= c;
  return *this;
}

inline Tangent& Tangent::operator/=(double c) {
  if (c == 0.0) raise(ErrorCode::domain_error, "tangent division by zero value");
  val_ /= c;
  const double ic = 1.0 / c;
  double* pa = der_.data();
  const std::size_t n = der_.loop_len();
  for (std::size_t i = 0; i < n; ++i) pa[i] *= ic;
  return *this;
}

// acc += a * b without a temporary; safe when acc aliases a or b (derivatives
// are folded in before the value changes). The double overload keeps the
// value-path operation sequence identical across instantiations.
inline void fmadd(double& acc, double a, double b) { acc += a * b; }

inline void fmadd(Tangent& acc, const Tangent& a, const Tangent& b) {
  detail::check_dims(a, b);
  const double av = a.value(), bv = b.value();
  if (!a.is_constant() || !b.is_constant()) {
    detail::check_dims(acc, a);
    detail::check_dims(acc, b);
    const std::size_t sz = a.is_constant() ? b.dim() : a.dim();
    if (acc.is_constant()) acc.der_ = DerivVec::zeros(sz);
    double* pc = acc.der_.data();
    const std::size_t n = acc.der_.loop_len();
    if (b.is_constant()) {
      const double* pa = a.derivatives().data();
      for (std::size_t i = 0; i < n; ++i) pc[i] += pa[i] * bv;
    } else if (a.is_constant()) {
      const double* pb = b.derivatives().data();
      for (std::size_t i = 0; i < n; ++i) pc[i] += av * pb[i];
    } else {
      const double* pa = a.derivatives().data();
      const double* pb = b.derivatives().data();
      for (std::size_t i = 0; i < n; ++i) pc[i] += pa[i] * bv + av * pb[i];
    }
  }
  acc.val_ += av * bv;
}

// acc += a * c for a plain scalar c.
inline void fmadd(Tangent& acc, const Tangent& a, double c) {
  if (!a.is_constant()) {
    detail::check_dims(acc, a);
    if (acc.is_constant()) acc.der_ = DerivVec::zeros(a.dim());
    double* pc = acc.der_.data();
    const double* pa = a.derivatives().data();
    const std::size_t n = acc.der_.loop_len();
    for (std::size_t i = 0; i < n; ++i) pc[i] += pa[i] * c;
  }
  acc.val_ += a.value() * c;
}

inline void add_scaled(double& acc, const double& a, double c) { acc += a * c; }
inline void add_scaled(Tangent& acc, const Tangent& a, double c) {
  fmadd(acc, a, c);
}

// -- elementary functions -----------------------------------------------------

namespace detail {
inline Tangent chain(double fv, double fp, const Tangent& a) {
  if (a.is_constant()) return Tangent(fv);
  return Tangent(fv, scaled(a.derivatives(), fp));
}
}  // namespace detail

inline Tangent exp(const Tangent& a) {
  const double e = std::exp(a.value());
  return detail::chain(e, e, a);
}

inline Tangent log(const Tangent& a) {
  if (!(a.value() > 0.0))
    raise(ErrorCode::domain_error, "log of non-positive tangent value");
  return detail::chain(std::log(a.value()), 1.0 / a.value(), a);
}

inline Tangent sqrt(const Tangent& a) {
  if (a.value() < 0.0)
    raise(ErrorCode::domain_error, "sqrt of negative tangent value");
  if (a.value() == 0.0) {
    for (std::size_t i = 0; i < a.dim(); ++i)
      if (a.deriv(i) != 0.0)
        raise(ErrorCode::domain_error,
              "sqrt derivative singularity at zero (nonzero direction)");
    return a.is_constant() ? Tangent(0.0) : Tangent(0.0, DerivVec::zeros(a.dim()));
  }
  const double s = std::sqrt(a.value());
  return detail::chain(s, 0.5 / s, a);
}

inline Tangent sinh(const Tangent& a) {
  return detail::chain(std::sinh(a.value()), std::cosh(a.value()), a);
}

inline Tangent cosh(const Tangent& a) {
  return detail::chain(std::cosh(a.value()), std::sinh(a.value()), a);
}

inline Tangent abs(const Tangent& a) {
  if (a.value() > 0.0) return a;
  if (a.value() < 0.0) return -a;
  detail::note_kink();  // subgradient 0 at the kink
  return a.is_constant() ? Tangent(0.0) : Tangent(0.0, DerivVec::zeros(a.dim()));
}

// Branch selection: the winning argument's derivative travels on, ties take
// the first argument and are counted.
inline const Tangent& branch_max(const Tangent& a, const Tangent& b) {
  detail::check_dims(a, b);
  if (a.value() == b.value()) {
    detail::note_tie();
    return a;
  }
  return a.value() > b.value() ? a : b;
}

inline const Tangent& branch_min(const Tangent& a, const Tangent& b) {
  detail::check_dims(a, b);
  if (a.value() == b.value()) {
    detail::note_tie();
    return a;
  }
  return a.value() < b.value() ? a : b;
}

inline std::ostream& operator<<(std::ostream& os, const Tangent& t) {
  os << "(" << t.value() << ";[";
  for (std::size_t i = 0; i < t.dim(); ++i) os << (i ? "," : "") << t.deriv(i);
  return os << "])";
}

// -- seeding ------------------------------------------------------------------

// Input-sensitivity matrix C (p directions x n inputs). Column j seeds input j.
class SeedMatrix {
 public:
  SeedMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), c_(rows * cols, 0.0) {}

  static SeedMatrix identity(std::size_t n) {
    SeedMatrix s(n, n);
    for (std::size_t i = 0; i < n; ++i) s.c_[i * n + i] = 1.0;
    return s;
  }

  static SeedMatrix zero(std::size_t rows, std::size_t cols) {
    return SeedMatrix(rows, cols);
  }

  // p = nen directions; the nen x nen identity sits in the columns of block k
  // of the DOF-major layout [block 0 | block 1 | ... | block ndf-1].
  static SeedMatrix dof_block(std::size_t ndf, std::size_t nen, std::size_t block) {
    if (block >= ndf)
      raise(ErrorCode::invalid_argument, "seed block index out of range");
    SeedMatrix s(nen, ndf * nen);
    for (std::size_t i = 0; i < nen; ++i) s.c_[i * s.cols_ + block * nen + i] = 1.0;
    return s;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return c_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return c_[i * cols_ + j]; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> c_;
};

// Lifts plain values into tangents; entry j gets column j of the seed as its
// derivative. All-zero columns lift to constants.
inline std::vector<Tangent> lift(std::span<const double> values, const SeedMatrix& seed) {
  if (seed.cols() != values.size())
    raise(ErrorCode::dimension_mismatch,
          "seed has " + std::to_string(seed.cols()) + " columns for " +
              std::to_string(values.size()) + " values");
  const std::size_t p = seed.rows();
  std::vector<Tangent> out;
  out.reserve(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    bool all_zero = true;
    for (std::size_t i = 0; i < p; ++i)
      if (seed(i, j) != 0.0) {
        all_zero = false;
        break;
      }
    if (all_zero) {
      out.emplace_back(values[j]);
      continue;
    }
    DerivVec d = DerivVec::zeros(p);
    for (std::size_t i = 0; i < p; ++i) d[i] = seed(i, j);
    out.emplace_back(values[j], std::move(d));
  }
  return out;
}

}  // namespace tanfem
