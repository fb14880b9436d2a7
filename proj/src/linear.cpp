#include "tanfem/linear.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tanfem/errors.hpp"

namespace tanfem {

namespace {

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

GmresResult gmres_solve(const BsrMatrix& a, std::span<const double> b,
                        std::span<double> x, const GmresConfig& cfg) {
  const int n = a.dim();
  if (static_cast<int>(b.size()) != n || static_cast<int>(x.size()) != n)
    raise(ErrorCode::invalid_argument, "gmres: size mismatch");
  std::fill(x.begin(), x.end(), 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return {0, 0.0};

  const int m = std::max(1, cfg.restart);
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
  std::vector<double> h((m + 1) * m, 0.0);
  std::vector<double> cs(m), sn(m), g(m + 1), y(m), w(n);

  auto hij = [&](int i, int j) -> double& { return h[i * m + j]; };

  int total_iters = 0;
  double res = bnorm;
  double prev_cycle_res = res;

  while (total_iters < cfg.max_iters) {
    // r = b - A x
    a.matvec(x, w);
    for (int i = 0; i < n; ++i) v[0][i] = b[i] - w[i];
    double beta = norm2(v[0]);
    if (beta / bnorm <= cfg.tol) return {total_iters, beta / bnorm};
    for (int i = 0; i < n; ++i) v[0][i] /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && total_iters < cfg.max_iters; ++k, ++total_iters) {
      a.matvec(v[k], w);
      // modified Gram-Schmidt
      for (int i = 0; i <= k; ++i) {
        double dot = 0;
        for (int t = 0; t < n; ++t) dot += w[t] * v[i][t];
        hij(i, k) = dot;
        for (int t = 0; t < n; ++t) w[t] -= dot * v[i][t];
      }
      const double hnext = norm2(w);
      hij(k + 1, k) = hnext;
      if (hnext > 1e-300)
        for (int t = 0; t < n; ++t) v[k + 1][t] = w[t] / hnext;

      // apply stored Givens rotations, then make a new one
      for (int i = 0; i < k; ++i) {
        const double t1 = cs[i] * hij(i, k) + sn[i] * hij(i + 1, k);
        const double t2 = -sn[i] * hij(i, k) + cs[i] * hij(i + 1, k);
        hij(i, k) = t1;
        hij(i + 1, k) = t2;
      }
      const double denom = std::hypot(hij(k, k), hij(k + 1, k));
      if (denom < 1e-300) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = hij(k, k) / denom;
        sn[k] = hij(k + 1, k) / denom;
      }
      hij(k, k) = cs[k] * hij(k, k) + sn[k] * hij(k + 1, k);
      hij(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      res = std::abs(g[k + 1]);
      if (res / bnorm <= cfg.tol || hnext <= 1e-300) {
        ++k;
        ++total_iters;
        break;
      }
    }

    // back substitution on the k x k triangular system
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= hij(i, j) * y[j];
      y[i] = s / hij(i, i);
    }
    for (int i = 0; i < k; ++i)
      for (int t = 0; t < n; ++t) x[t] += y[i] * v[i][t];

    if (res / bnorm <= cfg.tol) return {total_iters, res / bnorm};

    if (res >= prev_cycle_res * (1.0 - 1e-12))
      raise(ErrorCode::linear_breakdown,
            "gmres stagnated over a restart cycle at relative residual " +
                std::to_string(res / bnorm));
    prev_cycle_res = res;
  }
  raise(ErrorCode::linear_breakdown,
        "gmres did not reach tol within " + std::to_string(cfg.max_iters) +
            " iterations (relative residual " + std::to_string(res / bnorm) + ")");
}

void dense_lu_solve(std::vector<double> a, int n, std::span<const double> b,
                    std::span<double> x, int dim_cap) {
  if (n > dim_cap)
    raise(ErrorCode::invalid_argument,
          "dense LU dimension " + std::to_string(n) + " exceeds cap " +
              std::to_string(dim_cap));
  if (static_cast<int>(a.size()) != n * n)
    raise(ErrorCode::invalid_argument, "dense LU: matrix size mismatch");

  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  const double pivot_tol = std::max(1e-300, 1e-14 * scale);

  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  auto at = [&](int i, int j) -> double& {
    return a[static_cast<std::size_t>(i) * n + j];
  };

  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(at(col, col));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(at(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best <= pivot_tol)
      raise(ErrorCode::singular_matrix,
            "dense LU: singular pivot at column " + std::to_string(col));
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(at(piv, j), at(col, j));
      std::swap(perm[piv], perm[col]);
    }
    const double d = 1.0 / at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = at(r, col) * d;
      at(r, col) = f;
      if (f == 0.0) continue;
      for (int j = col + 1; j < n; ++j) at(r, j) -= f * at(col, j);
    }
  }

  // forward/backward substitution
  for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
  for (int i = 1; i < n; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s -= at(i, j) * x[j];
    x[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= at(i, j) * x[j];
    x[i] = s / at(i, i);
  }
}

void dense_lu_solve(const BsrMatrix& a, std::span<const double> b,
                    std::span<double> x, int dim_cap) {
  dense_lu_solve(a.to_dense(), a.dim(), b, x, dim_cap);
}

}  // namespace tanfem
