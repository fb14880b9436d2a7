#pragma once

#include <span>
#include <vector>

#include "tanfem/bsr.hpp"

namespace tanfem {

struct GmresConfig {
  int restart = 50;
  double tol = 1e-10;  // relative to ||b||
  int max_iters = 2000;
};

struct GmresResult {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Unpreconditioned restarted GMRES. Throws linear_breakdown when a full
// restart cycle produces no residual reduction, or when max_iters is hit
// without reaching the tolerance.
GmresResult gmres_solve(const BsrMatrix& a, std::span<const double> b,
                        std::span<double> x, const GmresConfig& cfg = {});

// Partial-pivoting dense LU solve; `a` is consumed. Throws singular_matrix on
// a vanishing pivot. The dimension cap keeps desk-scale misuse loud.
void dense_lu_solve(std::vector<double> a, int n, std::span<const double> b,
                    std::span<double> x, int dim_cap = 5000);

void dense_lu_solve(const BsrMatrix& a, std::span<const double> b,
                    std::span<double> x, int dim_cap = 5000);

}  // namespace tanfem
