#pragma once

#include <span>
#include <vector>

#include "tanfem/bsr.hpp"
#include "tanfem/linear.hpp"

namespace tanfem {

struct LinearSolverConfig {
  enum class Kind { gmres, dense_lu };
  Kind kind = Kind::gmres;
  GmresConfig gmres;
  int lu_dim_cap = 5000;
};

struct NewtonConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_iters = 25;
  LinearSolverConfig linear;
};

struct IterRecord {
  double residual_norm = 0;  // ||F(u^k)|| before the step
  int linear_iters = 0;
  double assembly_s = 0;
  double solve_s = 0;
  double wall_s = 0;
};

struct NewtonHistory {
  std::vector<IterRecord> iters;  // one per assembled residual, final included
  bool converged = false;
  double final_residual = 0;
  int steps() const {
    return static_cast<int>(iters.size()) - (converged ? 1 : 0);
  }
};

// The assembled problem Newton drives: b must come back as -F(u) with any
// boundary conditions already applied (increment convention).
class NonlinearSystem {
 public:
  virtual ~NonlinearSystem() = default;
  virtual int size() const = 0;
  virtual BsrMatrix make_matrix() const = 0;
  virtual void assemble(std::span<const double> u, BsrMatrix& a,
                        std::vector<double>& b) = 0;
};

// Plain Newton (no globalization): u <- u + delta with A delta = -F. Stops on
// ||F|| <= abs_tol or ||F|| <= rel_tol * ||F(u0)||. Non-convergence within
// max_iters is reported via the history, not thrown.
NewtonHistory newton_solve(NonlinearSystem& sys, std::vector<double>& u,
                           const NewtonConfig& cfg = {});

}  // namespace tanfem
