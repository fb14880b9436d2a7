#pragma once

#include <span>
#include <vector>

#include "tanfem/bsr.hpp"
#include "tanfem/dofmap.hpp"
#include "tanfem/elements.hpp"
#include "tanfem/kernels.hpp"
#include "tanfem/mesh.hpp"

namespace tanfem {

struct AssembleOptions {
  JacobianMethod method = JacobianMethod::ad_blocked;
  double fd_h = 1e-6;
  int threads = 1;
};

// Zeroed matrix with one block per node pair sharing an element.
BsrMatrix make_sparsity_pattern(const Mesh& mesh, const DofMap& dofmap);

// A = sum_e P_e A_e P_e^T, b = -sum_e P_e F_e(u_e). Kernel errors are
// annotated with the element id.
void assemble_system(const Mesh& mesh, const DofMap& dofmap,
                     const IElementKernel& kernel, std::span<const double> u,
                     BsrMatrix& a, std::vector<double>& b,
                     const AssembleOptions& opts = {});

// Residual only: b = -sum_e P_e F_e(u_e).
void assemble_residual(const Mesh& mesh, const DofMap& dofmap,
                       const IElementKernel& kernel, std::span<const double> u,
                       std::vector<double>& b, int threads = 1);

struct DirichletBC {
  int dof;
  double value;
};

// Newton-increment convention: for each constrained dof the row becomes an
// identity row with rhs = prescribed - current (zero once the boundary state
// is attained); column contributions move to the rhs so elimination preserves
// symmetry. Re-constraining a dof with an equal value is a no-op; conflicting
// values are an error.
void apply_dirichlet(BsrMatrix& a, std::span<double> b,
                     std::span<const DirichletBC> constraints,
                     std::span<const double> u_current);

}  // namespace tanfem
