#pragma once

#include <span>
#include <vector>

#include "tanfem/mesh.hpp"

namespace tanfem {

// Node-major global numbering: dof = node*ndf + field. The per-element index
// set eta_e follows the DOF-major block layout of the element unknowns, so
// scattering with eta_e is exactly the P_e of the assembly operator.
class DofMap {
 public:
  DofMap(const Mesh& mesh, int ndf);

  int ndf() const { return ndf_; }
  int nen() const { return nen_; }
  int num_nodes() const { return nnodes_; }
  int num_dofs() const { return nnodes_ * ndf_; }
  int num_elements() const { return nelem_; }
  int global_dof(int node, int field) const { return node * ndf_ + field; }

  std::span<const int> eta(int e) const {
    const std::size_t sz = static_cast<std::size_t>(ndf_) * nen_;
    return {eta_.data() + e * sz, sz};
  }

 private:
  int ndf_, nen_, nnodes_, nelem_;
  std::vector<int> eta_;
};

inline DofMap::DofMap(const Mesh& mesh, int ndf)
    : ndf_(ndf), nen_(mesh.nen()), nnodes_(mesh.num_nodes()),
      nelem_(mesh.num_elements()) {
  if (ndf < 1) raise(ErrorCode::invalid_argument, "ndf must be >= 1");
  eta_.resize(static_cast<std::size_t>(nelem_) * ndf_ * nen_);
  std::size_t k = 0;
  for (int e = 0; e < nelem_; ++e)
    for (int f = 0; f < ndf_; ++f)
      for (int r = 0; r < nen_; ++r) eta_[k++] = mesh.elements[e][r] * ndf_ + f;
}

}  // namespace tanfem
