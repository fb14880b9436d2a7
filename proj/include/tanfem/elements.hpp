#pragma once

// Reference triangles (P1/P2 Lagrange), quadrature, mapped per-element
// geometry, and the element matrix/vector containers.

#include <array>
#include <span>
#include <vector>

#include "tanfem/errors.hpp"

namespace tanfem {

enum class ElemKind { p1_tri, p2_tri };

struct QuadPoint {
  double xi, eta, w;
};

class RefElement {
 public:
  static const RefElement& p1_tri();
  static const RefElement& p2_tri();

  ElemKind kind() const { return kind_; }
  int nen() const { return nen_; }
  int nq() const { return static_cast<int>(qpts_.size()); }
  int quad_degree() const { return quad_degree_; }
  const QuadPoint& qp(int q) const { return qpts_[q]; }

  // tabulated at the rule's points
  double shape(int q, int i) const { return shape_[q * nen_ + i]; }
  const std::array<double, 2>& dshape(int q, int i) const {
    return dshape_[q * nen_ + i];
  }

  // arbitrary-point evaluation (outputs sized nen)
  void shape_at(double xi, double eta, std::span<double> out) const;
  void dshape_at(double xi, double eta, std::span<std::array<double, 2>> out) const;

 private:
  RefElement(ElemKind kind, std::vector<QuadPoint> qpts);

  ElemKind kind_;
  int nen_;
  int quad_degree_;
  std::vector<QuadPoint> qpts_;
  std::vector<double> shape_;
  std::vector<std::array<double, 2>> dshape_;
};

// Geometry of one element evaluated at the quadrature points: physical shape
// gradients and quadrature weights including the map determinant. Built once
// per element and shared by every residual/Jacobian evaluation on it; the
// unknowns never enter the coordinate map.
struct MappedElement {
  const RefElement* ref = nullptr;
  int nen = 0;
  int nq = 0;
  std::vector<double> wdet;  // [q]
  std::vector<double> qx, qy;  // physical quadrature points
  std::vector<std::array<double, 2>> grad;  // [q*nen + i]

  double shape(int q, int i) const { return ref->shape(q, i); }

  // coords: nen pairs (x, y). Throws invalid_mesh on |det J| <= 1e-14.
  static MappedElement build(const RefElement& ref, std::span<const double> coords);
};

// Dense element Jacobian and residual, indexed by the DOF-major layout of ue.
struct ElementMatrix {
  int n = 0;
  std::vector<double> a;  // row-major n*n

  explicit ElementMatrix(int n_ = 0) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

struct ElementVector {
  std::vector<double> b;

  explicit ElementVector(int n = 0) : b(n, 0.0) {}
  int size() const { return static_cast<int>(b.size()); }
};

enum class Seeding { identity, block_per_dof };

enum class JacobianMethod { ad_identity, ad_blocked, fd, manual };

// Runtime interface the assembly loop drives; concrete kernels implement it on
// top of their scalar-generic residual.
class IElementKernel {
 public:
  virtual ~IElementKernel() = default;
  virtual int ndf() const = 0;
  virtual const RefElement& ref_element() const = 0;
  virtual void residual(const MappedElement& me, std::span<const double> ue,
                        std::span<double> out) const = 0;
  virtual void jacobian_ad(const MappedElement& me, std::span<const double> ue,
                           Seeding seeding, ElementMatrix& a,
                           ElementVector& b) const = 0;
  virtual void jacobian_fd(const MappedElement& me, std::span<const double> ue,
                           double h, ElementMatrix& a, ElementVector& b) const = 0;
  virtual bool has_manual_jacobian() const { return false; }
  virtual void jacobian_manual(const MappedElement&, std::span<const double>,
                               ElementMatrix&, ElementVector&) const {
    raise(ErrorCode::invalid_argument, "kernel has no manual Jacobian");
  }
  // Mixed interpolation: fields can be absent on some local nodes.
  virtual bool dof_active(int /*field*/, int /*local_node*/) const { return true; }
};

}  // namespace tanfem
