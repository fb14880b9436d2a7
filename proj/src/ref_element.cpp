#include "tanfem/elements.hpp"

#include <cmath>

namespace tanfem {

namespace {

// 3-point rule, exact through degree 2 on the reference triangle (area 1/2).
std::vector<QuadPoint> rule_degree2() {
  const double w = 1.0 / 6.0;
  return {{1.0 / 6, 1.0 / 6, w}, {2.0 / 3, 1.0 / 6, w}, {1.0 / 6, 2.0 / 3, w}};
}

// 7-point rule, exact through degree 5.
std::vector<QuadPoint> rule_degree5() {
  const double r15 = std::sqrt(15.0);
  const double a = (6.0 + r15) / 21.0;
  const double b = (6.0 - r15) / 21.0;
  const double wa = (155.0 + r15) / 2400.0;
  const double wb = (155.0 - r15) / 2400.0;
  return {{1.0 / 3, 1.0 / 3, 9.0 / 80},
          {a, a, wa},
          {1.0 - 2 * a, a, wa},
          {a, 1.0 - 2 * a, wa},
          {b, b, wb},
          {1.0 - 2 * b, b, wb},
          {b, 1.0 - 2 * b, wb}};
}

}  // namespace

RefElement::RefElement(ElemKind kind, std::vector<QuadPoint> qpts)
    : kind_(kind),
      nen_(kind == ElemKind::p1_tri ? 3 : 6),
      quad_degree_(kind == ElemKind::p1_tri ? 2 : 5),
      qpts_(std::move(qpts)) {
  shape_.resize(qpts_.size() * nen_);
  dshape_.resize(qpts_.size() * nen_);
  std::vector<double> n(nen_);
  std::vector<std::array<double, 2>> dn(nen_);
  for (std::size_t q = 0; q < qpts_.size(); ++q) {
    shape_at(qpts_[q].xi, qpts_[q].eta, n);
    dshape_at(qpts_[q].xi, qpts_[q].eta, dn);
    for (int i = 0; i < nen_; ++i) {
      shape_[q * nen_ + i] = n[i];
      dshape_[q * nen_ + i] = dn[i];
    }
  }
}

const RefElement& RefElement::p1_tri() {
  static const RefElement e(ElemKind::p1_tri, rule_degree2());
  return e;
}

const RefElement& RefElement::p2_tri() {
  static const RefElement e(ElemKind::p2_tri, rule_degree5());
  return e;
}

void RefElement::shape_at(double xi, double eta, std::span<double> out) const {
  const double l0 = 1.0 - xi - eta;
  const double l1 = xi;
  const double l2 = eta;
  if (kind_ == ElemKind::p1_tri) {
    out[0] = l0;
    out[1] = l1;
    out[2] = l2;
    return;
  }
  out[0] = l0 * (2 * l0 - 1);
  out[1] = l1 * (2 * l1 - 1);
  out[2] = l2 * (2 * l2 - 1);
  out[3] = 4 * l0 * l1;
  out[4] = 4 * l1 * l2;
  out[5] = 4 * l2 * l0;
}

void RefElement::dshape_at(double xi, double eta,
                           std::span<std::array<double, 2>> out) const {
  const double l0 = 1.0 - xi - eta;
  const double l1 = xi;
  const double l2 = eta;
  if (kind_ == ElemKind::p1_tri) {
    out[0] = {-1.0, -1.0};
    out[1] = {1.0, 0.0};
    out[2] = {0.0, 1.0};
    return;
  }
  // dL0 = (-1,-1), dL1 = (1,0), dL2 = (0,1)
  out[0] = {-(4 * l0 - 1), -(4 * l0 - 1)};
  out[1] = {4 * l1 - 1, 0.0};
  out[2] = {0.0, 4 * l2 - 1};
  out[3] = {4 * (l0 - l1), -4 * l1};
  out[4] = {4 * l2, 4 * l1};
  out[5] = {-4 * l2, 4 * (l0 - l2)};
}

MappedElement MappedElement::build(const RefElement& ref,
                                   std::span<const double> coords) {
  MappedElement me;
  me.ref = &ref;
  me.nen = ref.nen();
  me.nq = ref.nq();
  me.wdet.resize(me.nq);
  me.qx.resize(me.nq);
  me.qy.resize(me.nq);
  me.grad.resize(static_cast<std::size_t>(me.nq) * me.nen);
  for (int q = 0; q < me.nq; ++q) {
    double j11 = 0, j12 = 0, j21 = 0, j22 = 0, x = 0, y = 0;
    for (int i = 0; i < me.nen; ++i) {
      const auto& d = ref.dshape(q, i);
      const double xi_c = coords[2 * i];
      const double yi_c = coords[2 * i + 1];
      j11 += xi_c * d[0];
      j12 += xi_c * d[1];
      j21 += yi_c * d[0];
      j22 += yi_c * d[1];
      x += xi_c * ref.shape(q, i);
      y += yi_c * ref.shape(q, i);
    }
    const double det = j11 * j22 - j12 * j21;
    if (std::abs(det) <= 1e-14)
      raise(ErrorCode::invalid_mesh, "degenerate element (|det J| <= 1e-14)");
    const double inv = 1.0 / det;
    me.wdet[q] = ref.qp(q).w * std::abs(det);
    me.qx[q] = x;
    me.qy[q] = y;
    for (int i = 0; i < me.nen; ++i) {
      const auto& d = ref.dshape(q, i);
      // physical gradient = J^{-T} * reference gradient
      me.grad[q * me.nen + i] = {(j22 * d[0] - j21 * d[1]) * inv,
                                 (-j12 * d[0] + j11 * d[1]) * inv};
    }
  }
  return me;
}

}  // namespace tanfem
