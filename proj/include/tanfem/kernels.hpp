#pragma once

// Element residual kernels, written once over a generic scalar type. The
// double instantiation is the residual; the Tangent instantiation is the
// Jacobian. Both run the same statements, so the values returned by the AD
// path match a plain evaluation to the bit.

#include <functional>
#include <span>
#include <vector>

#include "tanfem/elements.hpp"
#include "tanfem/matexp.hpp"
#include "tanfem/tangent.hpp"

namespace tanfem {

// -- element Jacobians over any kernel with residual<T>(me, ue, out) ----------

template <class Kernel>
void elem_jacobian_ad(const Kernel& kernel, const MappedElement& me,
                      std::span<const double> ue, Seeding seeding,
                      ElementMatrix& a, ElementVector& b) {
  const int n = static_cast<int>(ue.size());
  a = ElementMatrix(n);
  b = ElementVector(n);
  std::vector<Tangent> res(n);
  if (seeding == Seeding::identity) {
    const auto lifted = lift(ue, SeedMatrix::identity(n));
    kernel.template residual<Tangent>(me, lifted, res);
    for (int i = 0; i < n; ++i) {
      b.b[i] = -res[i].value();
      for (int j = 0; j < n; ++j) a.at(i, j) = res[i].deriv(j);
    }
    return;
  }
  const int ndf = kernel.ndf();
  const int nen = n / ndf;
  for (int blk = 0; blk < ndf; ++blk) {
    const auto lifted = lift(ue, SeedMatrix::dof_block(ndf, nen, blk));
    kernel.template residual<Tangent>(me, lifted, res);
    if (blk == 0)
      for (int i = 0; i < n; ++i) b.b[i] = -res[i].value();
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < nen; ++r) a.at(i, blk * nen + r) = res[i].deriv(r);
  }
}

// Central differences, column by column, with per-column step h*(1 + |ue_j|).
template <class Kernel>
void elem_jacobian_fd(const Kernel& kernel, const MappedElement& me,
                      std::span<const double> ue, double h, ElementMatrix& a,
                      ElementVector& b) {
  const int n = static_cast<int>(ue.size());
  a = ElementMatrix(n);
  b = ElementVector(n);
  std::vector<double> work(ue.begin(), ue.end());
  std::vector<double> rp(n), rm(n);
  kernel.template residual<double>(me, work, rp);
  for (int i = 0; i < n; ++i) b.b[i] = -rp[i];
  for (int j = 0; j < n; ++j) {
    const double hj = h * (1.0 + std::abs(ue[j]));
    work[j] = ue[j] + hj;
    kernel.template residual<double>(me, work, rp);
    work[j] = ue[j] - hj;
    kernel.template residual<double>(me, work, rm);
    work[j] = ue[j];
    for (int i = 0; i < n; ++i) a.at(i, j) = (rp[i] - rm[i]) / (2 * hj);
  }
}

// -- Poisson with a cubic reaction term ---------------------------------------

// F_i = int grad(u).grad(N_i) + c u^3 N_i - f N_i
class PoissonKernel final : public IElementKernel {
 public:
  using SourceFn = std::function<double(double, double)>;

  explicit PoissonKernel(double reaction = 1.0, double constant_source = 0.0,
                         const RefElement& ref = RefElement::p1_tri())
      : reaction_(reaction),
        source_([constant_source](double, double) { return constant_source; }),
        ref_(&ref) {}

  PoissonKernel(double reaction, SourceFn source,
                const RefElement& ref = RefElement::p1_tri())
      : reaction_(reaction), source_(std::move(source)), ref_(&ref) {}

  int ndf() const override { return 1; }
  const RefElement& ref_element() const override { return *ref_; }
  double reaction() const { return reaction_; }

  template <class T>
  void residual(const MappedElement& me, std::span<const T> ue,
                std::span<T> out) const {
    const int nen = me.nen;
    for (int i = 0; i < nen; ++i) out[i] = T(0.0);
    for (int q = 0; q < me.nq; ++q) {
      T u(0.0), ux(0.0), uy(0.0);
      for (int j = 0; j < nen; ++j) {
        const auto& g = me.grad[q * nen + j];
        fmadd(u, ue[j], me.shape(q, j));
        fmadd(ux, ue[j], g[0]);
        fmadd(uy, ue[j], g[1]);
      }
      T bulk = reaction_ * (u * u * u);
      bulk -= source_(me.qx[q], me.qy[q]);
      const double w = me.wdet[q];
      for (int i = 0; i < nen; ++i) {
        const auto& gi = me.grad[q * nen + i];
        fmadd(out[i], ux, w * gi[0]);
        fmadd(out[i], uy, w * gi[1]);
        fmadd(out[i], bulk, w * me.shape(q, i));
      }
    }
  }

  void residual(const MappedElement& me, std::span<const double> ue,
                std::span<double> out) const override {
    residual<double>(me, ue, out);
  }
  void jacobian_ad(const MappedElement& me, std::span<const double> ue,
                   Seeding seeding, ElementMatrix& a,
                   ElementVector& b) const override {
    elem_jacobian_ad(*this, me, ue, seeding, a, b);
  }
  void jacobian_fd(const MappedElement& me, std::span<const double> ue, double h,
                   ElementMatrix& a, ElementVector& b) const override {
    elem_jacobian_fd(*this, me, ue, h, a, b);
  }
  bool has_manual_jacobian() const override { return true; }
  // Hand-derived: int grad(N_j).grad(N_i) + 3 c u^2 N_j N_i
  void jacobian_manual(const MappedElement& me, std::span<const double> ue,
                       ElementMatrix& a, ElementVector& b) const override {
    const int nen = me.nen;
    a = ElementMatrix(nen);
    b = ElementVector(nen);
    std::vector<double> res(nen);
    residual<double>(me, ue, res);
    for (int i = 0; i < nen; ++i) b.b[i] = -res[i];
    for (int q = 0; q < me.nq; ++q) {
      double u = 0;
      for (int j = 0; j < nen; ++j) u += ue[j] * me.shape(q, j);
      const double du_bulk = 3.0 * reaction_ * u * u;
      for (int i = 0; i < nen; ++i) {
        const auto& gi = me.grad[q * nen + i];
        for (int j = 0; j < nen; ++j) {
          const auto& gj = me.grad[q * nen + j];
          a.at(i, j) += me.wdet[q] * (gj[0] * gi[0] + gj[1] * gi[1] +
                                      du_bulk * me.shape(q, j) * me.shape(q, i));
        }
      }
    }
  }

 private:
  double reaction_;
  SourceFn source_;
  const RefElement* ref_;
};

// -- Oldroyd-B, log-conformation, stationary ----------------------------------

struct OldroydBParams {
  double rho = 1.0;
  double mu_s = 0.59;
  double mu_p = 0.41;
  double lambda = 0.05;

  void validate() const {
    if (!(rho > 0) || !(mu_s > 0) || !(mu_p > 0) || !(lambda > 0))
      raise(ErrorCode::invalid_argument,
            "Oldroyd-B parameters must be strictly positive");
  }
};

// DOF-major block layout of ue: [Psi11 | Psi12 | Psi22 | u1 | u2 | p].
// Velocity and Psi are P2; pressure is P1 on the three vertex nodes, so the
// discretization is inf-sup stable without stabilization terms. Pressure rows
// on midside nodes are identically zero and flagged inactive.
class OldroydBKernel final : public IElementKernel {
 public:
  static constexpr int kPsi11 = 0, kPsi12 = 1, kPsi22 = 2, kU1 = 3, kU2 = 4,
                       kPres = 5;

  explicit OldroydBKernel(const OldroydBParams& params, ExpmConfig expm_cfg = {})
      : params_(params), expm_cfg_(expm_cfg) {
    params_.validate();
    // T_P always uses the remedied branch; the configurable policy applies to
    // the constitutive e^{-Psi}, where the failure mode lives.
    tp_cfg_.policy = SmallNormPolicy::taylor_fix;
    tp_cfg_.norm_floor = expm_cfg.norm_floor;
    const RefElement& p2 = RefElement::p2_tri();
    const RefElement& p1 = RefElement::p1_tri();
    n1_.resize(static_cast<std::size_t>(p2.nq()) * 3);
    std::vector<double> tmp(3);
    for (int q = 0; q < p2.nq(); ++q) {
      p1.shape_at(p2.qp(q).xi, p2.qp(q).eta, tmp);
      for (int i = 0; i < 3; ++i) n1_[q * 3 + i] = tmp[i];
    }
  }

  int ndf() const override { return 6; }
  const RefElement& ref_element() const override { return RefElement::p2_tri(); }
  const OldroydBParams& params() const { return params_; }
  const ExpmConfig& expm_config() const { return expm_cfg_; }

  bool dof_active(int field, int local_node) const override {
    return field != kPres || local_node < 3;
  }

  template <class T>
  void residual(const MappedElement& me, std::span<const T> ue,
                std::span<T> out) const {
    const int nen = me.nen;
    for (int i = 0; i < 6 * nen; ++i) out[i] = T(0.0);
    const double inv_lambda = 1.0 / params_.lambda;
    const double mu_p_lambda = params_.mu_p * inv_lambda;

    for (int q = 0; q < me.nq; ++q) {
      // interpolate fields and gradients at the quadrature point
      T psi11(0.0), psi12(0.0), psi22(0.0), u1(0.0), u2(0.0);
      T g11x(0.0), g11y(0.0), g12x(0.0), g12y(0.0), g22x(0.0), g22y(0.0);
      T u1x(0.0), u1y(0.0), u2x(0.0), u2y(0.0);
      for (int j = 0; j < nen; ++j) {
        const double nj = me.shape(q, j);
        const auto& gj = me.grad[q * nen + j];
        const T& p11 = ue[kPsi11 * nen + j];
        const T& p12 = ue[kPsi12 * nen + j];
        const T& p22 = ue[kPsi22 * nen + j];
        const T& v1 = ue[kU1 * nen + j];
        const T& v2 = ue[kU2 * nen + j];
        fmadd(psi11, p11, nj);
        fmadd(psi12, p12, nj);
        fmadd(psi22, p22, nj);
        fmadd(u1, v1, nj);
        fmadd(u2, v2, nj);
        fmadd(g11x, p11, gj[0]);
        fmadd(g11y, p11, gj[1]);
        fmadd(g12x, p12, gj[0]);
        fmadd(g12y, p12, gj[1]);
        fmadd(g22x, p22, gj[0]);
        fmadd(g22y, p22, gj[1]);
        fmadd(u1x, v1, gj[0]);
        fmadd(u1y, v1, gj[1]);
        fmadd(u2x, v2, gj[0]);
        fmadd(u2y, v2, gj[1]);
      }
      T p(0.0);
      for (int j = 0; j < 3; ++j)
        fmadd(p, ue[kPres * nen + j], n1_[q * 3 + j]);

      const Sym2<T> psi{psi11, psi12, psi22};
      const T& eps11 = u1x;
      const T& eps22 = u2y;
      const T eps12 = (u1y + u2x) * 0.5;

      // polymeric stress T_P = (mu_p/lambda)(e^Psi - 1)
      const Sym2<T> epsi = expm(psi, tp_cfg_);

      // constitutive residual tensor
      const Sym2<T> em = expm(-psi, expm_cfg_);
      const T gpsi = gamma(psi);
      T bracket = gpsi * eps12;
      fmadd(bracket, psi12 * ((eps11 - eps22) * 0.5), -1.0);
      const T fpsi = f_func(psi);
      // [Psi, Omega] = 2*omega12*B with B = [[-Psi12, gamma],[gamma, Psi12]]
      T bscale = u1y - u2x;  // 2*omega12
      fmadd(bscale, bracket * fpsi, -2.0);
      const T psi12_b = psi12 * bscale;
      const T gpsi_b = gpsi * bscale;

      T r11 = (1.0 - em.m11) * inv_lambda;
      fmadd(r11, u1, g11x);
      fmadd(r11, u2, g11y);
      r11 -= psi12_b;
      add_scaled(r11, eps11, -2.0);

      T r12 = em.m12 * (-inv_lambda);
      fmadd(r12, u1, g12x);
      fmadd(r12, u2, g12y);
      r12 += gpsi_b;
      add_scaled(r12, eps12, -2.0);

      T r22 = (1.0 - em.m22) * inv_lambda;
      fmadd(r22, u1, g22x);
      fmadd(r22, u2, g22y);
      r22 += psi12_b;
      add_scaled(r22, eps22, -2.0);

      T conv1 = u1 * u1x;
      fmadd(conv1, u2, u1y);
      conv1 *= params_.rho;
      T conv2 = u1 * u2x;
      fmadd(conv2, u2, u2y);
      conv2 *= params_.rho;

      const double two_mu_s = 2.0 * params_.mu_s;
      // momentum flux rows, hoisted out of the test-function loop
      T flux1x = two_mu_s * eps11;
      fmadd(flux1x, epsi.m11, mu_p_lambda);
      flux1x -= mu_p_lambda;
      flux1x -= p;
      T flux_xy = two_mu_s * eps12;
      fmadd(flux_xy, epsi.m12, mu_p_lambda);
      T flux2y = two_mu_s * eps22;
      fmadd(flux2y, epsi.m22, mu_p_lambda);
      flux2y -= mu_p_lambda;
      flux2y -= p;

      const double w = me.wdet[q];
      for (int i = 0; i < nen; ++i) {
        const double wni = w * me.shape(q, i);
        const auto& gi = me.grad[q * nen + i];
        fmadd(out[kPsi11 * nen + i], r11, wni);
        fmadd(out[kPsi12 * nen + i], r12, wni);
        fmadd(out[kPsi22 * nen + i], r22, wni);
        T& o1 = out[kU1 * nen + i];
        fmadd(o1, conv1, wni);
        fmadd(o1, flux1x, w * gi[0]);
        fmadd(o1, flux_xy, w * gi[1]);
        T& o2 = out[kU2 * nen + i];
        fmadd(o2, conv2, wni);
        fmadd(o2, flux_xy, w * gi[0]);
        fmadd(o2, flux2y, w * gi[1]);
      }
      const T div_u = u1x + u2y;
      for (int i = 0; i < 3; ++i)
        fmadd(out[kPres * nen + i], div_u, w * n1_[q * 3 + i]);
    }
  }

  void residual(const MappedElement& me, std::span<const double> ue,
                std::span<double> out) const override {
    residual<double>(me, ue, out);
  }
  void jacobian_ad(const MappedElement& me, std::span<const double> ue,
                   Seeding seeding, ElementMatrix& a,
                   ElementVector& b) const override {
    elem_jacobian_ad(*this, me, ue, seeding, a, b);
  }
  void jacobian_fd(const MappedElement& me, std::span<const double> ue, double h,
                   ElementMatrix& a, ElementVector& b) const override {
    elem_jacobian_fd(*this, me, ue, h, a, b);
  }

 private:
  OldroydBParams params_;
  ExpmConfig expm_cfg_;
  ExpmConfig tp_cfg_;
  std::vector<double> n1_;
};

}  // namespace tanfem
