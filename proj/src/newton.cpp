#include "tanfem/newton.hpp"

#include <chrono>
#include <cmath>

#include "tanfem/errors.hpp"

namespace tanfem {

namespace {

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

NewtonHistory newton_solve(NonlinearSystem& sys, std::vector<double>& u,
                           const NewtonConfig& cfg) {
  if (static_cast<int>(u.size()) != sys.size())
    raise(ErrorCode::invalid_argument, "newton: initial guess size mismatch");
  NewtonHistory hist;
  BsrMatrix a = sys.make_matrix();
  std::vector<double> b(sys.size()), delta(sys.size());
  double norm0 = -1;

  for (int k = 0; k <= cfg.max_iters; ++k) {
    const auto iter_t0 = Clock::now();
    sys.assemble(u, a, b);
    const double assembly_s = seconds_since(iter_t0);
    const double norm = norm2(b);
    if (k == 0) norm0 = norm;

    IterRecord rec;
    rec.residual_norm = norm;
    rec.assembly_s = assembly_s;

    if (norm <= cfg.abs_tol || norm <= cfg.rel_tol * norm0) {
      rec.wall_s = seconds_since(iter_t0);
      hist.iters.push_back(rec);
      hist.converged = true;
      hist.final_residual = norm;
      return hist;
    }
    if (k == cfg.max_iters) {
      rec.wall_s = seconds_since(iter_t0);
      hist.iters.push_back(rec);
      hist.converged = false;
      hist.final_residual = norm;
      return hist;
    }

    const auto solve_t0 = Clock::now();
    if (cfg.linear.kind == LinearSolverConfig::Kind::dense_lu) {
      dense_lu_solve(a, b, delta, cfg.linear.lu_dim_cap);
    } else {
      const GmresResult r = gmres_solve(a, b, delta, cfg.linear.gmres);
      rec.linear_iters = r.iterations;
    }
    rec.solve_s = seconds_since(solve_t0);

    for (std::size_t i = 0; i < u.size(); ++i) u[i] += delta[i];
    rec.wall_s = seconds_since(iter_t0);
    hist.iters.push_back(rec);
  }
  return hist;  // unreachable
}

}  // namespace tanfem
