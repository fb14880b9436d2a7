#include "tanfem/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>

namespace tanfem {

BsrMatrix make_sparsity_pattern(const Mesh& mesh, const DofMap& dofmap) {
  const int n = mesh.num_nodes();
  std::vector<std::set<int>> cols(n);
  for (const auto& el : mesh.elements)
    for (int a : el)
      for (int b : el) cols[a].insert(b);
  std::vector<int> row_ptr(n + 1, 0);
  std::vector<int> col_idx;
  for (int i = 0; i < n; ++i) {
    row_ptr[i + 1] = row_ptr[i] + static_cast<int>(cols[i].size());
    col_idx.insert(col_idx.end(), cols[i].begin(), cols[i].end());
  }
  return BsrMatrix(n, dofmap.ndf(), std::move(row_ptr), std::move(col_idx));
}

namespace {

struct ScatterTarget {
  BsrMatrix* a = nullptr;
  std::span<double> b;
};

// One element: gather, evaluate, scatter into the target.
void process_element(const Mesh& mesh, const DofMap& dofmap,
                     const IElementKernel& kernel, std::span<const double> u,
                     int e, const AssembleOptions& opts, bool want_matrix,
                     ScatterTarget tgt, std::vector<double>& coords,
                     std::vector<double>& ue, std::vector<double>& resid,
                     std::vector<double>& blockbuf) {
  mesh.element_coords(e, coords);
  const MappedElement me = MappedElement::build(kernel.ref_element(), coords);
  const auto eta = dofmap.eta(e);
  ue.resize(eta.size());
  for (std::size_t j = 0; j < eta.size(); ++j) ue[j] = u[eta[j]];

  if (!want_matrix) {
    resid.resize(eta.size());
    kernel.residual(me, ue, resid);
    for (std::size_t j = 0; j < eta.size(); ++j) tgt.b[eta[j]] -= resid[j];
    return;
  }

  ElementMatrix ae;
  ElementVector be;
  switch (opts.method) {
    case JacobianMethod::ad_identity:
      kernel.jacobian_ad(me, ue, Seeding::identity, ae, be);
      break;
    case JacobianMethod::ad_blocked:
      kernel.jacobian_ad(me, ue, Seeding::block_per_dof, ae, be);
      break;
    case JacobianMethod::fd:
      kernel.jacobian_fd(me, ue, opts.fd_h, ae, be);
      break;
    case JacobianMethod::manual:
      kernel.jacobian_manual(me, ue, ae, be);
      break;
  }

  for (std::size_t j = 0; j < eta.size(); ++j) tgt.b[eta[j]] += be.b[j];

  // scatter A_e by node-pair blocks; eta is DOF-major (field blocks of nen)
  const int ndf = dofmap.ndf();
  const int nen = dofmap.nen();
  blockbuf.resize(static_cast<std::size_t>(ndf) * ndf);
  const auto& enodes = mesh.elements[e];
  for (int a = 0; a < nen; ++a) {
    for (int bnode = 0; bnode < nen; ++bnode) {
      for (int fi = 0; fi < ndf; ++fi)
        for (int fj = 0; fj < ndf; ++fj)
          blockbuf[fi * ndf + fj] = ae.at(fi * nen + a, fj * nen + bnode);
      tgt.a->add_block(enodes[a], enodes[bnode], blockbuf.data());
    }
  }
}

void run_elements(const Mesh& mesh, const DofMap& dofmap,
                  const IElementKernel& kernel, std::span<const double> u,
                  const AssembleOptions& opts, bool want_matrix, BsrMatrix* a,
                  std::vector<double>& b) {
  const int ne = mesh.num_elements();
  b.assign(dofmap.num_dofs(), 0.0);
  if (a) a->zero();

  auto worker = [&](int lo, int hi, ScatterTarget tgt) {
    std::vector<double> coords, ue, resid, blockbuf;
    for (int e = lo; e < hi; ++e) {
      try {
        process_element(mesh, dofmap, kernel, u, e, opts, want_matrix, tgt,
                        coords, ue, resid, blockbuf);
      } catch (const Error& err) {
        raise(err.code(), "element " + std::to_string(e) + ": " + err.what());
      }
    }
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1 || ne < 2 * threads) {
    worker(0, ne, ScatterTarget{a, b});
    return;
  }

  // per-thread partial results, merged in thread order so a fixed thread
  // count is deterministic
  std::vector<BsrMatrix> part_a;
  std::vector<std::vector<double>> part_b(threads);
  if (want_matrix)
    for (int t = 0; t < threads; ++t) part_a.push_back(*a);
  for (int t = 0; t < threads; ++t) part_b[t].assign(dofmap.num_dofs(), 0.0);

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  const int chunk = (ne + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        const int lo = t * chunk;
        const int hi = std::min(ne, lo + chunk);
        worker(lo, hi,
               ScatterTarget{want_matrix ? &part_a[t] : nullptr, part_b[t]});
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& ep : errs)
    if (ep) std::rethrow_exception(ep);

  for (int t = 0; t < threads; ++t) {
    for (int i = 0; i < dofmap.num_dofs(); ++i) b[i] += part_b[t][i];
    if (want_matrix) {
      auto dst = a->values();
      auto src = part_a[t].values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

}  // namespace

void assemble_system(const Mesh& mesh, const DofMap& dofmap,
                     const IElementKernel& kernel, std::span<const double> u,
                     BsrMatrix& a, std::vector<double>& b,
                     const AssembleOptions& opts) {
  run_elements(mesh, dofmap, kernel, u, opts, true, &a, b);
}

void assemble_residual(const Mesh& mesh, const DofMap& dofmap,
                       const IElementKernel& kernel, std::span<const double> u,
                       std::vector<double>& b, int threads) {
  AssembleOptions opts;
  opts.threads = threads;
  run_elements(mesh, dofmap, kernel, u, opts, false, nullptr, b);
}

void apply_dirichlet(BsrMatrix& a, std::span<double> b,
                     std::span<const DirichletBC> constraints,
                     std::span<const double> u_current) {
  const int blk = a.block_size();
  std::unordered_map<int, double> inc;
  inc.reserve(constraints.size());
  for (const auto& c : constraints) {
    if (c.dof < 0 || c.dof >= a.dim())
      raise(ErrorCode::invalid_argument,
            "Dirichlet dof " + std::to_string(c.dof) + " out of range");
    const double v = c.value - u_current[c.dof];
    auto [it, fresh] = inc.emplace(c.dof, v);
    if (!fresh && it->second != v)
      raise(ErrorCode::invalid_argument,
            "conflicting Dirichlet values for dof " + std::to_string(c.dof));
  }

  std::vector<char> fixed(a.dim(), 0);
  for (const auto& [dof, v] : inc) fixed[dof] = 1;

  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  for (int i = 0; i < a.node_rows(); ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const int j = col_idx[k];
      double* block = a.block(k);
      for (int fj = 0; fj < blk; ++fj) {
        const int cdof = j * blk + fj;
        if (!fixed[cdof]) continue;
        const double v = inc[cdof];
        for (int fi = 0; fi < blk; ++fi) {
          const int rdof = i * blk + fi;
          if (!fixed[rdof]) b[rdof] -= block[fi * blk + fj] * v;
          block[fi * blk + fj] = 0.0;
        }
      }
      for (int fi = 0; fi < blk; ++fi) {
        const int rdof = i * blk + fi;
        if (!fixed[rdof]) continue;
        for (int fj = 0; fj < blk; ++fj) block[fi * blk + fj] = 0.0;
        if (i == j) block[fi * blk + fi] = 1.0;
      }
    }
  }
  for (const auto& [dof, v] : inc) b[dof] = v;
}

}  // namespace tanfem
