#include "tanfem/bsr.hpp"

#include <algorithm>

namespace tanfem {

BsrMatrix::BsrMatrix(int num_node_rows, int block_size, std::vector<int> row_ptr,
                     std::vector<int> col_idx)
    : nrows_(num_node_rows),
      block_(block_size),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      vals_(col_idx_.size() * static_cast<std::size_t>(block_size) * block_size,
            0.0) {
  if (static_cast<int>(row_ptr_.size()) != nrows_ + 1)
    raise(ErrorCode::invalid_argument, "BSR row pointer size mismatch");
}

int BsrMatrix::find_block(int i, int j) const {
  const int lo = row_ptr_[i], hi = row_ptr_[i + 1];
  auto it = std::lower_bound(col_idx_.begin() + lo, col_idx_.begin() + hi, j);
  if (it == col_idx_.begin() + hi || *it != j) return -1;
  return static_cast<int>(it - col_idx_.begin());
}

double BsrMatrix::entry(int row, int col) const {
  const int k = find_block(row / block_, col / block_);
  if (k < 0) return 0.0;
  return block(k)[(row % block_) * block_ + (col % block_)];
}

void BsrMatrix::add_block(int i, int j, const double* blk) {
  const int k = find_block(i, j);
  if (k < 0)
    raise(ErrorCode::internal, "assembled block outside the sparsity pattern");
  double* dst = block(k);
  for (int t = 0; t < block_ * block_; ++t) dst[t] += blk[t];
}

void BsrMatrix::zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

void BsrMatrix::matvec(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < nrows_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int j = col_idx_[k];
      const double* blk = block(k);
      for (int fi = 0; fi < block_; ++fi) {
        double acc = 0.0;
        for (int fj = 0; fj < block_; ++fj)
          acc += blk[fi * block_ + fj] * x[j * block_ + fj];
        y[i * block_ + fi] += acc;
      }
    }
  }
}

std::vector<double> BsrMatrix::to_dense() const {
  const int n = dim();
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < nrows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int j = col_idx_[k];
      const double* blk = block(k);
      for (int fi = 0; fi < block_; ++fi)
        for (int fj = 0; fj < block_; ++fj)
          d[static_cast<std::size_t>(i * block_ + fi) * n + j * block_ + fj] =
              blk[fi * block_ + fj];
    }
  return d;
}

int BsrMatrix::max_row_blocks() const {
  int m = 0;
  for (int i = 0; i < nrows_; ++i)
    m = std::max(m, row_ptr_[i + 1] - row_ptr_[i]);
  return m;
}

}  // namespace tanfem
