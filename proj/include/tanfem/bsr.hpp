#pragma once

#include <span>
#include <vector>

#include "tanfem/errors.hpp"

namespace tanfem {

// Block sparse row storage over the node graph: one dense ndf x ndf block per
// node pair that shares an element. Column indices are sorted per row.
class BsrMatrix {
 public:
  BsrMatrix() = default;
  BsrMatrix(int num_node_rows, int block_size, std::vector<int> row_ptr,
            std::vector<int> col_idx);

  int node_rows() const { return nrows_; }
  int block_size() const { return block_; }
  int num_blocks() const { return static_cast<int>(col_idx_.size()); }
  int dim() const { return nrows_ * block_; }
  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_idx() const { return col_idx_; }

  // -1 when the pair is not in the pattern.
  int find_block(int i, int j) const;
  double* block(int k) { return vals_.data() + static_cast<std::size_t>(k) * block_ * block_; }
  const double* block(int k) const {
    return vals_.data() + static_cast<std::size_t>(k) * block_ * block_;
  }

  double entry(int row, int col) const;  // global dof indexing, 0 off-pattern
  void add_block(int i, int j, const double* blk);  // accumulate, must exist

  void zero();
  void matvec(std::span<const double> x, std::span<double> y) const;
  std::vector<double> to_dense() const;  // row-major dim x dim

  // Max number of blocks in any row: the m_B statistic (self block included).
  int max_row_blocks() const;

  std::span<const double> values() const { return vals_; }
  std::span<double> values() { return vals_; }

 private:
  int nrows_ = 0;
  int block_ = 1;
  std::vector<int> row_ptr_, col_idx_;
  std::vector<double> vals_;
};

}  // namespace tanfem
