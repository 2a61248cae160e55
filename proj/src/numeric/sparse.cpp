// Copyright 2026 The hivae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "numeric/sparse.hpp"

#include <algorithm>

namespace hivae {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw ContractError("sparse triplet out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix s(rows, cols);
  for (std::size_t i = 0; i < triplets.size();) {
    std::size_t j = i;
    double v = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col) {
      v += triplets[j].value;
      ++j;
    }
    s.col_idx_.push_back(triplets[i].col);
    s.values_.push_back(v);
    ++s.row_ptr_[triplets[i].row + 1];
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) s.row_ptr_[r + 1] += s.row_ptr_[r];
  return s;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw ContractError("SparseMatrix::at out of range");
  const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(c));
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Matrix SparseMatrix::to_dense() const {
  Matrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_idx_[p]) = values_[p];
  return d;
}

std::vector<double> SparseMatrix::dense_row(std::size_t r) const {
  if (r >= rows_) throw ContractError("SparseMatrix::dense_row out of range");
  std::vector<double> out(cols_, 0.0);
  for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) out[col_idx_[p]] = values_[p];
  return out;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
      t.push_back({col_idx_[p], static_cast<std::uint32_t>(r), values_[p]});
  return from_triplets(cols_, rows_, std::move(t));
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
  if (s.cols() != x.rows()) {
    throw ContractError("spmm: shape mismatch (" + std::to_string(s.rows()) + "x" +
                        std::to_string(s.cols()) + ") * " + shape_str(x));
  }
  Matrix out(s.rows(), x.cols());
  const auto& rp = s.row_ptr();
  const auto& ci = s.col_idx();
  const auto& vals = s.values();
  const std::size_t m = x.cols();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    double* orow = out.data() + r * m;
    for (std::size_t p = rp[r]; p < rp[r + 1]; ++p) {
      const double v = vals[p];
      const double* xrow = x.data() + static_cast<std::size_t>(ci[p]) * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += v * xrow[j];
    }
  }
  return out;
}

void spmm_tn_acc(const SparseMatrix& s, const Matrix& g, Matrix& out) {
  if (s.rows() != g.rows() || out.rows() != s.cols() || out.cols() != g.cols()) {
    throw ContractError("spmm_tn: shape mismatch");
  }
  const auto& rp = s.row_ptr();
  const auto& ci = s.col_idx();
  const auto& vals = s.values();
  const std::size_t m = g.cols();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const double* grow = g.data() + r * m;
    for (std::size_t p = rp[r]; p < rp[r + 1]; ++p) {
      const double v = vals[p];
      double* orow = out.data() + static_cast<std::size_t>(ci[p]) * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += v * grow[j];
    }
  }
}

}  // namespace hivae
