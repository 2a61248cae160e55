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

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "numeric/matrix.hpp"
#include "numeric/param_store.hpp"
#include "numeric/sparse.hpp"

namespace hivae {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  // Scalar value of a 1x1 node.
  double scalar() const;
};

// Minimal reverse-mode tape over whole-matrix operations. Every op records
// its analytic adjoint; backward() replays them in reverse creation order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Constant that aliases `value` instead of copying it; `value` must
  // outlive the tape and stay unmodified while it is in use.
  Var constant_ref(const Matrix& value);
  Var variable(Matrix value);
  // Leaf bound to a stored parameter; backward() accumulates its gradient
  // into Param::grad. Binding the same name twice returns the same node.
  Var param(ParamStore& store, const std::string& name);

  const Matrix& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.ref != nullptr ? *n.ref : n.value;
  }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  // Gradient buffer, allocated on first use.
  Matrix& grad(std::size_t id);
  const Matrix& grad(Var v) { return grad(v.id); }

  // Registers an op result. `backward` may be empty when no input needs a
  // gradient.
  Var push(Matrix value, bool needs_grad, std::function<void()> backward);

  // Seeds d(out)/d(out) = 1 on a 1x1 node and propagates.
  void backward(Var out);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;
    Matrix grad;
    bool needs_grad = false;
    std::function<void()> backward;
  };
  std::deque<Node> nodes_;
  std::map<std::string, std::size_t> param_nodes_;
  std::vector<std::pair<std::size_t, Param*>> param_links_;
};

namespace ad {

Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);
// S * X with a constant sparse S that must outlive the tape.
Var spmm(const SparseMatrix& s, Var x);
Var gather_rows(Var x, std::vector<std::uint32_t> rows);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
// Adds a 1 x m row to every row of a.
Var add_row(Var a, Var row);
Var mul_const(Var a, const Matrix& c);

Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
// Gradient passes only where lo < a < hi.
Var clamp(Var a, double lo, double hi);

Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var concat_cols(Var a, Var b);
// Row-wise inner products, n x 1.
Var rowdot(Var a, Var b);

// Segment ops: offsets has B+1 entries delimiting B row ranges of the input.
Var segment_softmax(Var x, const std::vector<std::size_t>& offsets);
Var segment_weighted_sum(Var w, Var x, const std::vector<std::size_t>& offsets);
Var segment_mean(Var x, const std::vector<std::size_t>& offsets);

Var sum(Var a);
Var sum_squares(Var a);
// sum 0.5 * (mu^2 + exp(logvar) - 1 - logvar)
Var kl_diag_gaussian(Var mu, Var logvar);
// sum (w * (target - pred))^2
Var weighted_sq_error(Var pred, const Matrix& target, const Matrix& weights);
// sum pos_w * log sigmoid(x) + neg_w * log(1 - sigmoid(x))
Var weighted_logistic(Var logits, const Matrix& pos_w, const Matrix& neg_w);

}  // namespace ad
}  // namespace hivae

namespace hivae {

// Resolves parameter names to tape nodes. Names accepted by the predicate
// become gradient leaves; all others (or all, for a const store) are
// constants, which is how a frozen block stays untouched.
class Binder {
 public:
  Binder(Tape& tape, const ParamStore& store) : tape_(tape), cstore_(store) {}
  Binder(Tape& tape, ParamStore& store, std::function<bool(const std::string&)> trainable)
      : tape_(tape), cstore_(store), store_(&store), trainable_(std::move(trainable)) {}

  Var operator()(const std::string& name);
  Tape& tape() const { return tape_; }
  const ParamStore& store() const { return cstore_; }

 private:
  Tape& tape_;
  const ParamStore& cstore_;
  ParamStore* store_ = nullptr;
  std::function<bool(const std::string&)> trainable_;
  std::map<std::string, Var> cache_;
};

}  // namespace hivae
