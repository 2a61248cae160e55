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

#include "numeric/tape.hpp"

#include <cmath>

namespace hivae {

const Matrix& Var::value() const { return tape->value(id); }

double Var::scalar() const {
  const Matrix& m = value();
  if (m.rows() != 1 || m.cols() != 1) throw ContractError("Var::scalar on " + shape_str(m));
  return m(0, 0);
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, {}); }

Var Tape::constant_ref(const Matrix& value) {
  Var v = push(Matrix(), false, {});
  nodes_.back().ref = &value;
  return v;
}

Var Tape::variable(Matrix value) { return push(std::move(value), true, {}); }

Var Tape::param(ParamStore& store, const std::string& name) {
  if (auto it = param_nodes_.find(name); it != param_nodes_.end()) return Var{this, it->second};
  Param& p = store.get(name);
  Var v = push(Matrix(), true, {});
  nodes_.back().ref = &p.value;
  param_nodes_.emplace(name, v.id);
  param_links_.emplace_back(v.id, &p);
  return v;
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) {
    const Matrix& v = value(id);
    if (!v.empty()) n.grad = Matrix(v.rows(), v.cols());
  }
  return n.grad;
}

Var Tape::push(Matrix value, bool needs_grad, std::function<void()> backward) {
  nodes_.push_back(Node{std::move(value), nullptr, Matrix(), needs_grad, std::move(backward)});
  return Var{this, nodes_.size() - 1};
}

void Tape::backward(Var out) {
  if (out.tape != this) throw ContractError("Tape::backward: foreign variable");
  if (value(out.id).size() != 1) throw ContractError("Tape::backward: output must be 1x1");
  grad(out.id)(0, 0) += 1.0;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || !n.backward || n.grad.empty()) continue;
    n.backward();
  }
  for (auto& [id, param] : param_links_) {
    const Node& n = nodes_[id];
    if (!n.grad.empty()) param->grad += n.grad;
  }
}

namespace ad {
namespace {

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape || a.tape == nullptr) throw ContractError("ad: variables on different tapes");
  return *a.tape;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Matrix out = hivae::matmul(a.value(), b.value());
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.push(std::move(out), ng, [&t, a, b, id = t.size()] {
    const Matrix& g = t.grad(id);
    if (t.needs_grad(a.id)) matmul_nt_acc(g, b.value(), t.grad(a.id));
    if (t.needs_grad(b.id)) matmul_tn_acc(a.value(), g, t.grad(b.id));
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Matrix out = hivae::matmul_nt(a.value(), b.value());
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.push(std::move(out), ng, [&t, a, b, id = t.size()] {
    const Matrix& g = t.grad(id);
    if (t.needs_grad(a.id)) matmul_acc(g, b.value(), t.grad(a.id));
    if (t.needs_grad(b.id)) matmul_tn_acc(g, a.value(), t.grad(b.id));
  });
}

Var spmm(const SparseMatrix& s, Var x) {
  Tape& t = *x.tape;
  Matrix out = hivae::spmm(s, x.value());
  return t.push(std::move(out), t.needs_grad(x.id), [&t, &s, x, id = t.size()] {
    spmm_tn_acc(s, t.grad(id), t.grad(x.id));
  });
}

Var gather_rows(Var x, std::vector<std::uint32_t> rows) {
  Tape& t = *x.tape;
  const Matrix& xv = x.value();
  Matrix out(rows.size(), xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= xv.rows()) throw ContractError("gather_rows: index out of range");
    auto src = xv.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return t.push(std::move(out), t.needs_grad(x.id), [&t, x, rows = std::move(rows), id = t.size()] {
    const Matrix& g = t.grad(id);
    Matrix& gx = t.grad(x.id);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = g.row(i);
      auto dst = gx.row(rows[i]);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Matrix out = a.value() + b.value();
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.push(std::move(out), ng, [&t, a, b, id = t.size()] {
    const Matrix& g = t.grad(id);
    if (t.needs_grad(a.id)) t.grad(a.id) += g;
    if (t.needs_grad(b.id)) t.grad(b.id) += g;
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Matrix out = a.value() - b.value();
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.push(std::move(out), ng, [&t, a, b, id = t.size()] {
    const Matrix& g = t.grad(id);
    if (t.needs_grad(a.id)) t.grad(a.id) += g;
    if (t.needs_grad(b.id)) t.grad(b.id) -= g;
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape;
  Matrix out = a.value() * s;
  return t.push(std::move(out), t.needs_grad(a.id), [&t, a, s, id = t.size()] {
    const Matrix& g = t.grad(id);
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += s * g.data()[i];
  });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) throw ContractError("add_row: shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += rv(0, j);
  const bool ng = t.needs_grad(a.id) || t.needs_grad(row.id);
  return t.push(std::move(out), ng, [&t, a, row, id = t.size()] {
    const Matrix& g = t.grad(id);
    if (t.needs_grad(a.id)) t.grad(a.id) += g;
    if (t.needs_grad(row.id)) {
      Matrix& gr = t.grad(row.id);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
    }
  });
}

Var mul_const(Var a, const Matrix& c) {
  Tape& t = *a.tape;
  Matrix out = hadamard(a.value(), c);
  return t.push(std::move(out), t.needs_grad(a.id), [&t, a, c, id = t.size()] {
    const Matrix& g = t.grad(id);
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * c.data()[i];
  });
}

namespace {

// Elementwise op whose derivative is expressed through the input x and the
// output y.
template <typename F, typename DF>
Var unary(Var a, F f, DF df) {
  Tape& t = *a.tape;
  Matrix out = a.value();
  for (double& v : out.flat()) v = f(v);
  return t.push(std::move(out), t.needs_grad(a.id), [&t, a, df, id = t.size()] {
    const Matrix& g = t.grad(id);
    const Matrix& x = a.value();
    const Matrix& y = t.value(id);
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * df(x.data()[i], y.data()[i]);
  });
}

}  // namespace

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return hivae::sigmoid(x); }, [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
      [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape& t = *a.tape;
  const Matrix& av = a.value();
  if (begin > end || end > av.cols()) throw ContractError("slice_cols: range out of bounds");
  Matrix out(av.rows(), end - begin);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = av(i, j);
  return t.push(std::move(out), t.needs_grad(a.id), [&t, a, begin, end, id = t.size()] {
    const Matrix& g = t.grad(id);
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = begin; j < end; ++j) ga(i, j) += g(i, j - begin);
  });
}

Var concat_cols(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows()) throw ContractError("concat_cols: row mismatch");
  Matrix out(av.rows(), av.cols() + bv.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j);
    for (std::size_t j = 0; j < bv.cols(); ++j) out(i, av.cols() + j) = bv(i, j);
  }
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.push(std::move(out), ng, [&t, a, b, id = t.size()] {
    const Matrix& g = t.grad(id);
    const std::size_t ac = a.value().cols();
    if (t.needs_grad(a.id)) {
      Matrix& ga = t.grad(a.id);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < ac; ++j) ga(i, j) += g(i, j);
    }
    if (t.needs_grad(b.id)) {
      Matrix& gb = t.grad(b.id);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < gb.cols(); ++j) gb(i, j) += g(i, ac + j);
    }
  });
}

Var rowdot(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "rowdot");
  Matrix out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) out(i, 0) = dot(a.value().row(i), b.value().row(i));
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.push(std::move(out), ng, [&t, a, b, id = t.size()] {
    const Matrix& g = t.grad(id);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    if (t.needs_grad(a.id)) {
      Matrix& ga = t.grad(a.id);
      for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < av.cols(); ++j) ga(i, j) += g(i, 0) * bv(i, j);
    }
    if (t.needs_grad(b.id)) {
      Matrix& gb = t.grad(b.id);
      for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < av.cols(); ++j) gb(i, j) += g(i, 0) * av(i, j);
    }
  });
}

namespace {

void check_offsets(const std::vector<std::size_t>& offsets, std::size_t rows) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != rows)
    throw ContractError("segment op: offsets do not cover the input rows");
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s)
    if (offsets[s] >= offsets[s + 1]) throw ContractError("segment op: empty segment");
}

}  // namespace

Var segment_softmax(Var x, const std::vector<std::size_t>& offsets) {
  Tape& t = *x.tape;
  const Matrix& xv = x.value();
  if (xv.cols() != 1) throw ContractError("segment_softmax: expects a column vector");
  check_offsets(offsets, xv.rows());
  Matrix out(xv.rows(), 1);
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const auto sm = softmax(std::span<const double>(xv.data() + offsets[s], offsets[s + 1] - offsets[s]));
    std::copy(sm.begin(), sm.end(), out.data() + offsets[s]);
  }
  return t.push(std::move(out), t.needs_grad(x.id), [&t, x, offsets, id = t.size()] {
    const Matrix& g = t.grad(id);
    const Matrix& y = t.value(id);
    Matrix& gx = t.grad(x.id);
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      double inner = 0.0;
      for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) inner += g(i, 0) * y(i, 0);
      for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) gx(i, 0) += y(i, 0) * (g(i, 0) - inner);
    }
  });
}

Var segment_weighted_sum(Var w, Var x, const std::vector<std::size_t>& offsets) {
  Tape& t = tape_of(w, x);
  const Matrix& wv = w.value();
  const Matrix& xv = x.value();
  if (wv.cols() != 1 || wv.rows() != xv.rows()) throw ContractError("segment_weighted_sum: shape mismatch");
  check_offsets(offsets, xv.rows());
  const std::size_t nseg = offsets.size() - 1;
  Matrix out(nseg, xv.cols());
  for (std::size_t s = 0; s < nseg; ++s)
    for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
      for (std::size_t j = 0; j < xv.cols(); ++j) out(s, j) += wv(i, 0) * xv(i, j);
  const bool ng = t.needs_grad(w.id) || t.needs_grad(x.id);
  return t.push(std::move(out), ng, [&t, w, x, offsets, id = t.size()] {
    const Matrix& g = t.grad(id);
    const Matrix& wv = w.value();
    const Matrix& xv = x.value();
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) {
        if (t.needs_grad(w.id)) t.grad(w.id)(i, 0) += dot(g.row(s), xv.row(i));
        if (t.needs_grad(x.id)) {
          Matrix& gx = t.grad(x.id);
          for (std::size_t j = 0; j < xv.cols(); ++j) gx(i, j) += wv(i, 0) * g(s, j);
        }
      }
    }
  });
}

Var segment_mean(Var x, const std::vector<std::size_t>& offsets) {
  Tape& t = *x.tape;
  const Matrix& xv = x.value();
  check_offsets(offsets, xv.rows());
  const std::size_t nseg = offsets.size() - 1;
  Matrix out(nseg, xv.cols());
  for (std::size_t s = 0; s < nseg; ++s) {
    const double inv = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
    for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
      for (std::size_t j = 0; j < xv.cols(); ++j) out(s, j) += inv * xv(i, j);
  }
  return t.push(std::move(out), t.needs_grad(x.id), [&t, x, offsets, id = t.size()] {
    const Matrix& g = t.grad(id);
    Matrix& gx = t.grad(x.id);
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      const double inv = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
      for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
        for (std::size_t j = 0; j < gx.cols(); ++j) gx(i, j) += inv * g(s, j);
    }
  });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  Matrix out(1, 1, hivae::sum(a.value()));
  return t.push(std::move(out), t.needs_grad(a.id), [&t, a, id = t.size()] {
    const double g = t.grad(id)(0, 0);
    for (double& v : t.grad(a.id).flat()) v += g;
  });
}

Var sum_squares(Var a) {
  Tape& t = *a.tape;
  Matrix out(1, 1, hivae::sum_squares(a.value()));
  return t.push(std::move(out), t.needs_grad(a.id), [&t, a, id = t.size()] {
    const double g = t.grad(id)(0, 0);
    const Matrix& av = a.value();
    Matrix& ga = t.grad(a.id);
    for (std::size_t i = 0; i < av.size(); ++i) ga.data()[i] += 2.0 * g * av.data()[i];
  });
}

Var kl_diag_gaussian(Var mu, Var logvar) {
  Tape& t = tape_of(mu, logvar);
  require_same_shape(mu.value(), logvar.value(), "kl_diag_gaussian");
  double kl = 0.0;
  const Matrix& m = mu.value();
  const Matrix& lv = logvar.value();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double mi = m.data()[i];
    const double li = lv.data()[i];
    kl += 0.5 * (mi * mi + std::exp(li) - 1.0 - li);
  }
  const bool ng = t.needs_grad(mu.id) || t.needs_grad(logvar.id);
  return t.push(Matrix(1, 1, kl), ng, [&t, mu, logvar, id = t.size()] {
    const double g = t.grad(id)(0, 0);
    const Matrix& m = mu.value();
    const Matrix& lv = logvar.value();
    if (t.needs_grad(mu.id)) {
      Matrix& gm = t.grad(mu.id);
      for (std::size_t i = 0; i < m.size(); ++i) gm.data()[i] += g * m.data()[i];
    }
    if (t.needs_grad(logvar.id)) {
      Matrix& gl = t.grad(logvar.id);
      for (std::size_t i = 0; i < lv.size(); ++i) gl.data()[i] += g * 0.5 * (std::exp(lv.data()[i]) - 1.0);
    }
  });
}

Var weighted_sq_error(Var pred, const Matrix& target, const Matrix& weights) {
  Tape& t = *pred.tape;
  require_same_shape(pred.value(), target, "weighted_sq_error");
  require_same_shape(pred.value(), weights, "weighted_sq_error");
  const Matrix& p = pred.value();
  double total = 0.0;
  Matrix dpred(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = weights.data()[i];
    const double r = target.data()[i] - p.data()[i];
    total += w * w * r * r;
    dpred.data()[i] = -2.0 * w * w * r;
  }
  return t.push(Matrix(1, 1, total), t.needs_grad(pred.id),
                [&t, pred, dpred = std::move(dpred), id = t.size()] {
                  const double g = t.grad(id)(0, 0);
                  Matrix& gp = t.grad(pred.id);
                  for (std::size_t i = 0; i < gp.size(); ++i) gp.data()[i] += g * dpred.data()[i];
                });
}

Var weighted_logistic(Var logits, const Matrix& pos_w, const Matrix& neg_w) {
  Tape& t = *logits.tape;
  require_same_shape(logits.value(), pos_w, "weighted_logistic");
  require_same_shape(logits.value(), neg_w, "weighted_logistic");
  const Matrix& x = logits.value();
  double total = 0.0;
  Matrix dx(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x.data()[i];
    const double pw = pos_w.data()[i];
    const double nw = neg_w.data()[i];
    if (pw == 0.0 && nw == 0.0) continue;
    const double s = hivae::sigmoid(xi);
    // log(1 - sigmoid(x)) = log_sigmoid(-x)
    if (pw != 0.0) total += pw * log_sigmoid(xi);
    if (nw != 0.0) total += nw * log_sigmoid(-xi);
    dx.data()[i] = pw * (1.0 - s) - nw * s;
  }
  return t.push(Matrix(1, 1, total), t.needs_grad(logits.id),
                [&t, logits, dx = std::move(dx), id = t.size()] {
                  const double g = t.grad(id)(0, 0);
                  Matrix& gl = t.grad(logits.id);
                  for (std::size_t i = 0; i < gl.size(); ++i) gl.data()[i] += g * dx.data()[i];
                });
}

}  // namespace ad
}  // namespace hivae

namespace hivae {

Var Binder::operator()(const std::string& name) {
  if (auto it = cache_.find(name); it != cache_.end()) return it->second;
  Var v = (store_ != nullptr && trainable_ && trainable_(name)) ? tape_.param(*store_, name)
                                                                 : tape_.constant_ref(cstore_.value(name));
  cache_.emplace(name, v);
  return v;
}

}  // namespace hivae
