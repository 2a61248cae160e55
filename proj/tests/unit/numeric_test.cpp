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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>

#include "common/errors.hpp"
#include "numeric/checkpoint.hpp"
#include "numeric/finite_diff.hpp"
#include "numeric/matrix.hpp"
#include "numeric/param_store.hpp"
#include "numeric/rng.hpp"
#include "numeric/sparse.hpp"
#include "numeric/tape.hpp"
#include "test_util.hpp"

namespace hivae {
namespace {

using testing::random_matrix;

TEST(Elementwise, Basics) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(std::tanh(0.0), 0.0);
  const auto s = softmax(std::vector<double>{2.5, 2.5, 2.5});
  for (double v : s) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
  EXPECT_NEAR(log_sigmoid(800.0), 0.0, 1e-300);
  EXPECT_TRUE(std::isfinite(log_sigmoid(-1e6)));
}

TEST(Softmax, NormalizedAndPositive) {
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x(1 + rng.index(50));
    for (double& v : x) v = rng.uniform(-50, 50);
    const auto s = softmax(x);
    double total = 0.0;
    for (double v : s) {
      EXPECT_GT(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Matmul, VariantsAgree) {
  Rng rng(2);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(3, 5, rng);
  const Matrix c = matmul(a, b);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < 3; ++k) ref += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), ref, 1e-14);
    }
  EXPECT_EQ(matmul_nt(a, transpose(b)), c);
  EXPECT_EQ(matmul_tn(transpose(a), b), c);
  EXPECT_THROW(matmul(a, a), ContractError);
}

TEST(Sparse, SpmmMatchesDense) {
  Rng rng(3);
  std::vector<Triplet> trip;
  for (std::uint32_t i = 0; i < 6; ++i)
    for (std::uint32_t j = 0; j < 5; ++j)
      if (rng.bernoulli(0.4)) trip.push_back({i, j, rng.normal()});
  trip.push_back({0, 0, 1.0});
  trip.push_back({0, 0, 2.0});
  const SparseMatrix s = SparseMatrix::from_triplets(6, 5, trip);
  const Matrix dense = s.to_dense();
  const Matrix x = random_matrix(5, 3, rng);
  const Matrix got = spmm(s, x);
  const Matrix ref = matmul(dense, x);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data()[i], ref.data()[i], 1e-14);

  const Matrix g = random_matrix(6, 3, rng);
  Matrix acc(5, 3);
  spmm_tn_acc(s, g, acc);
  const Matrix ref_t = matmul_tn(dense, g);
  for (std::size_t i = 0; i < acc.size(); ++i) EXPECT_NEAR(acc.data()[i], ref_t.data()[i], 1e-14);
  EXPECT_EQ(s.transpose().to_dense(), transpose(dense));
}

TEST(Rng, DeterministicAndSubstreamsIndependent) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  EXPECT_NE(Rng(42).substream(1).next_u64(), Rng(42).substream(2).next_u64());
  EXPECT_EQ(Rng(42).substream(1).next_u64(), Rng(42).substream(1).next_u64());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(5);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(rng.index(7), 7u);
}

TEST(Adam, ZeroGradientLeavesValues) {
  ParamStore store;
  store.add("w", Matrix(2, 2, 1.5));
  const Matrix before = store.value("w");
  adam_step(store, {"w"}, {});
  EXPECT_EQ(store.value("w"), before);
}

TEST(Adam, FirstStepClosedForm) {
  // Bias-corrected first step is lr * g / (|g| + eps).
  ParamStore store;
  store.add("x", Matrix(1, 1, 0.0));
  store.get("x").grad(0, 0) = 1.0;
  AdamConfig cfg;
  adam_step(store, {"x"}, cfg);
  EXPECT_NEAR(store.value("x")(0, 0), -cfg.lr * 1.0 / (1.0 + cfg.eps), 1e-15);
  // Constant gradient keeps the step at lr.
  for (int i = 0; i < 5; ++i) {
    const double prev = store.value("x")(0, 0);
    store.get("x").grad(0, 0) = 1.0;
    adam_step(store, {"x"}, cfg);
    EXPECT_NEAR(store.value("x")(0, 0) - prev, -cfg.lr, 1e-10);
  }
}

TEST(Adam, IdenticalStoresIdenticalUpdates) {
  Rng rng(9);
  ParamStore a;
  a.add("w", random_matrix(3, 3, rng));
  ParamStore b = a;
  for (int i = 0; i < 4; ++i) {
    const Matrix g = random_matrix(3, 3, rng);
    a.get("w").grad = g;
    b.get("w").grad = g;
    adam_step(a, {"w"}, {});
    adam_step(b, {"w"}, {});
  }
  EXPECT_EQ(a.value("w"), b.value("w"));
}

TEST(Adam, NonFiniteGradientAbortsWithName) {
  ParamStore store;
  store.add("good", Matrix(1, 1, 0.0));
  store.add("bad", Matrix(1, 1, 0.0));
  store.get("good").grad(0, 0) = 1.0;
  store.get("bad").grad(0, 0) = std::nan("");
  try {
    adam_step(store, {"good", "bad"}, {});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
  EXPECT_EQ(store.value("good")(0, 0), 0.0);
}

TEST(FiniteDiff, ScalarOracles) {
  EXPECT_NEAR(finite_diff([](double x) { return x * x; }, 3.0, 1e-5), 6.0, 1e-6);
  EXPECT_EQ(finite_diff([](double) { return 4.2; }, 1.0), 0.0);
  EXPECT_NEAR(finite_diff([](double x) { return sigmoid(x); }, 0.0, 1e-5), 0.25, 1e-6);
}

TEST(FiniteDiff, TensorRestoredExactly) {
  Rng rng(4);
  ParamStore store;
  store.add("w", random_matrix(3, 2, rng));
  const Matrix before = store.value("w");
  auto f = [](const ParamStore& s) { return sum_squares(s.value("w")); };
  const Matrix g = finite_diff_grad(f, store, "w");
  const Matrix g5 = finite_diff_grad5(f, store, "w");
  EXPECT_EQ(store.value("w"), before);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(g.data()[i], 2 * before.data()[i], 1e-8);
    EXPECT_NEAR(g5.data()[i], 2 * before.data()[i], 1e-9);
  }
}

TEST(RelativeError, Definition) {
  EXPECT_EQ(relative_error(1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(1.0, 3.0), 0.5);
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(1e-9, 0.0), 1e-9 / 1e-8);
}

// Gradient of every tape op against five-point finite differences. Each op
// is wrapped into a scalar loss sum(op(...) * R) with a fixed random R so
// every output entry contributes.
struct OpCase {
  std::string name;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  std::function<Var(Tape&, std::vector<Var>&)> build;
};

double wrapped_loss(const OpCase& op, const ParamStore& store, const Matrix* weights, ParamStore* grads) {
  Tape tape;
  std::vector<Var> in;
  for (std::size_t i = 0; i < op.shapes.size(); ++i) {
    const std::string name = "x" + std::to_string(i);
    in.push_back(grads ? tape.param(*grads, name) : tape.constant(store.value(name)));
  }
  Var out = op.build(tape, in);
  Var loss = weights && !weights->empty() && out.value().same_shape(*weights)
                 ? ad::sum(ad::mul_const(out, *weights))
                 : ad::sum(out);
  if (grads) tape.backward(loss);
  return loss.scalar();
}

std::vector<OpCase> op_cases() {
  using V = std::vector<Var>;
  const SparseMatrix* sp = [] {
    static SparseMatrix s = SparseMatrix::from_triplets(3, 4, {{0, 1, 0.5}, {1, 0, -1.0}, {2, 3, 2.0}, {2, 1, 0.25}});
    return &s;
  }();
  const std::vector<std::size_t> off{0, 2, 5, 6};
  static const Matrix ones_target(4, 3, 0.3);
  static Matrix pos_w = [] {
    Matrix m(4, 3, 0.5);
    m(1, 2) = 3.0;
    return m;
  }();
  static Matrix neg_w = [] {
    Matrix m(4, 3, 1.0);
    m(0, 0) = 0.0;
    return m;
  }();
  static Matrix konst = [] {
    Matrix m(4, 3);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = 0.1 * static_cast<double>(i) - 0.4;
    return m;
  }();
  return {
      {"matmul", {{4, 3}, {3, 2}}, [](Tape&, V& v) { return ad::matmul(v[0], v[1]); }},
      {"matmul_nt", {{4, 3}, {2, 3}}, [](Tape&, V& v) { return ad::matmul_nt(v[0], v[1]); }},
      {"spmm", {{4, 2}}, [sp](Tape&, V& v) { return ad::spmm(*sp, v[0]); }},
      {"gather_rows", {{4, 3}}, [](Tape&, V& v) { return ad::gather_rows(v[0], {3, 0, 3, 1}); }},
      {"add", {{4, 3}, {4, 3}}, [](Tape&, V& v) { return ad::add(v[0], v[1]); }},
      {"sub", {{4, 3}, {4, 3}}, [](Tape&, V& v) { return ad::sub(v[0], v[1]); }},
      {"scale", {{4, 3}}, [](Tape&, V& v) { return ad::scale(v[0], -2.5); }},
      {"add_row", {{4, 3}, {1, 3}}, [](Tape&, V& v) { return ad::add_row(v[0], v[1]); }},
      {"mul_const", {{4, 3}}, [](Tape&, V& v) { return ad::mul_const(v[0], konst); }},
      {"relu", {{4, 3}}, [](Tape&, V& v) { return ad::relu(v[0]); }},
      {"tanh", {{4, 3}}, [](Tape&, V& v) { return ad::tanh(v[0]); }},
      {"sigmoid", {{4, 3}}, [](Tape&, V& v) { return ad::sigmoid(v[0]); }},
      {"exp", {{4, 3}}, [](Tape&, V& v) { return ad::exp(v[0]); }},
      {"clamp", {{4, 3}}, [](Tape&, V& v) { return ad::clamp(v[0], -0.7, 0.9); }},
      {"slice_cols", {{4, 5}}, [](Tape&, V& v) { return ad::slice_cols(v[0], 1, 4); }},
      {"concat_cols", {{4, 2}, {4, 1}}, [](Tape&, V& v) { return ad::concat_cols(v[0], v[1]); }},
      {"rowdot", {{4, 3}, {4, 3}}, [](Tape&, V& v) { return ad::rowdot(v[0], v[1]); }},
      {"segment_softmax", {{6, 1}}, [off](Tape&, V& v) { return ad::segment_softmax(v[0], off); }},
      {"segment_weighted_sum", {{6, 1}, {6, 3}},
       [off](Tape&, V& v) { return ad::segment_weighted_sum(v[0], v[1], off); }},
      {"segment_mean", {{6, 3}}, [off](Tape&, V& v) { return ad::segment_mean(v[0], off); }},
      {"sum", {{4, 3}}, [](Tape&, V& v) { return ad::sum(v[0]); }},
      {"sum_squares", {{4, 3}}, [](Tape&, V& v) { return ad::sum_squares(v[0]); }},
      {"kl_diag_gaussian", {{4, 3}, {4, 3}}, [](Tape&, V& v) { return ad::kl_diag_gaussian(v[0], v[1]); }},
      {"weighted_sq_error", {{4, 3}},
       [](Tape&, V& v) { return ad::weighted_sq_error(v[0], ones_target, pos_w); }},
      {"weighted_logistic", {{4, 3}}, [](Tape&, V& v) { return ad::weighted_logistic(v[0], pos_w, neg_w); }},
  };
}

class TapeOpGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(TapeOpGradient, MatchesFiniteDifferencesAtRandomPoints) {
  const OpCase op = op_cases()[GetParam()];
  Rng rng(100 + GetParam());
  std::size_t checked = 0;
  for (int point = 0; point < 100; ++point) {
    ParamStore store;
    for (std::size_t i = 0; i < op.shapes.size(); ++i) {
      Matrix x = random_matrix(op.shapes[i].first, op.shapes[i].second, rng);
      store.add("x" + std::to_string(i), std::move(x));
    }
    // Output weights of the right shape, drawn once the output shape is known.
    Matrix probe_weights;
    {
      Tape tape;
      std::vector<Var> in;
      for (std::size_t i = 0; i < op.shapes.size(); ++i) in.push_back(tape.constant(store.value("x" + std::to_string(i))));
      const Var out = op.build(tape, in);
      probe_weights = random_matrix(out.rows(), out.cols(), rng);
    }
    ParamStore grads = store;
    grads.zero_grad();
    wrapped_loss(op, store, &probe_weights, &grads);
    for (std::size_t i = 0; i < op.shapes.size(); ++i) {
      const std::string name = "x" + std::to_string(i);
      auto f = [&](const ParamStore& s) { return wrapped_loss(op, s, &probe_weights, nullptr); };
      const Matrix numeric = finite_diff_grad5(f, store, name, 1e-4);
      const Matrix& analytic = grads.get(name).grad;
      for (std::size_t e = 0; e < numeric.size(); ++e) {
        const double x = store.value(name).data()[e];
        // Skip entries within reach of a kink of relu/clamp.
        if ((op.name == "relu" && std::abs(x) < 1e-3) ||
            (op.name == "clamp" && (std::abs(x + 0.7) < 1e-3 || std::abs(x - 0.9) < 1e-3)))
          continue;
        EXPECT_LT(relative_error(analytic.data()[e], numeric.data()[e]), 1e-4)
            << op.name << " input " << i << " entry " << e << " point " << point;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100u);
}

INSTANTIATE_TEST_SUITE_P(AllOps, TapeOpGradient, ::testing::Range<std::size_t>(0, op_cases().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) { return op_cases()[info.param].name; });

TEST(Tape, ParamBindingAccumulatesOnce) {
  ParamStore store;
  store.add("w", Matrix(1, 1, 2.0));
  store.zero_grad();
  Tape tape;
  Var a = tape.param(store, "w");
  Var b = tape.param(store, "w");
  EXPECT_EQ(a.id, b.id);
  tape.backward(ad::sum(ad::add(ad::scale(a, 3.0), b)));
  EXPECT_EQ(store.get("w").grad(0, 0), 4.0);
}

TEST(ParamStore, NamesUniqueAndChecksum) {
  ParamStore store;
  store.add("a", Matrix(2, 2, 1.0));
  EXPECT_THROW(store.add("a", Matrix(1, 1)), ContractError);
  store.add("b", Matrix(1, 3, 0.5));
  const auto c1 = store.checksum({"a", "b"});
  store.value("b")(0, 1) = 0.25;
  EXPECT_NE(store.checksum({"a", "b"}), c1);
  EXPECT_EQ(store.checksum({"a"}), ParamStore(store).checksum({"a"}));
  EXPECT_EQ(store.names_with_prefix("a"), (std::vector<std::string>{"a"}));
}

TEST(Checkpoint, RoundTripBitExact) {
  testing::TempDir dir("ckpt");
  Rng rng(6);
  ParamStore store;
  store.add("enc.w", random_matrix(5, 3, rng));
  store.add("diff.sender", random_matrix(7, 2, rng));
  store.value("enc.w")(0, 0) = -0.0;
  save_tensors(store, dir / "c.bin");
  const ParamStore back = load_tensors(dir / "c.bin");
  EXPECT_EQ(back.names(), store.names());
  for (const auto& name : store.names()) {
    EXPECT_EQ(std::memcmp(back.value(name).data(), store.value(name).data(), store.value(name).size() * 8), 0);
    EXPECT_EQ(back.value(name).rows(), store.value(name).rows());
  }
}

TEST(Checkpoint, CorruptFileRejected) {
  testing::TempDir dir("ckpt_bad");
  testing::write_file(dir / "c.bin", "not a checkpoint");
  EXPECT_THROW(load_tensors(dir / "c.bin"), IoError);
  EXPECT_THROW(load_tensors(dir / "missing.bin"), IoError);
}

}  // namespace
}  // namespace hivae
