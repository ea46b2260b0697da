#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "wikiseo/common/error.hpp"
#include "wikiseo/nn/crf.hpp"
#include "wikiseo/nn/gradcheck.hpp"
#include "wikiseo/nn/layers.hpp"

using namespace wikiseo;
using namespace wikiseo::nn;

namespace {

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
  return m;
}

}  // namespace

TEST(Tape, ElementwiseOpsMatchFiniteDifferences) {
  Rng rng(1);
  ParameterStore store;
  Parameter& a = store.add("a", 3, 4, rng);
  Parameter& b = store.add("b", 3, 4, rng);
  Parameter& bias = store.add("bias", 1, 4, rng);
  bias.value = random_mat(rng, 1, 4);
  auto r = check_gradients(store, [&](Tape& t) {
    Var x = t.param(a), y = t.param(b);
    Var z = add_bias(mul(tanh(x), sigmoid(y)), t.param(bias));
    Var s = softmax_rows(sub(z, scale(x, 0.5)));
    Var e = log(add_scalar(exp(scale(s, 2.0)), 1.0));
    return add(sum(mean_rows(e)), mean(max_rows(z)));
  });
  EXPECT_LT(r.relative_error, 1e-6);
}

TEST(Tape, StructuralOpsMatchFiniteDifferences) {
  Rng rng(2);
  ParameterStore store;
  Parameter& a = store.add("a", 4, 3, rng);
  Parameter& b = store.add("b", 3, 5, rng);
  Parameter& w = store.add("w", 1, 2, rng);
  auto r = check_gradients(store, [&](Tape& t) {
    Var x = t.param(a), y = t.param(b);
    Var m = matmul(x, y);                              // 4x5
    Var c = concat_cols({slice_cols(m, 0, 2), transpose(slice_rows(transpose(x), 0, 2))});
    Var top = kmax(m, 3);
    Var rows = concat_rows({slice_rows(m, 0, 1), slice_rows(m, 2, 1)});
    Var ws = weighted_sum(t.param(w), {slice_rows(rows, 0, 1), slice_rows(rows, 1, 1)});
    Var g = gather(ws, {0, 3, 3});
    Var padded = pad_rows(x, 6);
    return add(add(add(sum(top), sum(g)), sum(mul(c, c))), add(topk_mean(ws, 2), sum(mul(padded, padded))));
  });
  EXPECT_LT(r.relative_error, 1e-6);
}

TEST(Tape, CosineOpsMatchFiniteDifferences) {
  Rng rng(3);
  ParameterStore store;
  Parameter& a = store.add("a", 1, 5, rng);
  Parameter& b = store.add("b", 1, 5, rng);
  Parameter& m = store.add("m", 3, 5, rng);
  Parameter& n = store.add("n", 4, 5, rng);
  Parameter& s = store.add("s", 1, 1, rng);
  auto r = check_gradients(store, [&](Tape& t) {
    Var c = cosine(t.param(a), t.param(b));
    Var cm = cosine_matrix(t.param(m), t.param(n));
    Var sc = scale_by(t.param(s), cm);
    return add(c, sum(mul(sc, cm)));
  });
  EXPECT_LT(r.relative_error, 1e-6);
}

TEST(Tape, CosineOfZeroVectorIsZero) {
  Tape t;
  Var z = t.constant(Mat::Zero(1, 3));
  Var v = t.constant(Mat::Ones(1, 3));
  EXPECT_EQ(cosine(z, v).scalar(), 0.0);
}

TEST(Tape, LstmMatchesFiniteDifferences) {
  Rng rng(4);
  ParameterStore store;
  BiLstm enc(store, "enc", 3, 4, rng);
  Parameter& x = store.add("x", 5, 3, rng);
  auto r = check_gradients(store, [&](Tape& t) {
    Var h = enc(t, t.param(x));
    return sum(mul(h, h));
  });
  EXPECT_LT(r.relative_error, 1e-6);
}

TEST(Tape, LstmReverseAlignsRows) {
  Rng rng(5);
  ParameterStore store;
  Lstm cell(store, "c", 2, 3, rng);
  Mat x = random_mat(rng, 4, 2);
  Mat xr = x.colwise().reverse();
  Tape t;
  Mat back = cell(t, t.constant(x), true).value();
  Mat fwd_on_reversed = cell(t, t.constant(xr), false).value();
  EXPECT_TRUE(back.isApprox(fwd_on_reversed.colwise().reverse(), 1e-12));
}

TEST(Crf, PartitionMatchesEnumeration) {
  Rng rng(6);
  const int steps = 4, labels = 3;
  Mat e = random_mat(rng, steps, labels), tr = random_mat(rng, labels, labels);
  Mat st = random_mat(rng, 1, labels), en = random_mat(rng, 1, labels);
  double z = 0.0, best = -1e300;
  std::vector<int> best_path;
  std::vector<int> path(steps, 0);
  for (int code = 0; code < 81; ++code) {
    int c = code;
    for (int t = 0; t < steps; ++t) {
      path[t] = c % labels;
      c /= labels;
    }
    double s = st(0, path[0]) + en(0, path[steps - 1]);
    for (int t = 0; t < steps; ++t) {
      s += e(t, path[t]);
      if (t > 0) s += tr(path[t - 1], path[t]);
    }
    z += std::exp(s);
    if (s > best) {
      best = s;
      best_path = path;
    }
  }
  auto post = crf_posteriors(e, tr, st, en);
  EXPECT_NEAR(post.log_partition, std::log(z), 1e-10);
  for (int t = 0; t < steps; ++t) EXPECT_NEAR(post.unary.row(t).sum(), 1.0, 1e-12);
  EXPECT_EQ(crf_viterbi(e, tr, st, en), best_path);
}

TEST(Crf, NllMatchesFiniteDifferences) {
  Rng rng(7);
  ParameterStore store;
  Parameter& e = store.add("e", 5, 3, rng);
  Parameter& tr = store.add("tr", 3, 3, rng);
  Parameter& st = store.add("st", 1, 3, rng);
  Parameter& en = store.add("en", 1, 3, rng);
  std::vector<int> gold{0, 2, 2, 1, 0};
  auto r = check_gradients(store, [&](Tape& t) {
    return crf_nll(t.param(e), t.param(tr), t.param(st), t.param(en), gold);
  });
  EXPECT_LT(r.relative_error, 1e-6);
}

TEST(Adam, MinimisesQuadratic) {
  Rng rng(8);
  ParameterStore store;
  Parameter& p = store.add("p", 1, 3, rng);
  Adam opt(0.05);
  for (int i = 0; i < 2000; ++i) {
    Tape t;
    Var target = t.constant(Mat::Constant(1, 3, 2.0));
    Var d = sub(t.param(p), target);
    t.backward(sum(mul(d, d)));
    opt.step(store);
  }
  EXPECT_NEAR(p.value(0, 0), 2.0, 1e-3);
}

TEST(ParameterStore, DumpRoundTripsExactly) {
  Rng rng(9);
  ParameterStore a, b;
  Rng r1(9), r2(10);
  Mlp m1(a, "m", {3, 4, 2}, r1);
  Mlp m2(b, "m", {3, 4, 2}, r2);
  std::stringstream ss;
  a.save(ss, "test", "{\"k\":1}");
  EXPECT_EQ(b.load(ss, "test"), "{\"k\":1}");
  EXPECT_EQ(a.flat_values(), b.flat_values());
}

TEST(ParameterStore, RejectsShapeMismatch) {
  ParameterStore a, b;
  Rng r1(1), r2(1);
  a.add("w", 2, 2, r1);
  b.add("w", 2, 3, r2);
  std::stringstream ss;
  a.save(ss, "test", "{}");
  EXPECT_THROW(b.load(ss, "test"), ParseError);
}

TEST(Tape, NormalizeSumMatchesFiniteDifferences) {
  Rng rng(21);
  ParameterStore store;
  Parameter& a = store.add("a", 1, 4, rng);
  a.value = a.value.array().abs() + 0.5;
  Parameter& b = store.add("b", 1, 4, rng);
  auto r = check_gradients(store, [&](Tape& t) { return sum(mul(normalize_sum(t.param(a)), t.param(b))); });
  EXPECT_LT(r.relative_error, 1e-6);
}

TEST(Tape, LeafKeepsGradientAndFrozenParamsStayConstant) {
  Rng rng(22);
  ParameterStore store;
  Parameter& w = store.add("w", 3, 1, rng);
  Tape t;
  t.freeze_parameters(true);
  Var x = t.leaf(Mat::Ones(1, 3));
  Var y = sum(matmul(x, t.param(w)));
  t.backward(y);
  EXPECT_LT((x.grad() - w.value.transpose()).norm(), 1e-12);
  EXPECT_EQ(w.grad.norm(), 0.0);
}
