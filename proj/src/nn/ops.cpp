#include "wikiseo/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "wikiseo/common/error.hpp"
#include "wikiseo/nn/crf.hpp"

namespace wikiseo::nn {
namespace {

constexpr double kNormFloor = 1e-12;

Tape& tape_of(const Var& a) { return *a.tape(); }

void same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Var add(Var a, Var b) {
  same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate_expr(ib, -t.grad(self));
  });
}

Var mul(Var a, Var b) {
  same_shape(a, b, "mul");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate_expr(ia, t.grad(self).cwiseProduct(t.value(ib)));
    t.accumulate_expr(ib, t.grad(self).cwiseProduct(t.value(ia)));
  });
}

Var scale(Var a, double s) {
  const int ia = a.id();
  return tape_of(a).record(a.value() * s, {a}, [ia, s](Tape& t, int self) {
    t.accumulate_expr(ia, t.grad(self) * s);
  });
}

Var add_scalar(Var a, double s) {
  const int ia = a.id();
  return tape_of(a).record(a.value().array() + s, {a},
                           [ia](Tape& t, int self) { t.accumulate(ia, t.grad(self)); });
}

Var neg(Var a) { return scale(a, -1.0); }

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw ContractError("matmul: inner dimension mismatch");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    if (t.needs_grad(ia)) t.accumulate_expr(ia, t.grad(self) * t.value(ib).transpose());
    if (t.needs_grad(ib)) t.accumulate_expr(ib, t.value(ia).transpose() * t.grad(self));
  });
}

Var transpose(Var a) {
  const int ia = a.id();
  return tape_of(a).record(a.value().transpose(), {a}, [ia](Tape& t, int self) {
    t.accumulate_expr(ia, t.grad(self).transpose());
  });
}

Var add_bias(Var a, Var bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) throw ContractError("add_bias: shape mismatch");
  const int ia = a.id(), ib = bias.id();
  Mat out = a.value().rowwise() + bias.value().row(0);
  return tape_of(a).record(std::move(out), {a, bias}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate_expr(ib, t.grad(self).colwise().sum());
  });
}

Var scale_by(Var s, Var a) {
  if (s.rows() != 1 || s.cols() != 1) throw ContractError("scale_by: scalar expected");
  const int is = s.id(), ia = a.id();
  return tape_of(a).record(a.value() * s.scalar(), {s, a}, [is, ia](Tape& t, int self) {
    const Mat& g = t.grad(self);
    t.accumulate_expr(ia, g * t.value(is)(0, 0));
    t.accumulate_expr(is, Mat::Constant(1, 1, g.cwiseProduct(t.value(ia)).sum()));
  });
}

Var tanh(Var a) {
  const int ia = a.id();
  Mat y = a.value().array().tanh();
  return tape_of(a).record(std::move(y), {a}, [ia](Tape& t, int self) {
    const Mat& y = t.value(self);
    t.accumulate_expr(ia, t.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var sigmoid(Var a) {
  const int ia = a.id();
  Mat y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return tape_of(a).record(std::move(y), {a}, [ia](Tape& t, int self) {
    const Mat& y = t.value(self);
    t.accumulate_expr(ia, t.grad(self).cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  });
}

Var exp(Var a) {
  const int ia = a.id();
  Mat y = a.value().array().exp();
  return tape_of(a).record(std::move(y), {a}, [ia](Tape& t, int self) {
    t.accumulate_expr(ia, t.grad(self).cwiseProduct(t.value(self)));
  });
}

Var log(Var a) {
  const int ia = a.id();
  Mat y = a.value().array().log();
  return tape_of(a).record(std::move(y), {a}, [ia](Tape& t, int self) {
    t.accumulate_expr(ia, t.grad(self).cwiseQuotient(t.value(ia)));
  });
}

Var clamp(Var a, double lo, double hi) {
  const int ia = a.id();
  Mat y = a.value().cwiseMax(lo).cwiseMin(hi);
  return tape_of(a).record(std::move(y), {a}, [ia, lo, hi](Tape& t, int self) {
    const Mat& x = t.value(ia);
    Mat g = t.grad(self);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (x(i) < lo || x(i) > hi) g(i) = 0.0;
    }
    t.accumulate(ia, g);
  });
}

Var sum(Var a) {
  const int ia = a.id();
  const Eigen::Index r = a.rows(), c = a.cols();
  return tape_of(a).record(Mat::Constant(1, 1, a.value().sum()), {a}, [ia, r, c](Tape& t, int self) {
    t.accumulate_expr(ia, Mat::Constant(r, c, t.grad(self)(0, 0)));
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var mean_rows(Var a) {
  const int ia = a.id();
  const Eigen::Index r = a.rows();
  Mat y = a.value().colwise().mean();
  return tape_of(a).record(std::move(y), {a}, [ia, r](Tape& t, int self) {
    t.accumulate_expr(ia, t.grad(self).replicate(r, 1) / static_cast<double>(r));
  });
}

Var max_rows(Var a) {
  const int ia = a.id();
  const Mat& x = a.value();
  Mat y(1, x.cols());
  std::vector<Eigen::Index> arg(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < x.rows(); ++i) {
      if (x(i, j) > x(best, j)) best = i;
    }
    arg[j] = best;
    y(0, j) = x(best, j);
  }
  const Eigen::Index r = x.rows(), c = x.cols();
  return tape_of(a).record(std::move(y), {a}, [ia, arg, r, c](Tape& t, int self) {
    Mat g = Mat::Zero(r, c);
    for (Eigen::Index j = 0; j < c; ++j) g(arg[j], j) = t.grad(self)(0, j);
    t.accumulate(ia, g);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const Eigen::Index r = parts.front().rows();
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    require(p.rows() == r, "concat_cols: row mismatch");
    c += p.cols();
  }
  Mat y(r, c);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    y.middleCols(off, p.cols()) = p.value();
    layout.emplace_back(p.id(), off);
    off += p.cols();
  }
  return tape_of(parts.front()).record(std::move(y), parts, [layout](Tape& t, int self) {
    for (const auto& [id, o] : layout) {
      if (t.needs_grad(id)) t.accumulate_expr(id, t.grad(self).middleCols(o, t.value(id).cols()));
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const Eigen::Index c = parts.front().cols();
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    require(p.cols() == c, "concat_rows: column mismatch");
    r += p.rows();
  }
  Mat y(r, c);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    y.middleRows(off, p.rows()) = p.value();
    layout.emplace_back(p.id(), off);
    off += p.rows();
  }
  return tape_of(parts.front()).record(std::move(y), parts, [layout](Tape& t, int self) {
    for (const auto& [id, o] : layout) {
      if (t.needs_grad(id)) t.accumulate_expr(id, t.grad(self).middleRows(o, t.value(id).rows()));
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(), "slice_rows: out of range");
  const int ia = a.id();
  const Eigen::Index r = a.rows(), c = a.cols();
  return tape_of(a).record(a.value().middleRows(start, count), {a},
                           [ia, start, count, r, c](Tape& t, int self) {
                             Mat g = Mat::Zero(r, c);
                             g.middleRows(start, count) = t.grad(self);
                             t.accumulate(ia, g);
                           });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols: out of range");
  const int ia = a.id();
  const Eigen::Index r = a.rows(), c = a.cols();
  return tape_of(a).record(a.value().middleCols(start, count), {a},
                           [ia, start, count, r, c](Tape& t, int self) {
                             Mat g = Mat::Zero(r, c);
                             g.middleCols(start, count) = t.grad(self);
                             t.accumulate(ia, g);
                           });
}

Var gather(Var row, const std::vector<Eigen::Index>& idx) {
  require(row.rows() == 1, "gather: row vector expected");
  const int ia = row.id();
  const Eigen::Index n = row.cols();
  Mat y(1, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] >= 0 && idx[k] < n, "gather: index out of range");
    y(0, static_cast<Eigen::Index>(k)) = row.value()(0, idx[k]);
  }
  return tape_of(row).record(std::move(y), {row}, [ia, idx, n](Tape& t, int self) {
    Mat g = Mat::Zero(1, n);
    for (std::size_t k = 0; k < idx.size(); ++k) g(0, idx[k]) += t.grad(self)(0, static_cast<Eigen::Index>(k));
    t.accumulate(ia, g);
  });
}

Var pad_rows(Var a, Eigen::Index rows) {
  require(rows >= a.rows(), "pad_rows: target smaller than input");
  if (rows == a.rows()) return a;
  const int ia = a.id();
  const Eigen::Index r = a.rows();
  Mat y = Mat::Zero(rows, a.cols());
  y.topRows(r) = a.value();
  return tape_of(a).record(std::move(y), {a}, [ia, r](Tape& t, int self) {
    t.accumulate_expr(ia, t.grad(self).topRows(r));
  });
}

Var softmax_rows(Var a) {
  const int ia = a.id();
  Mat y = a.value();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double m = y.row(i).maxCoeff();
    y.row(i) = (y.row(i).array() - m).exp();
    y.row(i) /= y.row(i).sum();
  }
  return tape_of(a).record(std::move(y), {a}, [ia](Tape& t, int self) {
    const Mat& y = t.value(self);
    const Mat& g = t.grad(self);
    Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
    Mat dx = y.cwiseProduct(g - dots.replicate(1, g.cols()));
    t.accumulate(ia, dx);
  });
}

Var normalize_sum(Var a) {
  require(a.rows() == 1, "normalize_sum: row vector expected");
  const double total = a.value().sum();
  if (!(std::abs(total) > 0.0)) throw NumericError("normalize_sum: zero total");
  const int ia = a.id();
  return tape_of(a).record(a.value() / total, {a}, [ia, total](Tape& t, int self) {
    const Mat& y = t.value(self);
    const Mat& g = t.grad(self);
    const double dot = g.cwiseProduct(y).sum();
    t.accumulate(ia, ((g.array() - dot) / total).matrix());
  });
}

Var cosine(Var a, Var b) {
  require(a.rows() == 1 && b.rows() == 1, "cosine: row vectors expected");
  if (a.cols() != b.cols()) throw ContractError("cosine: dimension mismatch");
  const double na = a.value().norm(), nb = b.value().norm();
  const bool zero = na < kNormFloor || nb < kNormFloor;
  const double c = zero ? 0.0 : a.value().row(0).dot(b.value().row(0)) / (na * nb);
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(Mat::Constant(1, 1, c), {a, b}, [ia, ib, na, nb, c, zero](Tape& t, int self) {
    if (zero) return;
    const double g = t.grad(self)(0, 0);
    const Mat& va = t.value(ia);
    const Mat& vb = t.value(ib);
    t.accumulate_expr(ia, g * (vb / (na * nb) - c * va / (na * na)));
    t.accumulate_expr(ib, g * (va / (na * nb) - c * vb / (nb * nb)));
  });
}

Var cosine_matrix(Var a, Var b) {
  if (a.cols() != b.cols()) throw ContractError("cosine_matrix: dimension mismatch");
  Eigen::VectorXd na = a.value().rowwise().norm();
  Eigen::VectorXd nb = b.value().rowwise().norm();
  Eigen::VectorXd ia_inv = na.unaryExpr([](double v) { return v < kNormFloor ? 0.0 : 1.0 / v; });
  Eigen::VectorXd ib_inv = nb.unaryExpr([](double v) { return v < kNormFloor ? 0.0 : 1.0 / v; });
  Mat an = ia_inv.asDiagonal() * a.value();
  Mat bn = ib_inv.asDiagonal() * b.value();
  Mat c = an * bn.transpose();
  const int ida = a.id(), idb = b.id();
  return tape_of(a).record(std::move(c), {a, b},
                           [ida, idb, an, bn, ia_inv, ib_inv](Tape& t, int self) {
                             const Mat& g = t.grad(self);
                             const Mat& c = t.value(self);
                             Mat gc = g.cwiseProduct(c);
                             if (t.needs_grad(ida)) {
                               Eigen::VectorXd rs = gc.rowwise().sum();
                               Mat da = g * bn - rs.asDiagonal() * an;
                               t.accumulate_expr(ida, ia_inv.asDiagonal() * da);
                             }
                             if (t.needs_grad(idb)) {
                               Eigen::VectorXd cs = gc.colwise().sum().transpose();
                               Mat db = g.transpose() * an - cs.asDiagonal() * bn;
                               t.accumulate_expr(idb, ib_inv.asDiagonal() * db);
                             }
                           });
}

namespace {

// Indices of the k largest entries, descending; ties resolved by lower index.
std::vector<Eigen::Index> top_indices(const double* data, Eigen::Index n, Eigen::Index k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, n);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [data](Eigen::Index x, Eigen::Index y) {
    return data[x] > data[y] || (data[x] == data[y] && x < y);
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace

Var kmax(Var a, Eigen::Index k) {
  require(k >= 1, "kmax: k must be positive");
  const Mat& x = a.value();
  auto idx = top_indices(x.data(), x.size(), k);
  Mat y(1, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) y(0, static_cast<Eigen::Index>(i)) = x(idx[i]);
  const int ia = a.id();
  const Eigen::Index r = x.rows(), c = x.cols();
  return tape_of(a).record(std::move(y), {a}, [ia, idx, r, c](Tape& t, int self) {
    Mat g = Mat::Zero(r, c);
    for (std::size_t i = 0; i < idx.size(); ++i) g(idx[i]) += t.grad(self)(0, static_cast<Eigen::Index>(i));
    t.accumulate(ia, g);
  });
}

Var topk_mean(Var row, Eigen::Index k) {
  require(row.rows() == 1, "topk_mean: row vector expected");
  return mean(kmax(row, k));
}

Var weighted_sum(Var w, const std::vector<Var>& xs) {
  require(w.rows() == 1 && w.cols() == static_cast<Eigen::Index>(xs.size()), "weighted_sum: weight shape");
  require(!xs.empty(), "weighted_sum: no inputs");
  Mat y = Mat::Zero(xs.front().rows(), xs.front().cols());
  std::vector<int> ids;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(xs[i].rows() == y.rows() && xs[i].cols() == y.cols(), "weighted_sum: shape mismatch");
    y += w.value()(0, static_cast<Eigen::Index>(i)) * xs[i].value();
    ids.push_back(xs[i].id());
  }
  std::vector<Var> inputs = xs;
  inputs.push_back(w);
  const int iw = w.id();
  return tape_of(w).record(std::move(y), inputs, [iw, ids](Tape& t, int self) {
    const Mat& g = t.grad(self);
    Mat dw(1, static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      dw(0, static_cast<Eigen::Index>(i)) = g.cwiseProduct(t.value(ids[i])).sum();
      if (t.needs_grad(ids[i])) t.accumulate_expr(ids[i], g * t.value(iw)(0, static_cast<Eigen::Index>(i)));
    }
    t.accumulate(iw, dw);
  });
}

Var lstm(Var x, Var wx, Var wh, Var b, bool reverse) {
  const Eigen::Index steps = x.rows();
  const Eigen::Index h = wh.rows();
  require(wx.rows() == x.cols() && wx.cols() == 4 * h, "lstm: wx shape");
  require(wh.cols() == 4 * h && b.rows() == 1 && b.cols() == 4 * h, "lstm: wh/b shape");

  struct Cache {
    Mat gi, gf, gg, go, c, tc, hprev, cprev;
  };
  auto cache = std::make_shared<Cache>();
  cache->gi.resize(steps, h);
  cache->gf.resize(steps, h);
  cache->gg.resize(steps, h);
  cache->go.resize(steps, h);
  cache->c.resize(steps, h);
  cache->tc.resize(steps, h);
  cache->hprev.resize(steps, h);
  cache->cprev.resize(steps, h);

  Mat pre = x.value() * wx.value();
  pre.rowwise() += b.value().row(0);
  Mat out(steps, h);
  Eigen::RowVectorXd hp = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd cp = Eigen::RowVectorXd::Zero(h);
  for (Eigen::Index s = 0; s < steps; ++s) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    Eigen::RowVectorXd z = pre.row(t) + hp * wh.value();
    auto sig = [](const auto& v) { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); };
    Eigen::RowVectorXd gi = sig(z.segment(0, h));
    Eigen::RowVectorXd gf = sig(z.segment(h, h));
    Eigen::RowVectorXd gg = z.segment(2 * h, h).array().tanh().matrix();
    Eigen::RowVectorXd go = sig(z.segment(3 * h, h));
    Eigen::RowVectorXd c = gf.cwiseProduct(cp) + gi.cwiseProduct(gg);
    Eigen::RowVectorXd tc = c.array().tanh().matrix();
    cache->gi.row(t) = gi;
    cache->gf.row(t) = gf;
    cache->gg.row(t) = gg;
    cache->go.row(t) = go;
    cache->c.row(t) = c;
    cache->tc.row(t) = tc;
    cache->hprev.row(t) = hp;
    cache->cprev.row(t) = cp;
    hp = go.cwiseProduct(tc);
    cp = c;
    out.row(t) = hp;
  }

  const int ix = x.id(), iwx = wx.id(), iwh = wh.id(), ib = b.id();
  return tape_of(x).record(std::move(out), {x, wx, wh, b},
                           [cache, ix, iwx, iwh, ib, steps, h, reverse](Tape& t, int self) {
                             const Mat& g = t.grad(self);
                             const Mat& whv = t.value(iwh);
                             Mat dz(steps, 4 * h);
                             Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(h);
                             Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(h);
                             for (Eigen::Index s = steps - 1; s >= 0; --s) {
                               const Eigen::Index r = reverse ? steps - 1 - s : s;
                               const Cache& k = *cache;
                               Eigen::RowVectorXd dh = g.row(r) + dh_next;
                               Eigen::RowVectorXd dgo = dh.cwiseProduct(k.tc.row(r));
                               Eigen::RowVectorXd dc =
                                   dh.cwiseProduct(k.go.row(r)).cwiseProduct(
                                       (1.0 - k.tc.row(r).array().square()).matrix()) +
                                   dc_next;
                               Eigen::RowVectorXd dgi = dc.cwiseProduct(k.gg.row(r));
                               Eigen::RowVectorXd dgg = dc.cwiseProduct(k.gi.row(r));
                               Eigen::RowVectorXd dgf = dc.cwiseProduct(k.cprev.row(r));
                               dc_next = dc.cwiseProduct(k.gf.row(r));
                               auto dsig = [](const auto& y) { return (y.array() * (1.0 - y.array())).matrix(); };
                               dz.block(r, 0, 1, h) = dgi.cwiseProduct(dsig(k.gi.row(r)));
                               dz.block(r, h, 1, h) = dgf.cwiseProduct(dsig(k.gf.row(r)));
                               dz.block(r, 2 * h, 1, h) =
                                   dgg.cwiseProduct((1.0 - k.gg.row(r).array().square()).matrix());
                               dz.block(r, 3 * h, 1, h) = dgo.cwiseProduct(dsig(k.go.row(r)));
                               dh_next = dz.row(r) * whv.transpose();
                             }
                             if (t.needs_grad(ix)) t.accumulate_expr(ix, dz * t.value(iwx).transpose());
                             if (t.needs_grad(iwx)) t.accumulate_expr(iwx, t.value(ix).transpose() * dz);
                             if (t.needs_grad(iwh)) t.accumulate_expr(iwh, cache->hprev.transpose() * dz);
                             if (t.needs_grad(ib)) t.accumulate_expr(ib, dz.colwise().sum());
                           });
}

Var crf_nll(Var emissions, Var transitions, Var start, Var end, std::span<const int> gold) {
  const Mat& e = emissions.value();
  const Eigen::Index steps = e.rows(), labels = e.cols();
  require(static_cast<Eigen::Index>(gold.size()) == steps && steps > 0, "crf_nll: gold length mismatch");
  require(transitions.rows() == labels && transitions.cols() == labels, "crf_nll: transition shape");
  const CrfPosteriors post = crf_posteriors(e, transitions.value(), start.value(), end.value());
  double gold_score = start.value()(0, gold[0]) + end.value()(0, gold[steps - 1]);
  for (Eigen::Index t = 0; t < steps; ++t) {
    require(gold[t] >= 0 && gold[t] < labels, "crf_nll: label out of range");
    gold_score += e(t, gold[t]);
    if (t > 0) gold_score += transitions.value()(gold[t - 1], gold[t]);
  }
  std::vector<int> path(gold.begin(), gold.end());
  auto shared = std::make_shared<CrfPosteriors>(post);
  const int ie = emissions.id(), it = transitions.id(), is = start.id(), iend = end.id();
  return tape_of(emissions).record(
      Mat::Constant(1, 1, post.log_partition - gold_score), {emissions, transitions, start, end},
      [shared, path, ie, it, is, iend, steps, labels](Tape& t, int self) {
        const double g = t.grad(self)(0, 0);
        Mat de = shared->unary;
        Mat dt = shared->pairwise;
        Mat ds = shared->unary.row(0);
        Mat dend = shared->unary.row(steps - 1);
        for (Eigen::Index s = 0; s < steps; ++s) {
          de(s, path[s]) -= 1.0;
          if (s > 0) dt(path[s - 1], path[s]) -= 1.0;
        }
        ds(0, path[0]) -= 1.0;
        dend(0, path[steps - 1]) -= 1.0;
        t.accumulate_expr(ie, g * de);
        t.accumulate_expr(it, g * dt);
        t.accumulate_expr(is, g * ds);
        t.accumulate_expr(iend, g * dend);
        (void)labels;
      });
}

}  // namespace wikiseo::nn
