#pragma once

#include "semdac/core/common.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace semdac {

// Reverse-mode tape over row-major Eigen matrices. A graph is built per
// forward pass and discarded after backward; construction order is the
// topological order, so backward is a single reverse sweep.
template <typename S>
class Graph {
 public:
  struct Node {
    Mat<S> val;
    Mat<S> grad;  // empty until first accumulation
    std::function<void(Graph&, const Mat<S>&)> back;
    bool needs_grad = false;
  };

  Graph() { nodes_.reserve(1024); }

  int add(Mat<S> val, bool needs_grad, std::function<void(Graph&, const Mat<S>&)> back = nullptr) {
    Node n;
    n.val = std::move(val);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return (int)nodes_.size() - 1;
  }

  const Mat<S>& val(int i) const { return nodes_[i].val; }
  Mat<S>& val(int i) { return nodes_[i].val; }
  bool wants(int i) const { return nodes_[i].needs_grad; }
  void set_back(int i, std::function<void(Graph&, const Mat<S>&)> back) {
    nodes_[i].back = std::move(back);
  }

  // zero-initialized gradient buffer for accumulation
  Mat<S>& grad_ref(int i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) n.grad = Mat<S>::Zero(n.val.rows(), n.val.cols());
    return n.grad;
  }
  const Mat<S>& grad(int i) const { return nodes_[i].grad; }
  bool has_grad(int i) const { return nodes_[i].grad.size() != 0; }

  void backward(int loss) {
    require(nodes_[loss].val.size() == 1, Err::value, "backward root must be scalar");
    grad_ref(loss)(0, 0) = S(1);
    for (int i = loss; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.grad.size() != 0 && n.back) n.back(*this, n.grad);
    }
  }

  // drop every gradient buffer (values stay); lets one graph host several
  // backward sweeps without cross-contamination
  void clear_grads() {
    for (auto& n : nodes_) n.grad.resize(0, 0);
  }

  size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
};

template <typename S>
struct Var {
  Graph<S>* g = nullptr;
  int i = -1;

  const Mat<S>& val() const { return g->val(i); }
  S scalar() const { return g->val(i)(0, 0); }
  int rows() const { return (int)g->val(i).rows(); }
  int cols() const { return (int)g->val(i).cols(); }
};

template <typename S>
Var<S> leaf(Graph<S>& g, const Mat<S>& v, bool needs_grad) {
  return {&g, g.add(v, needs_grad)};
}

template <typename S>
Var<S> constant(Graph<S>& g, Mat<S> v) {
  return {&g, g.add(std::move(v), false)};
}

namespace ops {

template <typename S>
Var<S> add(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.g;
  require(a.rows() == b.rows() && a.cols() == b.cols(), Err::value, "add shape mismatch");
  const int ai = a.i, bi = b.i;
  bool needs = g.wants(ai) || g.wants(bi);
  int out = g.add(g.val(ai) + g.val(bi), needs, [ai, bi](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai)) g.grad_ref(ai) += gy;
    if (g.wants(bi)) g.grad_ref(bi) += gy;
  });
  return {&g, out};
}

template <typename S>
Var<S> sub(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.g;
  require(a.rows() == b.rows() && a.cols() == b.cols(), Err::value, "sub shape mismatch");
  const int ai = a.i, bi = b.i;
  bool needs = g.wants(ai) || g.wants(bi);
  int out = g.add(g.val(ai) - g.val(bi), needs, [ai, bi](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai)) g.grad_ref(ai) += gy;
    if (g.wants(bi)) g.grad_ref(bi) -= gy;
  });
  return {&g, out};
}

template <typename S>
Var<S> scale(Var<S> a, S c) {
  Graph<S>& g = *a.g;
  const int ai = a.i;
  int out = g.add(g.val(ai) * c, g.wants(ai), [ai, c](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai)) g.grad_ref(ai) += gy * c;
  });
  return {&g, out};
}

template <typename S>
Var<S> add_scalar(Var<S> a, S c) {
  Graph<S>& g = *a.g;
  const int ai = a.i;
  int out = g.add((g.val(ai).array() + c).matrix(), g.wants(ai), [ai](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai)) g.grad_ref(ai) += gy;
  });
  return {&g, out};
}

template <typename S>
Var<S> mul(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.g;
  require(a.rows() == b.rows() && a.cols() == b.cols(), Err::value, "mul shape mismatch");
  const int ai = a.i, bi = b.i;
  bool needs = g.wants(ai) || g.wants(bi);
  int out = g.add((g.val(ai).array() * g.val(bi).array()).matrix(), needs,
                  [ai, bi](Graph<S>& g, const Mat<S>& gy) {
                    if (g.wants(ai)) g.grad_ref(ai).array() += gy.array() * g.val(bi).array();
                    if (g.wants(bi)) g.grad_ref(bi).array() += gy.array() * g.val(ai).array();
                  });
  return {&g, out};
}

template <typename S>
Var<S> square(Var<S> a) {
  Graph<S>& g = *a.g;
  const int ai = a.i;
  int out = g.add(g.val(ai).array().square().matrix(), g.wants(ai),
                  [ai](Graph<S>& g, const Mat<S>& gy) {
                    if (g.wants(ai)) g.grad_ref(ai).array() += S(2) * gy.array() * g.val(ai).array();
                  });
  return {&g, out};
}

template <typename S>
Var<S> mean_all(Var<S> a) {
  Graph<S>& g = *a.g;
  const int ai = a.i;
  const S inv_n = S(1) / S(g.val(ai).size());
  Mat<S> v(1, 1);
  v(0, 0) = g.val(ai).sum() * inv_n;
  int out = g.add(std::move(v), g.wants(ai), [ai, inv_n](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai)) g.grad_ref(ai).array() += gy(0, 0) * inv_n;
  });
  return {&g, out};
}

template <typename S>
Var<S> sum_all(Var<S> a) {
  Graph<S>& g = *a.g;
  const int ai = a.i;
  Mat<S> v(1, 1);
  v(0, 0) = g.val(ai).sum();
  int out = g.add(std::move(v), g.wants(ai), [ai](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai)) g.grad_ref(ai).array() += gy(0, 0);
  });
  return {&g, out};
}

template <typename S>
Var<S> concat_rows(Var<S> a, Var<S> b) {
  Graph<S>& g = *a.g;
  require(a.cols() == b.cols(), Err::value, "concat_rows column mismatch");
  const int ai = a.i, bi = b.i;
  const int ra = a.rows(), rb = b.rows(), c = a.cols();
  Mat<S> v(ra + rb, c);
  v.topRows(ra) = g.val(ai);
  v.bottomRows(rb) = g.val(bi);
  bool needs = g.wants(ai) || g.wants(bi);
  int out = g.add(std::move(v), needs, [ai, bi, ra, rb](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai)) g.grad_ref(ai) += gy.topRows(ra);
    if (g.wants(bi)) g.grad_ref(bi) += gy.bottomRows(rb);
  });
  return {&g, out};
}

template <typename S>
Var<S> stop_grad(Var<S> a) {
  return constant(*a.g, a.val());
}

// y = W x + b (b broadcast over columns)
template <typename S>
Var<S> matmul_bias(Var<S> w, Var<S> x, Var<S> b) {
  Graph<S>& g = *w.g;
  require(w.cols() == x.rows() && b.rows() == w.rows() && b.cols() == 1, Err::value,
          "matmul_bias shape mismatch");
  const int wi = w.i, xi = x.i, bi = b.i;
  Mat<S> v = g.val(wi) * g.val(xi);
  v.colwise() += g.val(bi).col(0);
  bool needs = g.wants(wi) || g.wants(xi) || g.wants(bi);
  int out = g.add(std::move(v), needs, [wi, xi, bi](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(wi)) g.grad_ref(wi).noalias() += gy * g.val(xi).transpose();
    if (g.wants(xi)) g.grad_ref(xi).noalias() += g.val(wi).transpose() * gy;
    if (g.wants(bi)) g.grad_ref(bi).col(0) += gy.rowwise().sum();
  });
  return {&g, out};
}

template <typename S>
Var<S> leaky_relu(Var<S> a, S slope) {
  Graph<S>& g = *a.g;
  const int ai = a.i;
  Mat<S> v = g.val(ai).array().max(g.val(ai).array() * slope).matrix();
  int out = g.add(std::move(v), g.wants(ai), [ai, slope](Graph<S>& g, const Mat<S>& gy) {
    if (!g.wants(ai)) return;
    const auto& x = g.val(ai).array();
    g.grad_ref(ai).array() += gy.array() * (x > S(0)).select(Mat<S>::Ones(x.rows(), x.cols()).array(), slope);
  });
  return {&g, out};
}

template <typename S>
Var<S> tanh_op(Var<S> a) {
  Graph<S>& g = *a.g;
  const int ai = a.i;
  Mat<S> v = g.val(ai).array().tanh().matrix();
  const int out = g.add(std::move(v), g.wants(ai), nullptr);
  // dx = (1 - y^2) g; the lambda reads its own output value by index
  g.set_back(out, [ai, out](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai))
      g.grad_ref(ai).array() += gy.array() * (S(1) - g.val(out).array().square());
  });
  return {&g, out};
}

// y = x + sin(alpha x)^2 / alpha with per-channel alpha (column broadcast).
// Keeps sin/cos of alpha*x from the forward pass for the backward sweep.
template <typename S>
Var<S> snake(Var<S> x, Var<S> alpha) {
  Graph<S>& g = *x.g;
  require(alpha.rows() == x.rows() && alpha.cols() == 1, Err::value, "snake alpha must be C x 1");
  const int xi = x.i, ai = alpha.i;
  const int rows = x.rows(), cols = x.cols();
  auto sin_ax = std::make_shared<Mat<S>>(rows, cols);
  auto cos_ax = std::make_shared<Mat<S>>(rows, cols);
  Mat<S> v(rows, cols);
  for (int c = 0; c < rows; ++c) {
    const S a = g.val(ai)(c, 0) + S(1e-9);
    auto xr = g.val(xi).row(c).array();
    sin_ax->row(c) = (xr * a).sin().matrix();
    cos_ax->row(c) = (xr * a).cos().matrix();
    v.row(c) = (xr + sin_ax->row(c).array().square() / a).matrix();
  }
  bool needs = g.wants(xi) || g.wants(ai);
  int out = g.add(std::move(v), needs, [xi, ai, sin_ax, cos_ax](Graph<S>& g, const Mat<S>& gy) {
    const int rows = (int)gy.rows();
    for (int c = 0; c < rows; ++c) {
      const S a = g.val(ai)(c, 0) + S(1e-9);
      auto s = sin_ax->row(c).array();
      auto co = cos_ax->row(c).array();
      auto gr = gy.row(c).array();
      if (g.wants(xi))
        g.grad_ref(xi).row(c).array() += gr * (S(1) + S(2) * s * co);
      if (g.wants(ai)) {
        // d/da [sin(ax)^2 / a] = 2 x sin cos / a - sin^2 / a^2
        auto xr = g.val(xi).row(c).array();
        g.grad_ref(ai)(c, 0) +=
            (gr * (S(2) * xr * s * co / a - s.square() / (a * a))).sum();
      }
    }
  });
  return {&g, out};
}

// y = gamma .* x + beta, all same shape
template <typename S>
Var<S> film(Var<S> x, Var<S> gamma, Var<S> beta) {
  Graph<S>& g = *x.g;
  require(x.rows() == gamma.rows() && x.cols() == gamma.cols() && x.rows() == beta.rows() &&
              x.cols() == beta.cols(),
          Err::value, "film shape mismatch");
  const int xi = x.i, gi = gamma.i, bi = beta.i;
  Mat<S> v = (g.val(gi).array() * g.val(xi).array() + g.val(bi).array()).matrix();
  bool needs = g.wants(xi) || g.wants(gi) || g.wants(bi);
  int out = g.add(std::move(v), needs, [xi, gi, bi](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(xi)) g.grad_ref(xi).array() += gy.array() * g.val(gi).array();
    if (g.wants(gi)) g.grad_ref(gi).array() += gy.array() * g.val(xi).array();
    if (g.wants(bi)) g.grad_ref(bi) += gy;
  });
  return {&g, out};
}

// weighted sum of scalars: sum_i w_i * a_i  (the loss aggregator)
template <typename S>
Var<S> weighted_sum(const std::vector<Var<S>>& terms, const std::vector<S>& weights) {
  require(!terms.empty() && terms.size() == weights.size(), Err::value, "weighted_sum arity");
  Graph<S>& g = *terms[0].g;
  std::vector<int> idx(terms.size());
  S acc = S(0);
  bool needs = false;
  for (size_t k = 0; k < terms.size(); ++k) {
    require(terms[k].val().size() == 1, Err::value, "weighted_sum expects scalars");
    idx[k] = terms[k].i;
    acc += weights[k] * terms[k].scalar();
    needs = needs || g.wants(terms[k].i);
  }
  Mat<S> v(1, 1);
  v(0, 0) = acc;
  std::vector<S> w = weights;
  int out = g.add(std::move(v), needs, [idx, w](Graph<S>& g, const Mat<S>& gy) {
    for (size_t k = 0; k < idx.size(); ++k)
      if (g.wants(idx[k])) g.grad_ref(idx[k])(0, 0) += w[k] * gy(0, 0);
  });
  return {&g, out};
}

// mean over columns of squared column-norm difference: ||A - B||_F^2 / cols
template <typename S>
Var<S> mse_frames(Var<S> a, const Mat<S>& b) {
  Graph<S>& g = *a.g;
  require(a.rows() == b.rows() && a.cols() == b.cols(), Err::value, "mse_frames shape mismatch");
  require(b.cols() >= 1, Err::value, "mse_frames needs at least one frame");
  const int ai = a.i;
  const S inv_t = S(1) / S(b.cols());
  Mat<S> diff = g.val(ai) - b;
  Mat<S> v(1, 1);
  v(0, 0) = diff.squaredNorm() * inv_t;
  Mat<S> b_copy = b;
  int out = g.add(std::move(v), g.wants(ai), [ai, b_copy, inv_t](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(ai)) g.grad_ref(ai) += (S(2) * inv_t * gy(0, 0)) * (g.val(ai) - b_copy);
  });
  return {&g, out};
}

// mean absolute difference against a constant target
template <typename S>
Var<S> l1_mean(Var<S> a, const Mat<S>& b) {
  Graph<S>& g = *a.g;
  require(a.rows() == b.rows() && a.cols() == b.cols(), Err::value, "l1_mean shape mismatch");
  const int ai = a.i;
  const S inv_n = S(1) / S(b.size());
  Mat<S> v(1, 1);
  v(0, 0) = (g.val(ai) - b).array().abs().sum() * inv_n;
  Mat<S> b_copy = b;
  int out = g.add(std::move(v), g.wants(ai), [ai, b_copy, inv_n](Graph<S>& g, const Mat<S>& gy) {
    if (!g.wants(ai)) return;
    g.grad_ref(ai).array() +=
        (gy(0, 0) * inv_n) * (g.val(ai) - b_copy).array().sign();
  });
  return {&g, out};
}

// strided phase extraction for the multi-period discriminator:
// out(0, h) = x(0, h*period + phase), zero-padded past the end
template <typename S>
Var<S> phase_slice(Var<S> x, int period, int phase, int out_len) {
  Graph<S>& g = *x.g;
  require(x.rows() == 1, Err::value, "phase_slice expects a 1 x T signal");
  const int xi = x.i;
  const int t_in = x.cols();
  Mat<S> v = Mat<S>::Zero(1, out_len);
  for (int h = 0; h < out_len; ++h) {
    const int src = h * period + phase;
    if (src < t_in) v(0, h) = g.val(xi)(0, src);
  }
  int out = g.add(std::move(v), g.wants(xi), [xi, period, phase, t_in](Graph<S>& g, const Mat<S>& gy) {
    if (!g.wants(xi)) return;
    Mat<S>& gx = g.grad_ref(xi);
    const int out_len = (int)gy.cols();
    for (int h = 0; h < out_len; ++h) {
      const int src = h * period + phase;
      if (src < t_in) gx(0, src) += gy(0, h);
    }
  });
  return {&g, out};
}

}  // namespace ops

}  // namespace semdac
