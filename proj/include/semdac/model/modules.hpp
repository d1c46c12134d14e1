#pragma once

#include "semdac/core/conv.hpp"
#include "semdac/core/graph.hpp"
#include "semdac/core/rng.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

namespace semdac {

template <typename S>
struct Parameter {
  std::string name;
  Mat<S> value;
};

// Flat registry of every trainable tensor, in registration order. Names are
// unique and stable; checkpoints and the optimizer address parameters by name.
template <typename S>
struct ParamStore {
  std::vector<Parameter<S>*> items;

  void reg(Parameter<S>& p) {
    for (auto* q : items)
      require(q->name != p.name, Err::value, "duplicate parameter name: " + p.name);
    items.push_back(&p);
  }

  Parameter<S>* find(const std::string& name) const {
    for (auto* p : items)
      if (p->name == name) return p;
    return nullptr;
  }

  size_t count() const { return items.size(); }
};

// Per-forward-pass context: maps persistent parameters to graph leaves,
// deduplicating so weight sharing (e.g. across discriminator phases)
// accumulates gradients into one leaf.
template <typename S>
struct BuildCtx {
  Graph<S>& g;
  bool train = true;
  std::unordered_map<const Parameter<S>*, int> leaf_of;

  explicit BuildCtx(Graph<S>& graph, bool training = true) : g(graph), train(training) {}

  Var<S> use(const Parameter<S>& p) {
    auto it = leaf_of.find(&p);
    if (it == leaf_of.end()) it = leaf_of.emplace(&p, g.add(p.value, train)).first;
    return {&g, it->second};
  }

  // harvested after backward; entries align with store.items, empty = untouched
  std::vector<Mat<S>> collect_grads(const ParamStore<S>& store) const {
    std::vector<Mat<S>> out(store.items.size());
    for (size_t k = 0; k < store.items.size(); ++k) {
      auto it = leaf_of.find(store.items[k]);
      if (it != leaf_of.end() && g.has_grad(it->second)) out[k] = g.grad(it->second);
    }
    return out;
  }
};

namespace init {

template <typename S>
Mat<S> normal(int rows, int cols, double stddev, uint64_t seed) {
  Rng rng(seed);
  Mat<S> m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = (S)(rng.normal() * stddev);
  return m;
}

}  // namespace init

template <typename S>
struct Conv1dLayer {
  Parameter<S> w, b;
  int c_in = 0, c_out = 0, k = 1, stride = 1, dilation = 1, pad = 0;

  void init(const std::string& name, int cin, int cout, int kk, int str, int dil, int padding,
            ParamStore<S>& store, uint64_t master_seed, double init_gain = 1.0) {
    c_in = cin;
    c_out = cout;
    k = kk;
    stride = str;
    dilation = dil;
    pad = padding;
    w.name = name + ".w";
    b.name = name + ".b";
    const double stddev = init_gain / std::sqrt(double(cin) * kk);
    w.value = init::normal<S>(cout, kk * cin, stddev, derive_seed(master_seed, w.name));
    b.value = Mat<S>::Zero(cout, 1);
    store.reg(w);
    store.reg(b);
  }

  Var<S> apply(BuildCtx<S>& ctx, Var<S> x) const {
    return ops::conv1d(x, ctx.use(w), ctx.use(b), k, stride, dilation, pad);
  }
};

template <typename S>
struct ConvT1dLayer {
  Parameter<S> w, b;
  int c_in = 0, c_out = 0, stride = 1;

  void init(const std::string& name, int cin, int cout, int str, ParamStore<S>& store,
            uint64_t master_seed) {
    c_in = cin;
    c_out = cout;
    stride = str;
    w.name = name + ".w";
    b.name = name + ".b";
    const int k = 2 * str;
    w.value = init::normal<S>(cout, k * cin, 1.0 / std::sqrt(double(cin) * k),
                              derive_seed(master_seed, w.name));
    b.value = Mat<S>::Zero(cout, 1);
    store.reg(w);
    store.reg(b);
  }

  Var<S> apply(BuildCtx<S>& ctx, Var<S> x) const {
    return ops::conv_transpose1d(x, ctx.use(w), ctx.use(b), stride);
  }
};

template <typename S>
struct SnakeLayer {
  Parameter<S> alpha;

  void init(const std::string& name, int channels, ParamStore<S>& store) {
    alpha.name = name + ".alpha";
    alpha.value = Mat<S>::Ones(channels, 1);
    store.reg(alpha);
  }

  Var<S> apply(BuildCtx<S>& ctx, Var<S> x) const { return ops::snake(x, ctx.use(alpha)); }
};

// snake -> dilated conv (k7) -> snake -> 1x1 conv, with residual add
template <typename S>
struct ResidualUnit {
  SnakeLayer<S> s1, s2;
  Conv1dLayer<S> c1, c2;

  void init(const std::string& name, int channels, int dilation, ParamStore<S>& store,
            uint64_t seed) {
    s1.init(name + ".s1", channels, store);
    c1.init(name + ".c1", channels, channels, 7, 1, dilation, 3 * dilation, store, seed);
    s2.init(name + ".s2", channels, store);
    c2.init(name + ".c2", channels, channels, 1, 1, 1, 0, store, seed);
  }

  Var<S> apply(BuildCtx<S>& ctx, Var<S> x) const {
    Var<S> h = s1.apply(ctx, x);
    h = c1.apply(ctx, h);
    h = s2.apply(ctx, h);
    h = c2.apply(ctx, h);
    return ops::add(x, h);
  }
};

}  // namespace semdac
