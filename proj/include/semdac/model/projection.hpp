#pragma once

#include "semdac/model/modules.hpp"

namespace semdac {

// Affine map from semantic latents into the teacher feature space, applied
// per frame.
template <typename S>
struct ProjectionHead {
  Parameter<S> w, b;
  int in_dim = 0, out_dim = 0;

  void init(int latent_dim, int teacher_dim, ParamStore<S>& store, uint64_t seed) {
    in_dim = latent_dim;
    out_dim = teacher_dim;
    w.name = "proj.w";
    b.name = "proj.b";
    w.value = init::normal<S>(teacher_dim, latent_dim, 1.0 / std::sqrt(double(latent_dim)),
                              derive_seed(seed, w.name));
    b.value = Mat<S>::Zero(teacher_dim, 1);
    store.reg(w);
    store.reg(b);
  }

  Var<S> apply(BuildCtx<S>& ctx, Var<S> semantic) const {
    return ops::matmul_bias(ctx.use(w), semantic, ctx.use(b));
  }

  // plain per-frame affine map (inference/tests)
  Mat<S> project(const Mat<S>& semantic) const {
    require((int)semantic.rows() == in_dim, Err::value, "projection dim mismatch");
    Mat<S> out = w.value * semantic;
    out.colwise() += b.value.col(0);
    return out;
  }
};

}  // namespace semdac
