#pragma once

#include "semdac/core/graph.hpp"
#include "semdac/model/config.hpp"
#include "semdac/model/modules.hpp"
#include "semdac/quant/codebook.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace semdac {

// quantizer-by-frame code indices; row 0 is the semantic quantizer
struct TokenGrid {
  Mat<int> codes;                   // n_quantizers x n_frames
  std::vector<int> codebook_sizes;  // per row

  int n_quantizers() const { return (int)codes.rows(); }
  int n_frames() const { return (int)codes.cols(); }

  void validate() const {
    require((size_t)codes.rows() == codebook_sizes.size(), Err::value,
            "token grid row/size-list mismatch");
    for (int q = 0; q < codes.rows(); ++q)
      for (int t = 0; t < codes.cols(); ++t)
        require(codes(q, t) >= 0 && codes(q, t) < codebook_sizes[q], Err::value,
                "token index out of codebook range");
  }
};

template <typename S>
struct VQResult {
  std::vector<int> indices;
  Mat<S> quantized;  // dim x frames, columns are exact codebook entries
  S codebook_loss = S(0);
  S commitment_loss = S(0);
};

// One vector-quantizer pass: nearest entry per frame plus the two VQ-VAE
// losses. The squared distances coincide, so both losses carry the same value;
// they differ in which side receives gradients (handled by the graph variant).
template <typename S>
VQResult<S> vq_forward(const Mat<S>& latents, const Codebook<S>& cb) {
  require(latents.rows() == cb.dim(), Err::value, "vq_forward dim mismatch");
  VQResult<S> out;
  const int frames = (int)latents.cols();
  out.quantized.setZero(cb.dim(), frames);
  if (frames == 0) return out;
  out.indices = nearest_codes(latents, cb);
  S acc = S(0);
  for (int t = 0; t < frames; ++t) {
    out.quantized.col(t) = cb.entries.row(out.indices[t]).transpose();
    acc += (latents.col(t) - out.quantized.col(t)).squaredNorm();
  }
  out.codebook_loss = acc / S(frames);
  out.commitment_loss = out.codebook_loss;
  return out;
}

template <typename S>
struct RVQOutput {
  TokenGrid grid;
  Mat<S> semantic_quantized;  // dim x frames
  Mat<S> acoustic_sum;        // dim x frames (zero when n_acoustic == 0)
  std::vector<VQResult<S>> stages;
};

// Residual chain: stage 0 (semantic) quantizes the latents, stage k >= 1
// quantizes what the previous stages left over; the decoded latent is
// semantic + sum of acoustic stages.
template <typename S>
RVQOutput<S> rvq_forward(const Mat<S>& latents, const RVQConfig& cfg,
                         const std::vector<Codebook<S>>& codebooks) {
  cfg.validate();
  require((int)codebooks.size() == 1 + cfg.n_acoustic, Err::value,
          "rvq needs 1 + n_acoustic codebooks");
  for (const auto& cb : codebooks)
    require(cb.dim() == (int)latents.rows(), Err::value, "rvq codebook dim mismatch");

  RVQOutput<S> out;
  const int frames = (int)latents.cols();
  out.grid.codes.resize((int)codebooks.size(), frames);
  for (const auto& cb : codebooks) out.grid.codebook_sizes.push_back(cb.size());

  Mat<S> residual = latents;
  out.acoustic_sum = Mat<S>::Zero(latents.rows(), frames);
  for (size_t q = 0; q < codebooks.size(); ++q) {
    VQResult<S> r = vq_forward(residual, codebooks[q]);
    for (int t = 0; t < frames; ++t) out.grid.codes((int)q, t) = r.indices[t];
    if (q == 0)
      out.semantic_quantized = r.quantized;
    else
      out.acoustic_sum += r.quantized;
    residual -= r.quantized;
    out.stages.push_back(std::move(r));
  }
  return out;
}

// ---- bitrate accounting ----

inline int bits_for_size(int size) {
  require(size >= 2, Err::value, "codebook size must be >= 2 for bit accounting");
  int bits = 0;
  unsigned v = unsigned(size - 1);
  while (v) {
    ++bits;
    v >>= 1;
  }
  return bits;  // ceil(log2(size))
}

inline int bits_per_frame(const std::vector<int>& sizes) {
  require(!sizes.empty(), Err::value, "bits_per_frame needs at least one codebook");
  int total = 0;
  for (int s : sizes) total += bits_for_size(s);
  return total;
}

inline double bitrate_kbps(const std::vector<int>& sizes, double frame_rate) {
  require(frame_rate > 0, Err::value, "frame rate must be positive");
  return bits_per_frame(sizes) * frame_rate / 1000.0;
}

// ---- graph integration (training path) ----

template <typename S>
struct RVQGraphOutput {
  TokenGrid grid;
  Var<S> semantic_quantized;  // straight-through to the encoder latents
  Var<S> acoustic_sum;        // detached (constant) branch
  Var<S> codebook_loss;       // mean over stages; gradients reach the entries
  Var<S> commitment_loss;     // mean over stages; gradients reach the latents (stage 0)
  std::vector<S> stage_codebook_losses;
};

template <typename S>
struct RVQModule {
  RVQConfig cfg;
  std::vector<Parameter<S>> books;  // books[0] semantic, rest acoustic

  void init(const RVQConfig& c, ParamStore<S>& store, uint64_t master_seed) {
    cfg = c;
    cfg.validate();
    books.resize(1 + cfg.n_acoustic);
    const auto sizes = cfg.codebook_sizes();
    for (size_t q = 0; q < books.size(); ++q) {
      books[q].name = q == 0 ? "rvq.semantic" : "rvq.acoustic" + std::to_string(q - 1);
      books[q].value =
          init_codebook<S>(sizes[q], cfg.latent_dim, derive_seed(master_seed, books[q].name))
              .entries;
      store.reg(books[q]);
    }
  }

  std::vector<Codebook<S>> codebooks() const {
    std::vector<Codebook<S>> out;
    for (const auto& p : books) out.push_back(Codebook<S>{p.value});
    return out;
  }

  // Straight-through contract: d(semantic + acoustic_sum)/d(latents) is the
  // identity. The semantic stage passes gradients through unchanged; the
  // residual chain makes every deeper stage a constant w.r.t. the latents
  // (DAC residual semantics), so the acoustic branch is built detached.
  RVQGraphOutput<S> build(BuildCtx<S>& ctx, Var<S> latents) const {
    Graph<S>& g = *latents.g;
    RVQOutput<S> plain = rvq_forward(latents.val(), cfg, codebooks());
    const int frames = (int)latents.val().cols();
    const int n_stages = (int)books.size();
    const S inv_stages = S(1) / S(n_stages);

    RVQGraphOutput<S> out;
    out.grid = plain.grid;

    // semantic: identity backward onto the latents
    const int li = latents.i;
    int sem = g.add(plain.semantic_quantized, g.wants(li), [li](Graph<S>& g, const Mat<S>& gy) {
      if (g.wants(li)) g.grad_ref(li) += gy;
    });
    out.semantic_quantized = {&g, sem};
    out.acoustic_sum = constant(g, plain.acoustic_sum);

    // codebook loss: mean over stages, gradients into the entries only
    std::vector<int> entry_leaves(n_stages);
    for (int q = 0; q < n_stages; ++q) entry_leaves[q] = ctx.use(books[q]).i;
    S cb_total = S(0);
    for (const auto& st : plain.stages) cb_total += st.codebook_loss;
    Mat<S> cb_val(1, 1);
    cb_val(0, 0) = cb_total * inv_stages;
    // per-stage inputs: stage 0 sees the latents, stage k the numeric residual
    auto residuals = std::make_shared<std::vector<Mat<S>>>();
    {
      Mat<S> r = latents.val();
      for (const auto& st : plain.stages) {
        residuals->push_back(r);
        r -= st.quantized;
      }
    }
    auto stages = std::make_shared<std::vector<VQResult<S>>>(plain.stages);
    bool cb_needs = false;
    for (int q = 0; q < n_stages; ++q) cb_needs = cb_needs || g.wants(entry_leaves[q]);
    int cbi = g.add(std::move(cb_val), cb_needs,
                    [entry_leaves, residuals, stages, inv_stages, frames](Graph<S>& g,
                                                                          const Mat<S>& gy) {
      if (frames == 0) return;
      const S c = gy(0, 0) * inv_stages * S(2) / S(frames);
      for (size_t q = 0; q < entry_leaves.size(); ++q) {
        if (!g.wants(entry_leaves[q])) continue;
        Mat<S>& ge = g.grad_ref(entry_leaves[q]);
        const auto& st = (*stages)[q];
        const auto& r = (*residuals)[q];
        for (int t = 0; t < frames; ++t)
          ge.row(st.indices[t]) += c * (st.quantized.col(t) - r.col(t)).transpose();
      }
    });
    out.codebook_loss = {&g, cbi};

    // commitment loss: mean over stages; only stage 0's input is a live
    // graph value, deeper residuals are constants (see contract above)
    Mat<S> cm_val(1, 1);
    cm_val(0, 0) = cb_total * inv_stages;  // same numeric value
    int cmi = g.add(std::move(cm_val), g.wants(li),
                    [li, stages, inv_stages, frames](Graph<S>& g, const Mat<S>& gy) {
      if (!g.wants(li) || frames == 0) return;
      const S c = gy(0, 0) * inv_stages * S(2) / S(frames);
      Mat<S>& gl = g.grad_ref(li);
      const auto& st0 = (*stages)[0];
      for (int t = 0; t < frames; ++t)
        gl.col(t) += c * (g.val(li).col(t) - st0.quantized.col(t));
    });
    out.commitment_loss = {&g, cmi};

    for (const auto& st : plain.stages) out.stage_codebook_losses.push_back(st.codebook_loss);
    return out;
  }
};

}  // namespace semdac
