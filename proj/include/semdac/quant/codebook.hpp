#pragma once

#include "semdac/core/common.hpp"
#include "semdac/core/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace semdac {

// entries are rows: size x dim
template <typename S>
struct Codebook {
  Mat<S> entries;

  int size() const { return (int)entries.rows(); }
  int dim() const { return (int)entries.cols(); }
};

// i.i.d. normal entries with stddev 1/sqrt(dim); deterministic in the seed.
template <typename S>
Codebook<S> init_codebook(int size, int dim, uint64_t rng_seed) {
  require(size >= 2, Err::value, "codebook needs at least 2 entries");
  require(dim >= 1, Err::value, "codebook dim must be positive");
  Rng rng(rng_seed);
  Codebook<S> cb;
  cb.entries.resize(size, dim);
  const double stddev = 1.0 / std::sqrt(double(dim));
  for (int i = 0; i < size; ++i)
    for (int d = 0; d < dim; ++d) cb.entries(i, d) = (S)(rng.normal() * stddev);
  return cb;
}

// argmin over entries of squared Euclidean distance; ties break to the lowest
// index (strict < scan in index order).
template <typename S>
int nearest_code(const Eigen::Ref<const Mat<S>>& vec, const Codebook<S>& cb) {
  require(vec.rows() == cb.dim() && vec.cols() == 1, Err::value, "nearest_code dim mismatch");
  require(vec.allFinite(), Err::numeric, "nearest_code input must be finite");
  int best = 0;
  S best_d = (cb.entries.row(0).transpose() - vec.col(0)).squaredNorm();
  for (int i = 1; i < cb.size(); ++i) {
    const S d = (cb.entries.row(i).transpose() - vec.col(0)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Nearest entry per column of a dim x frames matrix. Exact per-pair squared
// distances (not the expanded ||e||^2 - 2<e,z> form) so the tie behavior is
// bit-identical to nearest_code; Eigen vectorizes the inner difference.
template <typename S>
std::vector<int> nearest_codes(const Mat<S>& latents, const Codebook<S>& cb) {
  require(latents.rows() == cb.dim(), Err::value, "nearest_codes dim mismatch");
  require(latents.allFinite(), Err::numeric, "nearest_codes input must be finite");
  const int frames = (int)latents.cols();
  std::vector<int> idx(frames);
  if (frames == 0) return idx;
  for (int t = 0; t < frames; ++t) {
    int best = 0;
    S best_d = (cb.entries.row(0) - latents.col(t).transpose()).squaredNorm();
    for (int i = 1; i < cb.size(); ++i) {
      const S d = (cb.entries.row(i) - latents.col(t).transpose()).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    idx[t] = best;
  }
  return idx;
}

}  // namespace semdac
