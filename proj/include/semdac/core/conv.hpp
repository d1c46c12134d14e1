#pragma once

#include "semdac/core/graph.hpp"

#include <memory>

namespace semdac {
namespace ops {

inline int conv1d_out_len(int t_in, int k, int stride, int dilation, int pad) {
  const int span = (k - 1) * dilation + 1;
  return (t_in + 2 * pad - span) / stride + 1;
}

// 1-D convolution. Weight layout is (c_out x k*c_in), tap-major: tap j is the
// block w.middleCols(j*c_in, c_in). Stride-1 convs run as k offset GEMMs on
// the padded input; strided convs gather an im2col buffer first.
template <typename S>
Var<S> conv1d(Var<S> x, Var<S> w, Var<S> b, int k, int stride, int dilation, int pad) {
  Graph<S>& g = *x.g;
  const int c_in = x.rows(), t_in = x.cols();
  const int c_out = w.rows();
  require(w.cols() == k * c_in, Err::value, "conv1d weight shape mismatch");
  require(b.rows() == c_out && b.cols() == 1, Err::value, "conv1d bias shape mismatch");
  const int t_out = conv1d_out_len(t_in, k, stride, dilation, pad);
  require(t_out >= 1, Err::value, "conv1d input too short");

  const int xi = x.i, wi = w.i, bi = b.i;

  auto xpad = std::make_shared<Mat<S>>(Mat<S>::Zero(c_in, t_in + 2 * pad));
  xpad->middleCols(pad, t_in) = g.val(xi);

  Mat<S> y(c_out, t_out);
  std::shared_ptr<Mat<S>> col;  // im2col buffer, strided path only
  if (stride == 1) {
    y.noalias() = g.val(wi).middleCols(0, c_in) * xpad->middleCols(0, t_out);
    for (int j = 1; j < k; ++j)
      y.noalias() += g.val(wi).middleCols(j * c_in, c_in) * xpad->middleCols(j * dilation, t_out);
  } else {
    col = std::make_shared<Mat<S>>(k * c_in, t_out);
    for (int j = 0; j < k; ++j)
      for (int c = 0; c < c_in; ++c)
        for (int t = 0; t < t_out; ++t)
          (*col)(j * c_in + c, t) = (*xpad)(c, t * stride + j * dilation);
    y.noalias() = g.val(wi) * (*col);
  }
  y.colwise() += g.val(bi).col(0);

  bool needs = g.wants(xi) || g.wants(wi) || g.wants(bi);
  int out = g.add(std::move(y), needs,
                  [xi, wi, bi, xpad, col, k, stride, dilation, pad, c_in, t_in,
                   t_out](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(bi)) g.grad_ref(bi).col(0) += gy.rowwise().sum();
    const bool wx = g.wants(xi), ww = g.wants(wi);
    if (!wx && !ww) return;
    if (stride == 1) {
      Mat<S> dxpad;
      if (wx) dxpad = Mat<S>::Zero(c_in, t_in + 2 * pad);
      for (int j = 0; j < k; ++j) {
        if (ww)
          g.grad_ref(wi).middleCols(j * c_in, c_in).noalias() +=
              gy * xpad->middleCols(j * dilation, t_out).transpose();
        if (wx)
          dxpad.middleCols(j * dilation, t_out).noalias() +=
              g.val(wi).middleCols(j * c_in, c_in).transpose() * gy;
      }
      if (wx) g.grad_ref(xi) += dxpad.middleCols(pad, t_in);
    } else {
      if (ww) g.grad_ref(wi).noalias() += gy * col->transpose();
      if (wx) {
        Mat<S> dcol(col->rows(), col->cols());
        dcol.noalias() = g.val(wi).transpose() * gy;
        Mat<S> dxpad = Mat<S>::Zero(c_in, t_in + 2 * pad);
        for (int j = 0; j < k; ++j)
          for (int c = 0; c < c_in; ++c)
            for (int t = 0; t < t_out; ++t)
              dxpad(c, t * stride + j * dilation) += dcol(j * c_in + c, t);
        g.grad_ref(xi) += dxpad.middleCols(pad, t_in);
      }
    }
  });
  return {&g, out};
}

// Transposed 1-D convolution used for exact x`stride` upsampling:
// kernel = 2*stride, pad = ceil(stride/2), implicit output trim such that
// t_out == stride * t_in exactly (odd strides drop one trailing column).
template <typename S>
Var<S> conv_transpose1d(Var<S> x, Var<S> w, Var<S> b, int stride) {
  Graph<S>& g = *x.g;
  const int c_in = x.rows(), t_in = x.cols();
  const int c_out = w.rows();
  const int k = 2 * stride;
  require(w.cols() == k * c_in, Err::value, "conv_transpose1d weight shape mismatch");
  require(b.rows() == c_out && b.cols() == 1, Err::value, "conv_transpose1d bias shape mismatch");
  const int pad = (stride + 1) / 2;
  const int t_full = (t_in - 1) * stride + k;
  const int t_out = stride * t_in;

  const int xi = x.i, wi = w.i, bi = b.i;

  Mat<S> yfull = Mat<S>::Zero(c_out, t_full);
  Mat<S> tmp(c_out, t_in);
  for (int j = 0; j < k; ++j) {
    tmp.noalias() = g.val(wi).middleCols(j * c_in, c_in) * g.val(xi);
    for (int c = 0; c < c_out; ++c) {
      S* dst = yfull.data() + (size_t)c * t_full + j;
      const S* src = tmp.data() + (size_t)c * t_in;
      for (int t = 0; t < t_in; ++t) dst[t * stride] += src[t];
    }
  }
  Mat<S> y = yfull.middleCols(pad, t_out);
  y.colwise() += g.val(bi).col(0);

  bool needs = g.wants(xi) || g.wants(wi) || g.wants(bi);
  int out = g.add(std::move(y), needs,
                  [xi, wi, bi, k, stride, pad, c_in, c_out, t_in, t_full,
                   t_out](Graph<S>& g, const Mat<S>& gy) {
    if (g.wants(bi)) g.grad_ref(bi).col(0) += gy.rowwise().sum();
    const bool wx = g.wants(xi), ww = g.wants(wi);
    if (!wx && !ww) return;
    Mat<S> gfull = Mat<S>::Zero(c_out, t_full);
    gfull.middleCols(pad, t_out) = gy;
    Mat<S> gj(c_out, t_in);
    for (int j = 0; j < k; ++j) {
      for (int c = 0; c < c_out; ++c) {
        const S* src = gfull.data() + (size_t)c * t_full + j;
        S* dst = gj.data() + (size_t)c * t_in;
        for (int t = 0; t < t_in; ++t) dst[t] = src[t * stride];
      }
      if (wx) g.grad_ref(xi).noalias() += g.val(wi).middleCols(j * c_in, c_in).transpose() * gj;
      if (ww) g.grad_ref(wi).middleCols(j * c_in, c_in).noalias() += gj * g.val(xi).transpose();
    }
  });
  return {&g, out};
}

}  // namespace ops
}  // namespace semdac
