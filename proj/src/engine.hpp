#pragma once

// Differentiation engine. The forward and reverse passes are written once,
// generic over the scalar type: T = double gives loss and exact gradients,
// T = Dual (parameters carrying tangents v) gives exact Hessian-vector
// products H*v in the gradient tangents.

#include <span>
#include <string>
#include <vector>

#include "ocda/model.hpp"
#include "ocda/params.hpp"
#include "ocda/tensor.hpp"

namespace ocda {

struct ParamSlot {
  std::string name;
  Shape shape;
  std::size_t offset = 0;
  std::size_t size = 0;
  enum class Init { FanInUniform, One, Zero };
  Init init = Init::Zero;
  int fan_in = 0;
};

// Walks the layer list and yields every parameter tensor in layout order.
std::vector<ParamSlot> param_slots(const ModelSpec& spec);

namespace engine {

inline constexpr double kBnEps = 1e-5;

template <class T>
struct LayerCache {
  Tensor<T> out;
  std::vector<int> argmax;  // max-pool winner indices, per output element
  Tensor<T> bn_xhat;
  std::vector<T> bn_inv;
};

namespace detail {

inline Shape canon3(const Shape& s) {
  if (s.size() == 3) return s;
  if (s.size() == 2) return {s[0], 1, s[1]};
  throw ShapeError("expected a 2- or 3-dim layer shape");
}

// Column matrix with leading dimension ld; the example's columns start at
// `col` and occupy `patch` consecutive columns of each row.
template <class T>
void im2col(const T* in, int channels, int h, int w, int kh, int kw, int ph, int pw, int oh,
            int ow, T* col, std::size_t ld) {
  for (int c = 0; c < channels; ++c) {
    for (int dy = 0; dy < kh; ++dy) {
      for (int dx = 0; dx < kw; ++dx) {
        T* row = col + (static_cast<std::size_t>(c) * kh * kw + dy * kw + dx) * ld;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy + dy - ph;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < ow; ++ox) row[oy * ow + ox] = T(0.0);
            continue;
          }
          const T* src = in + (static_cast<std::size_t>(c) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox + dx - pw;
            row[oy * ow + ox] = (ix >= 0 && ix < w) ? src[ix] : T(0.0);
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const T* col, std::size_t ld, int channels, int h, int w, int kh, int kw, int ph,
                int pw, int oh, int ow, T* in) {
  for (int c = 0; c < channels; ++c) {
    for (int dy = 0; dy < kh; ++dy) {
      for (int dx = 0; dx < kw; ++dx) {
        const T* row = col + (static_cast<std::size_t>(c) * kh * kw + dy * kw + dx) * ld;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy + dy - ph;
          if (iy < 0 || iy >= h) continue;
          T* dst = in + (static_cast<std::size_t>(c) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox + dx - pw;
            if (ix >= 0 && ix < w) dst[ix] += row[oy * ow + ox];
          }
        }
      }
    }
  }
}

struct ConvDims {
  int c, h, w, o, oh, ow, kh, kw, ph, pw, k, patch;
};

inline ConvDims conv_dims(const LayerDesc& l) {
  const Shape in = canon3(l.in_shape);
  const Shape out = canon3(l.out_shape);
  ConvDims d;
  d.c = in[0];
  d.h = in[1];
  d.w = in[2];
  d.o = out[0];
  d.oh = out[1];
  d.ow = out[2];
  d.kh = l.kind == LayerKind::Conv2d ? l.kernel_h : 1;
  d.kw = l.kernel_w;
  d.ph = l.same_padding ? (d.kh - 1) / 2 : 0;
  d.pw = l.same_padding ? (d.kw - 1) / 2 : 0;
  d.k = d.c * d.kh * d.kw;
  d.patch = d.oh * d.ow;
  return d;
}

// Examples are processed in chunks: one im2col matrix (k x chunk*patch) and a
// single GEMM per chunk, then a scatter back to per-example layout. The chunk
// size caps the scratch at ~48 MB.
inline int conv_chunk(const ConvDims& d, int batch) {
  const std::size_t budget = 6'000'000;
  const std::size_t per_example = static_cast<std::size_t>(d.k) * d.patch;
  const std::size_t chunk = std::max<std::size_t>(1, budget / std::max<std::size_t>(per_example, 1));
  return static_cast<int>(std::min<std::size_t>(chunk, batch));
}

template <class T>
void conv_forward(const LayerDesc& l, std::span<const T> weight, std::span<const T> bias,
                  const Tensor<T>& in, Tensor<T>& out) {
  const ConvDims d = conv_dims(l);
  const int batch = in.dim(0);
  const std::size_t in_stride = static_cast<std::size_t>(d.c) * d.h * d.w;
  const std::size_t out_stride = static_cast<std::size_t>(d.o) * d.patch;
  const int chunk = conv_chunk(d, batch);
  std::vector<T> col(static_cast<std::size_t>(d.k) * chunk * d.patch);
  std::vector<T> tmp(static_cast<std::size_t>(d.o) * chunk * d.patch);
  for (int b0 = 0; b0 < batch; b0 += chunk) {
    const int n = std::min(chunk, batch - b0);
    const std::size_t ld = static_cast<std::size_t>(n) * d.patch;
    for (int e = 0; e < n; ++e) {
      im2col(in.ptr() + (b0 + e) * in_stride, d.c, d.h, d.w, d.kh, d.kw, d.ph, d.pw, d.oh, d.ow,
             col.data() + static_cast<std::size_t>(e) * d.patch, ld);
    }
    gemm(false, false, d.o, static_cast<int>(ld), d.k, 1.0, weight.data(), col.data(), 0.0,
         tmp.data());
    for (int e = 0; e < n; ++e) {
      T* ob = out.ptr() + (b0 + e) * out_stride;
      for (int oc = 0; oc < d.o; ++oc) {
        const T* src = tmp.data() + static_cast<std::size_t>(oc) * ld +
                       static_cast<std::size_t>(e) * d.patch;
        T* dst = ob + static_cast<std::size_t>(oc) * d.patch;
        for (int p = 0; p < d.patch; ++p) dst[p] = src[p] + bias[oc];
      }
    }
  }
}

template <class T>
void conv_backward(const LayerDesc& l, std::span<const T> weight, const Tensor<T>& in,
                   const Tensor<T>& dout, Tensor<T>& din, std::span<T> dweight,
                   std::span<T> dbias) {
  const ConvDims d = conv_dims(l);
  const int batch = in.dim(0);
  const std::size_t in_stride = static_cast<std::size_t>(d.c) * d.h * d.w;
  const std::size_t out_stride = static_cast<std::size_t>(d.o) * d.patch;
  const int chunk = conv_chunk(d, batch);
  std::vector<T> col(static_cast<std::size_t>(d.k) * chunk * d.patch);
  std::vector<T> gcol(static_cast<std::size_t>(d.o) * chunk * d.patch);
  std::vector<T> dcol(col.size());
  for (int b0 = 0; b0 < batch; b0 += chunk) {
    const int n = std::min(chunk, batch - b0);
    const std::size_t ld = static_cast<std::size_t>(n) * d.patch;
    for (int e = 0; e < n; ++e) {
      const T* gb = dout.ptr() + (b0 + e) * out_stride;
      im2col(in.ptr() + (b0 + e) * in_stride, d.c, d.h, d.w, d.kh, d.kw, d.ph, d.pw, d.oh, d.ow,
             col.data() + static_cast<std::size_t>(e) * d.patch, ld);
      for (int oc = 0; oc < d.o; ++oc) {
        const T* src = gb + static_cast<std::size_t>(oc) * d.patch;
        T* dst = gcol.data() + static_cast<std::size_t>(oc) * ld +
                 static_cast<std::size_t>(e) * d.patch;
        T s(0.0);
        for (int p = 0; p < d.patch; ++p) {
          dst[p] = src[p];
          s += src[p];
        }
        dbias[oc] += s;
      }
    }
    gemm(false, true, d.o, d.k, static_cast<int>(ld), 1.0, gcol.data(), col.data(), 1.0,
         dweight.data());
    gemm(true, false, d.k, static_cast<int>(ld), d.o, 1.0, weight.data(), gcol.data(), 0.0,
         dcol.data());
    for (int e = 0; e < n; ++e) {
      col2im_add(dcol.data() + static_cast<std::size_t>(e) * d.patch, ld, d.c, d.h, d.w, d.kh,
                 d.kw, d.ph, d.pw, d.oh, d.ow, din.ptr() + (b0 + e) * in_stride);
    }
  }
}

template <class T>
void maxpool_forward(const LayerDesc& l, const Tensor<T>& in, Tensor<T>& out,
                     std::vector<int>& argmax) {
  const Shape si = canon3(l.in_shape);
  const Shape so = canon3(l.out_shape);
  const int c = si[0], h = si[1], w = si[2], oh = so[1], ow = so[2];
  const int ph = l.kind == LayerKind::MaxPool2d ? l.pool : 1;
  const int pw = l.pool;
  const int batch = in.dim(0);
  const std::size_t in_stride = static_cast<std::size_t>(c) * h * w;
  const std::size_t out_stride = static_cast<std::size_t>(c) * oh * ow;
  argmax.assign(static_cast<std::size_t>(batch) * out_stride, 0);
  for (int b = 0; b < batch; ++b) {
    const T* ib = in.ptr() + b * in_stride;
    T* ob = out.ptr() + b * out_stride;
    int* ab = argmax.data() + b * out_stride;
    for (int ch = 0; ch < c; ++ch) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          int best_idx = -1;
          T best(0.0);
          // Row-major window scan; strict > keeps the first maximal index.
          for (int dy = 0; dy < ph; ++dy) {
            for (int dx = 0; dx < pw; ++dx) {
              const int iy = oy * ph + dy;
              const int ix = ox * pw + dx;
              const int idx = (ch * h + iy) * w + ix;
              if (best_idx < 0 || ib[idx] > best) {
                best = ib[idx];
                best_idx = idx;
              }
            }
          }
          ob[(ch * oh + oy) * ow + ox] = best;
          ab[(ch * oh + oy) * ow + ox] = best_idx;
        }
      }
    }
  }
}

template <class T>
void maxpool_backward(const LayerDesc& l, const std::vector<int>& argmax, const Tensor<T>& dout,
                      Tensor<T>& din) {
  const Shape si = canon3(l.in_shape);
  const int batch = dout.dim(0);
  const std::size_t in_stride = static_cast<std::size_t>(si[0]) * si[1] * si[2];
  const std::size_t out_stride = dout.size() / batch;
  for (int b = 0; b < batch; ++b) {
    const T* gb = dout.ptr() + b * out_stride;
    T* db = din.ptr() + b * in_stride;
    const int* ab = argmax.data() + b * out_stride;
    for (std::size_t i = 0; i < out_stride; ++i) db[ab[i]] += gb[i];
  }
}

// Batch-norm statistics run over the batch dimension only, per activation
// position; with batch size 1 every normalized activation is exactly zero.
// Scale/shift are per channel.
template <class T>
void batchnorm_forward(const LayerDesc& l, std::span<const T> scale, std::span<const T> shift,
                       const Tensor<T>& in, Tensor<T>& out, Tensor<T>& xhat, std::vector<T>& inv,
                       bool keep_xhat) {
  const Shape s = canon3(l.in_shape);
  const int channels = s[0];
  const std::size_t spatial = static_cast<std::size_t>(s[1]) * s[2];
  const std::size_t per_ex = channels * spatial;
  const int batch = in.dim(0);
  const T inv_b = T(1.0 / batch);
  if (keep_xhat) xhat = Tensor<T>(Shape{batch, static_cast<int>(per_ex)});
  inv.assign(per_ex, T(0.0));
  std::vector<T> mean(per_ex, T(0.0));
  for (int b = 0; b < batch; ++b) {
    const T* xb = in.ptr() + b * per_ex;
    for (std::size_t j = 0; j < per_ex; ++j) mean[j] += xb[j];
  }
  for (std::size_t j = 0; j < per_ex; ++j) mean[j] *= inv_b;
  std::vector<T> var(per_ex, T(0.0));
  for (int b = 0; b < batch; ++b) {
    const T* xb = in.ptr() + b * per_ex;
    for (std::size_t j = 0; j < per_ex; ++j) {
      const T d = xb[j] - mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < per_ex; ++j) {
    inv[j] = T(1.0) / sqrt(var[j] * inv_b + T(kBnEps));
  }
  for (int b = 0; b < batch; ++b) {
    const T* xb = in.ptr() + b * per_ex;
    T* hb = keep_xhat ? xhat.ptr() + b * per_ex : nullptr;
    T* ob = out.ptr() + b * per_ex;
    for (std::size_t j = 0; j < per_ex; ++j) {
      const std::size_t c = j / spatial;
      const T h = (xb[j] - mean[j]) * inv[j];
      if (hb) hb[j] = h;
      ob[j] = scale[c] * h + shift[c];
    }
  }
}

template <class T>
void batchnorm_backward(const LayerDesc& l, std::span<const T> scale, const Tensor<T>& xhat,
                        const std::vector<T>& inv, const Tensor<T>& dout, Tensor<T>& din,
                        std::span<T> dscale, std::span<T> dshift) {
  const Shape s = canon3(l.in_shape);
  const int channels = s[0];
  const std::size_t spatial = static_cast<std::size_t>(s[1]) * s[2];
  const std::size_t per_ex = channels * spatial;
  const int batch = dout.dim(0);
  const T inv_b = T(1.0 / batch);
  std::vector<T> sum_dxh(per_ex, T(0.0));
  std::vector<T> sum_dxh_xh(per_ex, T(0.0));
  for (int b = 0; b < batch; ++b) {
    const T* gb = dout.ptr() + b * per_ex;
    const T* hb = xhat.ptr() + b * per_ex;
    for (std::size_t j = 0; j < per_ex; ++j) {
      const std::size_t c = j / spatial;
      dscale[c] += gb[j] * hb[j];
      dshift[c] += gb[j];
      const T dxh = gb[j] * scale[c];
      sum_dxh[j] += dxh;
      sum_dxh_xh[j] += dxh * hb[j];
    }
  }
  for (int b = 0; b < batch; ++b) {
    const T* gb = dout.ptr() + b * per_ex;
    const T* hb = xhat.ptr() + b * per_ex;
    T* db = din.ptr() + b * per_ex;
    for (std::size_t j = 0; j < per_ex; ++j) {
      const std::size_t c = j / spatial;
      const T dxh = gb[j] * scale[c];
      db[j] = inv[j] * (dxh - (sum_dxh[j] + hb[j] * sum_dxh_xh[j]) * inv_b);
    }
  }
}

template <class T>
void linear_forward(const LayerDesc& l, std::span<const T> weight, std::span<const T> bias,
                    const Tensor<T>& in, Tensor<T>& out) {
  const int batch = in.dim(0);
  gemm(false, true, batch, l.out_features, l.in_features, 1.0, in.ptr(), weight.data(), 0.0,
       out.ptr());
  for (int b = 0; b < batch; ++b) {
    T* ob = out.ptr() + static_cast<std::size_t>(b) * l.out_features;
    for (int o = 0; o < l.out_features; ++o) ob[o] += bias[o];
  }
}

template <class T>
void linear_backward(const LayerDesc& l, std::span<const T> weight, const Tensor<T>& in,
                     const Tensor<T>& dout, Tensor<T>& din, std::span<T> dweight,
                     std::span<T> dbias) {
  const int batch = in.dim(0);
  gemm(true, false, l.out_features, l.in_features, batch, 1.0, dout.ptr(), in.ptr(), 1.0,
       dweight.data());
  for (int b = 0; b < batch; ++b) {
    const T* gb = dout.ptr() + static_cast<std::size_t>(b) * l.out_features;
    for (int o = 0; o < l.out_features; ++o) dbias[o] += gb[o];
  }
  gemm(false, false, batch, l.in_features, l.out_features, 1.0, dout.ptr(), weight.data(), 0.0,
       din.ptr());
}

}  // namespace detail

template <class T>
struct ForwardPass {
  std::vector<LayerCache<T>> caches;  // caches[i].out = output of layer i
  const Tensor<T>* logits = nullptr;  // output of the layer before softmax
};

// Parameter spans for layer i, resolved against the slot walk.
struct SlotCursor {
  std::vector<ParamSlot> slots;
  std::size_t next = 0;

  explicit SlotCursor(const ModelSpec& spec) : slots(param_slots(spec)) {}

  template <class T>
  std::span<const T> take(std::span<const T> params) {
    const auto& s = slots.at(next++);
    return params.subspan(s.offset, s.size);
  }
  template <class T>
  std::span<T> take_mut(std::span<T> params) {
    const auto& s = slots.at(next++);
    return params.subspan(s.offset, s.size);
  }
};

// keep_caches retains every layer's stash for the reverse pass; forward-only
// callers pass false so intermediate activations are released as the pass
// advances (the pooled evaluation batches are large).
template <class T>
ForwardPass<T> forward_logits(const ModelSpec& spec, std::span<const T> params,
                              const Tensor<T>& input, bool keep_caches = true) {
  const int batch = input.dim(0);
  ForwardPass<T> fp;
  fp.caches.resize(spec.layers.size());
  SlotCursor cursor(spec);
  const Tensor<T>* cur = &input;
  for (std::size_t i = 0; i + 1 < spec.layers.size(); ++i) {
    const LayerDesc& l = spec.layers[i];
    LayerCache<T>& cache = fp.caches[i];
    Shape out_shape;
    out_shape.push_back(batch);
    for (int d : l.out_shape) out_shape.push_back(d);
    cache.out = Tensor<T>(out_shape);
    switch (l.kind) {
      case LayerKind::Conv2d:
      case LayerKind::Conv1d: {
        auto w = cursor.take(params);
        auto b = cursor.take(params);
        detail::conv_forward(l, w, b, *cur, cache.out);
        break;
      }
      case LayerKind::BatchNorm: {
        auto scale = cursor.take(params);
        auto shift = cursor.take(params);
        detail::batchnorm_forward(l, scale, shift, *cur, cache.out, cache.bn_xhat, cache.bn_inv,
                                  keep_caches);
        break;
      }
      case LayerKind::Relu:
        for (std::size_t j = 0; j < cur->size(); ++j) {
          cache.out[j] = (*cur)[j] > T(0.0) ? (*cur)[j] : T(0.0);
        }
        break;
      case LayerKind::Tanh:
        for (std::size_t j = 0; j < cur->size(); ++j) cache.out[j] = tanh((*cur)[j]);
        break;
      case LayerKind::MaxPool2d:
      case LayerKind::MaxPool1d:
        detail::maxpool_forward(l, *cur, cache.out, cache.argmax);
        break;
      case LayerKind::Flatten:
        cache.out.data = cur->data;
        break;
      case LayerKind::Linear: {
        auto w = cursor.take(params);
        auto b = cursor.take(params);
        detail::linear_forward(l, w, b, *cur, cache.out);
        break;
      }
      case LayerKind::Softmax:
        throw SpecError("softmax before the end of the layer list");
    }
    cur = &cache.out;
    if (!keep_caches && i >= 1) {
      fp.caches[i - 1].out = Tensor<T>();
      fp.caches[i - 1].argmax.clear();
    }
  }
  fp.logits = cur;
  return fp;
}

// Mean categorical cross-entropy at the logits, log-sum-exp fused. Summation
// over examples is ascending. When dlogits is non-null it receives
// (softmax - onehot) / batch.
template <class T>
T mean_cross_entropy(const Tensor<T>& logits, const std::vector<int>& labels,
                     Tensor<T>* dlogits) {
  const int batch = logits.dim(0);
  const int classes = logits.dim(1);
  const double inv_b = 1.0 / batch;
  T total(0.0);
  for (int b = 0; b < batch; ++b) {
    const T* row = logits.ptr() + static_cast<std::size_t>(b) * classes;
    T m = row[0];
    for (int c = 1; c < classes; ++c) {
      if (row[c] > m) m = row[c];
    }
    T sum(0.0);
    for (int c = 0; c < classes; ++c) sum += exp(row[c] - m);
    const T lse = m + log(sum);
    total += lse - row[labels[b]];
    if (dlogits) {
      T* drow = dlogits->ptr() + static_cast<std::size_t>(b) * classes;
      for (int c = 0; c < classes; ++c) {
        T p = exp(row[c] - m) / sum;
        if (c == labels[b]) p -= T(1.0);
        drow[c] = p * T(inv_b);
      }
    }
  }
  return total * T(inv_b);
}

template <class T>
std::vector<T> backward_params(const ModelSpec& spec, std::span<const T> params,
                               const Tensor<T>& input, const ForwardPass<T>& fp,
                               Tensor<T>&& dlogits) {
  std::vector<T> grads(params.size(), T(0.0));
  std::span<T> gspan(grads);
  SlotCursor cursor(spec);
  // Slot index where each layer's parameters start.
  std::vector<std::size_t> layer_slot(spec.layers.size(), 0);
  {
    std::size_t s = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      layer_slot[i] = s;
      const LayerKind k = spec.layers[i].kind;
      if (k == LayerKind::Conv2d || k == LayerKind::Conv1d || k == LayerKind::BatchNorm ||
          k == LayerKind::Linear) {
        s += 2;
      }
    }
  }
  Tensor<T> dout = std::move(dlogits);
  const int batch = input.dim(0);
  for (std::size_t ii = spec.layers.size() - 1; ii-- > 0;) {
    const LayerDesc& l = spec.layers[ii];
    const Tensor<T>& lin = ii == 0 ? input : fp.caches[ii - 1].out;
    Shape in_shape;
    in_shape.push_back(batch);
    for (int d : l.in_shape) in_shape.push_back(d);
    Tensor<T> din(in_shape, T(0.0));
    cursor.next = layer_slot[ii];
    switch (l.kind) {
      case LayerKind::Conv2d:
      case LayerKind::Conv1d: {
        auto w = cursor.take(params);
        auto dw = gspan.subspan(cursor.slots[cursor.next - 1].offset,
                                cursor.slots[cursor.next - 1].size);
        auto db = cursor.take_mut(gspan);
        detail::conv_backward(l, w, lin, dout, din, dw, db);
        break;
      }
      case LayerKind::BatchNorm: {
        auto scale = cursor.take(params);
        auto dscale = gspan.subspan(cursor.slots[cursor.next - 1].offset,
                                    cursor.slots[cursor.next - 1].size);
        auto dshift = cursor.take_mut(gspan);
        detail::batchnorm_backward(l, scale, fp.caches[ii].bn_xhat, fp.caches[ii].bn_inv, dout,
                                   din, dscale, dshift);
        break;
      }
      case LayerKind::Relu: {
        const Tensor<T>& out = fp.caches[ii].out;
        for (std::size_t j = 0; j < out.size(); ++j) {
          din[j] = out[j] > T(0.0) ? dout[j] : T(0.0);
        }
        break;
      }
      case LayerKind::Tanh: {
        const Tensor<T>& out = fp.caches[ii].out;
        for (std::size_t j = 0; j < out.size(); ++j) {
          din[j] = dout[j] * (T(1.0) - out[j] * out[j]);
        }
        break;
      }
      case LayerKind::MaxPool2d:
      case LayerKind::MaxPool1d:
        detail::maxpool_backward(l, fp.caches[ii].argmax, dout, din);
        break;
      case LayerKind::Flatten:
        din.data = dout.data;
        break;
      case LayerKind::Linear: {
        auto w = cursor.take(params);
        auto dw = gspan.subspan(cursor.slots[cursor.next - 1].offset,
                                cursor.slots[cursor.next - 1].size);
        auto db = cursor.take_mut(gspan);
        detail::linear_backward(l, w, lin, dout, din, dw, db);
        break;
      }
      case LayerKind::Softmax:
        throw SpecError("softmax inside the backward walk");
    }
    dout = std::move(din);
  }
  return grads;
}

// --- double / Dual entry points --------------------------------------------

double eval_loss(const ModelSpec& spec, std::span<const double> params,
                 const Tensor<double>& features, const std::vector<int>& labels);

std::vector<double> loss_grad(const ModelSpec& spec, std::span<const double> params,
                              const Tensor<double>& features, const std::vector<int>& labels,
                              double* loss_out);

std::vector<double> hvp(const ModelSpec& spec, std::span<const double> params,
                        std::span<const double> tangent, const Tensor<double>& features,
                        const std::vector<int>& labels);

PredictionBatch predict(const ModelSpec& spec, const ParameterVector& params,
                        const Tensor<double>& batch);

}  // namespace engine
}  // namespace ocda
