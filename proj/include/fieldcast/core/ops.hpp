#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "fieldcast/core/autograd.hpp"

namespace fieldcast::nn {

namespace detail {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>>;
template <class T>
using CMapMat = Eigen::Map<const RowMat<T>>;

// C(m,n) = A(m,k) * B(k,n), row-major raw buffers.
template <class T>
void gemm(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n) {
  MapMat<T>(c, m, n).noalias() = CMapMat<T>(a, m, k) * CMapMat<T>(b, k, n);
}

template <class T>
void gemm_at_b(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n) {
  // C(m,n) = A(k,m)^T * B(k,n)
  MapMat<T>(c, m, n).noalias() = CMapMat<T>(a, k, m).transpose() * CMapMat<T>(b, k, n);
}

template <class T>
void gemm_a_bt(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n) {
  // C(m,n) = A(m,k) * B(n,k)^T
  MapMat<T>(c, m, n).noalias() = CMapMat<T>(a, m, k) * CMapMat<T>(b, n, k).transpose();
}

// x (Cin,H,W) -> K (Cin*kh*kw, Ho*Wo), zero-padded borders.
template <class T>
void im2col2d(const T* x, int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw,
              int64_t stride, int64_t pad, int64_t ho, int64_t wo, T* k_out) {
  const int64_t cols = ho * wo;
  int64_t row = 0;
  for (int64_t c = 0; c < cin; ++c) {
    const T* xc = x + c * h * w;
    for (int64_t di = 0; di < kh; ++di) {
      for (int64_t dj = 0; dj < kw; ++dj, ++row) {
        T* dst = k_out + row * cols;
        for (int64_t oh = 0; oh < ho; ++oh) {
          const int64_t ih = oh * stride + di - pad;
          if (ih < 0 || ih >= h) {
            std::fill(dst + oh * wo, dst + (oh + 1) * wo, T(0));
            continue;
          }
          const T* src = xc + ih * w;
          for (int64_t ow = 0; ow < wo; ++ow) {
            const int64_t iw = ow * stride + dj - pad;
            dst[oh * wo + ow] = (iw >= 0 && iw < w) ? src[iw] : T(0);
          }
        }
      }
    }
  }
}

// Scatter-add of K (Cin*kh*kw, Ho*Wo) back onto x-shaped gradient.
template <class T>
void col2im2d(const T* k_in, int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw,
              int64_t stride, int64_t pad, int64_t ho, int64_t wo, T* x_grad) {
  const int64_t cols = ho * wo;
  int64_t row = 0;
  for (int64_t c = 0; c < cin; ++c) {
    T* xc = x_grad + c * h * w;
    for (int64_t di = 0; di < kh; ++di) {
      for (int64_t dj = 0; dj < kw; ++dj, ++row) {
        const T* src = k_in + row * cols;
        for (int64_t oh = 0; oh < ho; ++oh) {
          const int64_t ih = oh * stride + di - pad;
          if (ih < 0 || ih >= h) continue;
          T* dst = xc + ih * w;
          for (int64_t ow = 0; ow < wo; ++ow) {
            const int64_t iw = ow * stride + dj - pad;
            if (iw >= 0 && iw < w) dst[iw] += src[oh * wo + ow];
          }
        }
      }
    }
  }
}

// x (Cin,T,H,W) -> K (Cin*kt*kh*kw, T*Ho*Wo), stride 1, zero padding.
template <class T>
void im2col3d(const T* x, int64_t cin, int64_t tt, int64_t h, int64_t w, int64_t kt, int64_t kh,
              int64_t kw, int64_t pt, int64_t ph, int64_t pw, T* k_out) {
  const int64_t cols = tt * h * w;
  int64_t row = 0;
  for (int64_t c = 0; c < cin; ++c) {
    const T* xc = x + c * tt * h * w;
    for (int64_t dt = 0; dt < kt; ++dt) {
      for (int64_t di = 0; di < kh; ++di) {
        for (int64_t dj = 0; dj < kw; ++dj, ++row) {
          T* dst = k_out + row * cols;
          for (int64_t ot = 0; ot < tt; ++ot) {
            const int64_t it = ot + dt - pt;
            for (int64_t oh = 0; oh < h; ++oh) {
              const int64_t ih = oh + di - ph;
              T* d = dst + (ot * h + oh) * w;
              if (it < 0 || it >= tt || ih < 0 || ih >= h) {
                std::fill(d, d + w, T(0));
                continue;
              }
              const T* src = xc + (it * h + ih) * w;
              for (int64_t ow = 0; ow < w; ++ow) {
                const int64_t iw = ow + dj - pw;
                d[ow] = (iw >= 0 && iw < w) ? src[iw] : T(0);
              }
            }
          }
        }
      }
    }
  }
}

template <class T>
void col2im3d(const T* k_in, int64_t cin, int64_t tt, int64_t h, int64_t w, int64_t kt, int64_t kh,
              int64_t kw, int64_t pt, int64_t ph, int64_t pw, T* x_grad) {
  const int64_t cols = tt * h * w;
  int64_t row = 0;
  for (int64_t c = 0; c < cin; ++c) {
    T* xc = x_grad + c * tt * h * w;
    for (int64_t dt = 0; dt < kt; ++dt) {
      for (int64_t di = 0; di < kh; ++di) {
        for (int64_t dj = 0; dj < kw; ++dj, ++row) {
          const T* src = k_in + row * cols;
          for (int64_t ot = 0; ot < tt; ++ot) {
            const int64_t it = ot + dt - pt;
            if (it < 0 || it >= tt) continue;
            for (int64_t oh = 0; oh < h; ++oh) {
              const int64_t ih = oh + di - ph;
              if (ih < 0 || ih >= h) continue;
              const T* s = src + (ot * h + oh) * w;
              T* dst = xc + (it * h + ih) * w;
              for (int64_t ow = 0; ow < w; ++ow) {
                const int64_t iw = ow + dj - pw;
                if (iw >= 0 && iw < w) dst[iw] += s[ow];
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require(same_shape(a.value(), b.value()), "add: shape mismatch");
  Tensor<T> out = a.value();
  out.add_(b.value());
  return make_op<T>(std::move(out), {a.node(), b.node()},
                    [](const Tensor<T>& up) { return std::vector<Tensor<T>>{up, up}; });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require(same_shape(a.value(), b.value()), "sub: shape mismatch");
  Tensor<T> out = a.value();
  const T* bd = b.value().data();
  T* od = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) od[i] -= bd[i];
  return make_op<T>(std::move(out), {a.node(), b.node()}, [](const Tensor<T>& up) {
    Tensor<T> nb = up;
    nb.scale_(T(-1));
    return std::vector<Tensor<T>>{up, std::move(nb)};
  });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require(same_shape(a.value(), b.value()), "mul: shape mismatch");
  Tensor<T> out = a.value();
  const T* bd = b.value().data();
  T* od = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) od[i] *= bd[i];
  auto an = a.node(), bn = b.node();
  return make_op<T>(std::move(out), {an, bn}, [an, bn](const Tensor<T>& up) {
    Tensor<T> da = up, db = up;
    const T* av = an->value.data();
    const T* bv = bn->value.data();
    for (int64_t i = 0; i < up.numel(); ++i) {
      da[i] *= bv[i];
      db[i] *= av[i];
    }
    return std::vector<Tensor<T>>{std::move(da), std::move(db)};
  });
}

template <class T>
Var<T> scale(const Var<T>& a, T s) {
  Tensor<T> out = a.value();
  out.scale_(s);
  return make_op<T>(std::move(out), {a.node()}, [s](const Tensor<T>& up) {
    Tensor<T> da = up;
    da.scale_(s);
    return std::vector<Tensor<T>>{std::move(da)};
  });
}

template <class T>
Var<T> relu(const Var<T>& a) {
  Tensor<T> out = a.value();
  T* od = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) od[i] = od[i] > T(0) ? od[i] : T(0);
  auto an = a.node();
  return make_op<T>(std::move(out), {an}, [an](const Tensor<T>& up) {
    Tensor<T> da = up;
    const T* xv = an->value.data();
    for (int64_t i = 0; i < up.numel(); ++i)
      if (xv[i] <= T(0)) da[i] = T(0);
    return std::vector<Tensor<T>>{std::move(da)};
  });
}

template <class T>
Var<T> sigmoid(const Var<T>& a) {
  Tensor<T> out = a.value();
  T* od = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) od[i] = T(1) / (T(1) + std::exp(-od[i]));
  Tensor<T> saved = out;
  return make_op<T>(std::move(out), {a.node()}, [saved](const Tensor<T>& up) {
    Tensor<T> da = up;
    const T* y = saved.data();
    for (int64_t i = 0; i < up.numel(); ++i) da[i] *= y[i] * (T(1) - y[i]);
    return std::vector<Tensor<T>>{std::move(da)};
  });
}

template <class T>
Var<T> tanh(const Var<T>& a) {
  Tensor<T> out = a.value();
  T* od = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) od[i] = std::tanh(od[i]);
  Tensor<T> saved = out;
  return make_op<T>(std::move(out), {a.node()}, [saved](const Tensor<T>& up) {
    Tensor<T> da = up;
    const T* y = saved.data();
    for (int64_t i = 0; i < up.numel(); ++i) da[i] *= T(1) - y[i] * y[i];
    return std::vector<Tensor<T>>{std::move(da)};
  });
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

template <class T>
Var<T> reshape(const Var<T>& a, std::vector<int64_t> shape) {
  auto orig = a.value().shape();
  Tensor<T> out = a.value().reshaped(std::move(shape));
  return make_op<T>(std::move(out), {a.node()}, [orig](const Tensor<T>& up) {
    return std::vector<Tensor<T>>{up.reshaped(orig)};
  });
}

template <class T>
Var<T> concat_dim0(const std::vector<Var<T>>& xs) {
  require(!xs.empty(), "concat_dim0: empty input");
  auto tail = xs[0].value().shape();
  require(!tail.empty(), "concat_dim0: rank must be >= 1");
  int64_t d0 = 0;
  for (const auto& x : xs) {
    auto s = x.value().shape();
    require(s.size() == tail.size(), "concat_dim0: rank mismatch");
    for (size_t i = 1; i < s.size(); ++i) require(s[i] == tail[i], "concat_dim0: dim mismatch");
    d0 += s[0];
  }
  tail[0] = d0;
  Tensor<T> out(tail);
  std::vector<int64_t> sizes;
  int64_t off = 0;
  std::vector<std::shared_ptr<Node<T>>> parents;
  for (const auto& x : xs) {
    const auto& v = x.value();
    std::copy(v.data(), v.data() + v.numel(), out.data() + off);
    off += v.numel();
    sizes.push_back(v.numel());
    parents.push_back(x.node());
  }
  std::vector<std::vector<int64_t>> shapes;
  for (const auto& x : xs) shapes.push_back(x.value().shape());
  return make_op<T>(std::move(out), std::move(parents),
                    [sizes, shapes](const Tensor<T>& up) {
                      std::vector<Tensor<T>> grads;
                      int64_t off2 = 0;
                      for (size_t i = 0; i < sizes.size(); ++i) {
                        Tensor<T> g(shapes[i]);
                        std::copy(up.data() + off2, up.data() + off2 + sizes[i], g.data());
                        off2 += sizes[i];
                        grads.push_back(std::move(g));
                      }
                      return grads;
                    });
}

template <class T>
Var<T> slice_dim0(const Var<T>& a, int64_t begin, int64_t end) {
  auto shape = a.value().shape();
  require(!shape.empty() && begin >= 0 && end <= shape[0] && begin < end,
          "slice_dim0: bad range");
  int64_t inner = a.value().numel() / shape[0];
  auto out_shape = shape;
  out_shape[0] = end - begin;
  Tensor<T> out(out_shape);
  std::copy(a.value().data() + begin * inner, a.value().data() + end * inner, out.data());
  return make_op<T>(std::move(out), {a.node()}, [shape, begin, inner](const Tensor<T>& up) {
    Tensor<T> g(shape);
    std::copy(up.data(), up.data() + up.numel(), g.data() + begin * inner);
    return std::vector<Tensor<T>>{std::move(g)};
  });
}

// T feature maps (C,H,W) -> one block (C,T,H,W).
template <class T>
Var<T> stack_time(const std::vector<Var<T>>& steps) {
  require(!steps.empty(), "stack_time: empty input");
  const auto& s0 = steps[0].value().shape();
  require(s0.size() == 3, "stack_time: steps must be rank-3");
  const int64_t c = s0[0], h = s0[1], w = s0[2], tt = static_cast<int64_t>(steps.size());
  Tensor<T> out({c, tt, h, w});
  std::vector<std::shared_ptr<Node<T>>> parents;
  for (int64_t t = 0; t < tt; ++t) {
    require(steps[static_cast<size_t>(t)].value().shape() == s0, "stack_time: shape mismatch");
    const T* src = steps[static_cast<size_t>(t)].value().data();
    for (int64_t ci = 0; ci < c; ++ci)
      std::copy(src + ci * h * w, src + (ci + 1) * h * w, out.data() + (ci * tt + t) * h * w);
    parents.push_back(steps[static_cast<size_t>(t)].node());
  }
  return make_op<T>(std::move(out), std::move(parents), [c, tt, h, w](const Tensor<T>& up) {
    std::vector<Tensor<T>> grads;
    grads.reserve(static_cast<size_t>(tt));
    for (int64_t t = 0; t < tt; ++t) {
      Tensor<T> g({c, h, w});
      for (int64_t ci = 0; ci < c; ++ci)
        std::copy(up.data() + (ci * tt + t) * h * w, up.data() + (ci * tt + t + 1) * h * w,
                  g.data() + ci * h * w);
      grads.push_back(std::move(g));
    }
    return grads;
  });
}

// ---------------------------------------------------------------------------
// Convolutions
// ---------------------------------------------------------------------------

template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int64_t stride, int64_t pad) {
  const auto& xs = x.value().shape();
  const auto& ws = w.value().shape();
  require(xs.size() == 3 && ws.size() == 4, "conv2d: expects x (C,H,W), w (Co,Ci,kh,kw)");
  require(xs[0] == ws[1], "conv2d: input channel mismatch");
  const int64_t cin = xs[0], h = xs[1], wd = xs[2];
  const int64_t cout = ws[0], kh = ws[2], kw = ws[3];
  const int64_t ho = (h + 2 * pad - kh) / stride + 1;
  const int64_t wo = (wd + 2 * pad - kw) / stride + 1;
  require(ho > 0 && wo > 0, "conv2d: non-positive output size");
  const int64_t ckk = cin * kh * kw, cols = ho * wo;

  std::vector<T> k(static_cast<size_t>(ckk * cols));
  detail::im2col2d(x.value().data(), cin, h, wd, kh, kw, stride, pad, ho, wo, k.data());
  Tensor<T> out({cout, ho, wo});
  detail::gemm(w.value().data(), k.data(), out.data(), cout, ckk, cols);
  if (b.defined()) {
    require(b.value().numel() == cout, "conv2d: bias size mismatch");
    for (int64_t co = 0; co < cout; ++co) {
      T bv = b.value()[co];
      T* o = out.data() + co * cols;
      for (int64_t i = 0; i < cols; ++i) o[i] += bv;
    }
  }

  auto xn = x.node(), wn = w.node(), bn = b.defined() ? b.node() : nullptr;
  auto backward = [xn, wn, bn, cin, h, wd, cout, kh, kw, stride, pad, ho, wo, ckk,
                   cols](const Tensor<T>& up) {
    std::vector<Tensor<T>> grads(bn ? 3 : 2);
    // re-derive the unfolded input; cheaper than caching it across steps
    std::vector<T> k2(static_cast<size_t>(ckk * cols));
    detail::im2col2d(xn->value.data(), cin, h, wd, kh, kw, stride, pad, ho, wo, k2.data());
    if (wn->requires_grad) {
      Tensor<T> dw({cout, cin, kh, kw});
      detail::gemm_a_bt(up.data(), k2.data(), dw.data(), cout, cols, ckk);
      grads[1] = std::move(dw);
    }
    if (xn->requires_grad) {
      std::vector<T> dk(static_cast<size_t>(ckk * cols));
      detail::gemm_at_b(wn->value.data(), up.data(), dk.data(), ckk, cout, cols);
      Tensor<T> dx({cin, h, wd});
      detail::col2im2d(dk.data(), cin, h, wd, kh, kw, stride, pad, ho, wo, dx.data());
      grads[0] = std::move(dx);
    }
    if (bn && bn->requires_grad) {
      Tensor<T> db({cout});
      for (int64_t co = 0; co < cout; ++co) {
        T s = T(0);
        const T* u = up.data() + co * cols;
        for (int64_t i = 0; i < cols; ++i) s += u[i];
        db[co] = s;
      }
      grads[2] = std::move(db);
    }
    return grads;
  };
  std::vector<std::shared_ptr<Node<T>>> parents{xn, wn};
  if (bn) parents.push_back(bn);
  return make_op<T>(std::move(out), std::move(parents), std::move(backward));
}

template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, int64_t stride, int64_t pad) {
  return conv2d(x, w, Var<T>(), stride, pad);
}

// Stride-1 3d convolution over (C,T,H,W) blocks, zero padded to keep shape.
template <class T>
Var<T> conv3d_same(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  const auto& xs = x.value().shape();
  const auto& ws = w.value().shape();
  require(xs.size() == 4 && ws.size() == 5, "conv3d_same: expects x (C,T,H,W), w (Co,Ci,kt,kh,kw)");
  require(xs[0] == ws[1], "conv3d_same: input channel mismatch");
  const int64_t cin = xs[0], tt = xs[1], h = xs[2], wd = xs[3];
  const int64_t cout = ws[0], kt = ws[2], kh = ws[3], kw = ws[4];
  const int64_t pt = kt / 2, ph = kh / 2, pw = kw / 2;
  const int64_t ckk = cin * kt * kh * kw, cols = tt * h * wd;

  std::vector<T> k(static_cast<size_t>(ckk * cols));
  detail::im2col3d(x.value().data(), cin, tt, h, wd, kt, kh, kw, pt, ph, pw, k.data());
  Tensor<T> out({cout, tt, h, wd});
  detail::gemm(w.value().data(), k.data(), out.data(), cout, ckk, cols);
  if (b.defined()) {
    require(b.value().numel() == cout, "conv3d_same: bias size mismatch");
    for (int64_t co = 0; co < cout; ++co) {
      T bv = b.value()[co];
      T* o = out.data() + co * cols;
      for (int64_t i = 0; i < cols; ++i) o[i] += bv;
    }
  }

  auto xn = x.node(), wn = w.node(), bn = b.defined() ? b.node() : nullptr;
  auto backward = [xn, wn, bn, cin, tt, h, wd, cout, kt, kh, kw, pt, ph, pw, ckk,
                   cols](const Tensor<T>& up) {
    std::vector<Tensor<T>> grads(bn ? 3 : 2);
    std::vector<T> k2(static_cast<size_t>(ckk * cols));
    detail::im2col3d(xn->value.data(), cin, tt, h, wd, kt, kh, kw, pt, ph, pw, k2.data());
    if (wn->requires_grad) {
      Tensor<T> dw({cout, cin, kt, kh, kw});
      detail::gemm_a_bt(up.data(), k2.data(), dw.data(), cout, cols, ckk);
      grads[1] = std::move(dw);
    }
    if (xn->requires_grad) {
      std::vector<T> dk(static_cast<size_t>(ckk * cols));
      detail::gemm_at_b(wn->value.data(), up.data(), dk.data(), ckk, cout, cols);
      Tensor<T> dx({cin, tt, h, wd});
      detail::col2im3d(dk.data(), cin, tt, h, wd, kt, kh, kw, pt, ph, pw, dx.data());
      grads[0] = std::move(dx);
    }
    if (bn && bn->requires_grad) {
      Tensor<T> db({cout});
      for (int64_t co = 0; co < cout; ++co) {
        T s = T(0);
        const T* u = up.data() + co * cols;
        for (int64_t i = 0; i < cols; ++i) s += u[i];
        db[co] = s;
      }
      grads[2] = std::move(db);
    }
    return grads;
  };
  std::vector<std::shared_ptr<Node<T>>> parents{xn, wn};
  if (bn) parents.push_back(bn);
  return make_op<T>(std::move(out), std::move(parents), std::move(backward));
}

// Non-overlapping average pooling over the trailing two dims of a rank-3 or
// rank-4 tensor.
template <class T>
Var<T> avg_pool_spatial(const Var<T>& x, int64_t k) {
  const auto& xs = x.value().shape();
  require(xs.size() == 3 || xs.size() == 4, "avg_pool_spatial: rank must be 3 or 4");
  require(k >= 1, "avg_pool_spatial: k must be >= 1");
  const int64_t h = xs[xs.size() - 2], w = xs[xs.size() - 1];
  require(h % k == 0 && w % k == 0, "avg_pool_spatial: dims not divisible by k");
  const int64_t outer = x.value().numel() / (h * w);
  const int64_t ho = h / k, wo = w / k;
  auto out_shape = xs;
  out_shape[xs.size() - 2] = ho;
  out_shape[xs.size() - 1] = wo;
  Tensor<T> out(out_shape);
  const T inv = T(1) / static_cast<T>(k * k);
  for (int64_t o = 0; o < outer; ++o) {
    const T* src = x.value().data() + o * h * w;
    T* dst = out.data() + o * ho * wo;
    for (int64_t oh = 0; oh < ho; ++oh)
      for (int64_t ow = 0; ow < wo; ++ow) {
        T s = T(0);
        for (int64_t di = 0; di < k; ++di)
          for (int64_t dj = 0; dj < k; ++dj) s += src[(oh * k + di) * w + ow * k + dj];
        dst[oh * wo + ow] = s * inv;
      }
  }
  auto in_shape = xs;
  return make_op<T>(std::move(out), {x.node()},
                    [in_shape, outer, h, w, ho, wo, k, inv](const Tensor<T>& up) {
                      Tensor<T> dx(in_shape);
                      for (int64_t o = 0; o < outer; ++o) {
                        const T* u = up.data() + o * ho * wo;
                        T* dst = dx.data() + o * h * w;
                        for (int64_t oh = 0; oh < ho; ++oh)
                          for (int64_t ow = 0; ow < wo; ++ow) {
                            const T g = u[oh * wo + ow] * inv;
                            for (int64_t di = 0; di < k; ++di)
                              for (int64_t dj = 0; dj < k; ++dj)
                                dst[(oh * k + di) * w + ow * k + dj] += g;
                          }
                      }
                      return std::vector<Tensor<T>>{std::move(dx)};
                    });
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

template <class T>
Var<T> group_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, int64_t groups,
                  T eps = T(1e-5)) {
  const auto& xs = x.value().shape();
  require(xs.size() == 3, "group_norm: expects (C,H,W)");
  const int64_t c = xs[0], h = xs[1], w = xs[2];
  require(groups >= 1 && c % groups == 0, "group_norm: groups must divide channels");
  require(gamma.value().numel() == c && beta.value().numel() == c,
          "group_norm: affine param size mismatch");
  const int64_t cpg = c / groups, m = cpg * h * w;

  Tensor<T> xhat({c, h, w});
  std::vector<T> inv_std(static_cast<size_t>(groups));
  const T* xd = x.value().data();
  for (int64_t g = 0; g < groups; ++g) {
    const T* xg = xd + g * m;
    T mean = T(0);
    for (int64_t i = 0; i < m; ++i) mean += xg[i];
    mean /= static_cast<T>(m);
    T var = T(0);
    for (int64_t i = 0; i < m; ++i) {
      const T d = xg[i] - mean;
      var += d * d;
    }
    var /= static_cast<T>(m);
    const T s = T(1) / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(g)] = s;
    T* xh = xhat.data() + g * m;
    for (int64_t i = 0; i < m; ++i) xh[i] = (xg[i] - mean) * s;
  }
  Tensor<T> out({c, h, w});
  for (int64_t ci = 0; ci < c; ++ci) {
    const T ga = gamma.value()[ci], be = beta.value()[ci];
    const T* xh = xhat.data() + ci * h * w;
    T* o = out.data() + ci * h * w;
    for (int64_t i = 0; i < h * w; ++i) o[i] = ga * xh[i] + be;
  }

  auto xn = x.node(), gn = gamma.node(), bn = beta.node();
  Tensor<T> xhat_saved = xhat;
  auto backward = [xn, gn, bn, xhat_saved, inv_std, groups, c, h, w, cpg,
                   m](const Tensor<T>& up) {
    std::vector<Tensor<T>> grads(3);
    const int64_t hw = h * w;
    if (gn->requires_grad) {
      Tensor<T> dg({c});
      for (int64_t ci = 0; ci < c; ++ci) {
        T s = T(0);
        const T* u = up.data() + ci * hw;
        const T* xh = xhat_saved.data() + ci * hw;
        for (int64_t i = 0; i < hw; ++i) s += u[i] * xh[i];
        dg[ci] = s;
      }
      grads[1] = std::move(dg);
    }
    if (bn->requires_grad) {
      Tensor<T> db({c});
      for (int64_t ci = 0; ci < c; ++ci) {
        T s = T(0);
        const T* u = up.data() + ci * hw;
        for (int64_t i = 0; i < hw; ++i) s += u[i];
        db[ci] = s;
      }
      grads[2] = std::move(db);
    }
    if (xn->requires_grad) {
      Tensor<T> dx({c, h, w});
      const T* gv = gn->value.data();
      for (int64_t g = 0; g < groups; ++g) {
        const T* xh = xhat_saved.data() + g * m;
        const T* u = up.data() + g * m;
        T sum1 = T(0), sum2 = T(0);
        for (int64_t i = 0; i < m; ++i) {
          const T dxh = u[i] * gv[g * cpg + i / hw];
          sum1 += dxh;
          sum2 += dxh * xh[i];
        }
        const T s = inv_std[static_cast<size_t>(g)];
        T* d = dx.data() + g * m;
        for (int64_t i = 0; i < m; ++i) {
          const T dxh = u[i] * gv[g * cpg + i / hw];
          d[i] = s * (dxh - (sum1 + xh[i] * sum2) / static_cast<T>(m));
        }
      }
      grads[0] = std::move(dx);
    }
    return grads;
  };
  return make_op<T>(std::move(out), {xn, gn, bn}, std::move(backward));
}

// ---------------------------------------------------------------------------
// Linear algebra / broadcast ops used by the interaction block
// ---------------------------------------------------------------------------

template <class T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  const auto& as = a.value().shape();
  const auto& bs = b.value().shape();
  require(as.size() == 2 && bs.size() == 2 && as[1] == bs[0], "matmul: shape mismatch");
  const int64_t m = as[0], k = as[1], n = bs[1];
  Tensor<T> out({m, n});
  detail::gemm(a.value().data(), b.value().data(), out.data(), m, k, n);
  auto an = a.node(), bn = b.node();
  return make_op<T>(std::move(out), {an, bn}, [an, bn, m, k, n](const Tensor<T>& up) {
    std::vector<Tensor<T>> grads(2);
    if (an->requires_grad) {
      Tensor<T> da({m, k});
      detail::gemm_a_bt(up.data(), bn->value.data(), da.data(), m, n, k);
      grads[0] = std::move(da);
    }
    if (bn->requires_grad) {
      Tensor<T> db({k, n});
      detail::gemm_at_b(an->value.data(), up.data(), db.data(), k, m, n);
      grads[1] = std::move(db);
    }
    return grads;
  });
}

// y[r, c] = x[r, c] + b[r]
template <class T>
Var<T> add_rowwise(const Var<T>& x, const Var<T>& b) {
  const auto& xs = x.value().shape();
  require(xs.size() == 2 && b.value().numel() == xs[0], "add_rowwise: shape mismatch");
  const int64_t r = xs[0], c = xs[1];
  Tensor<T> out = x.value();
  for (int64_t i = 0; i < r; ++i) {
    T bv = b.value()[i];
    T* o = out.data() + i * c;
    for (int64_t j = 0; j < c; ++j) o[j] += bv;
  }
  return make_op<T>(std::move(out), {x.node(), b.node()}, [r, c](const Tensor<T>& up) {
    Tensor<T> db({r});
    for (int64_t i = 0; i < r; ++i) {
      T s = T(0);
      const T* u = up.data() + i * c;
      for (int64_t j = 0; j < c; ++j) s += u[j];
      db[i] = s;
    }
    return std::vector<Tensor<T>>{up, std::move(db)};
  });
}

// M[i, j] = a[i] + b[j]
template <class T>
Var<T> outer_add(const Var<T>& a, const Var<T>& b) {
  require(a.value().rank() == 1 && b.value().rank() == 1, "outer_add: rank-1 inputs expected");
  const int64_t p = a.value().numel(), q = b.value().numel();
  Tensor<T> out({p, q});
  const T* av = a.value().data();
  const T* bv = b.value().data();
  for (int64_t i = 0; i < p; ++i) {
    T* o = out.data() + i * q;
    const T ai = av[i];
    for (int64_t j = 0; j < q; ++j) o[j] = ai + bv[j];
  }
  return make_op<T>(std::move(out), {a.node(), b.node()}, [p, q](const Tensor<T>& up) {
    Tensor<T> da({p}), db({q});
    for (int64_t i = 0; i < p; ++i) {
      const T* u = up.data() + i * q;
      T s = T(0);
      for (int64_t j = 0; j < q; ++j) {
        s += u[j];
        db[j] += u[j];
      }
      da[i] = s;
    }
    return std::vector<Tensor<T>>{std::move(da), std::move(db)};
  });
}

// Broadcast multiply of (C,T,H,W) or (C,H,W) features by one (H,W) map.
template <class T>
Var<T> mul_mask_hw(const Var<T>& x, const Var<T>& m) {
  const auto& xs = x.value().shape();
  const auto& ms = m.value().shape();
  require(xs.size() == 3 || xs.size() == 4, "mul_mask_hw: x rank must be 3 or 4");
  const int64_t h = xs[xs.size() - 2], w = xs[xs.size() - 1];
  require(m.value().numel() == h * w, "mul_mask_hw: mask size mismatch");
  (void)ms;
  const int64_t outer = x.value().numel() / (h * w);
  Tensor<T> out = x.value();
  const T* mv = m.value().data();
  for (int64_t o = 0; o < outer; ++o) {
    T* d = out.data() + o * h * w;
    for (int64_t i = 0; i < h * w; ++i) d[i] *= mv[i];
  }
  auto xn = x.node(), mn = m.node();
  auto mask_shape = ms;
  return make_op<T>(std::move(out), {xn, mn},
                    [xn, mn, outer, h, w, mask_shape](const Tensor<T>& up) {
                      std::vector<Tensor<T>> grads(2);
                      const int64_t hw = h * w;
                      if (xn->requires_grad) {
                        Tensor<T> dx = up;
                        const T* mv = mn->value.data();
                        for (int64_t o = 0; o < outer; ++o) {
                          T* d = dx.data() + o * hw;
                          for (int64_t i = 0; i < hw; ++i) d[i] *= mv[i];
                        }
                        grads[0] = std::move(dx);
                      }
                      if (mn->requires_grad) {
                        Tensor<T> dm(mask_shape);
                        const T* xv = xn->value.data();
                        for (int64_t o = 0; o < outer; ++o) {
                          const T* u = up.data() + o * hw;
                          const T* xo = xv + o * hw;
                          for (int64_t i = 0; i < hw; ++i) dm[i] += u[i] * xo[i];
                        }
                        grads[1] = std::move(dm);
                      }
                      return grads;
                    });
}

template <class T>
Var<T> sum_all(const Var<T>& x) {
  T s = T(0);
  const T* xd = x.value().data();
  for (int64_t i = 0; i < x.value().numel(); ++i) s += xd[i];
  auto shape = x.value().shape();
  return make_op<T>(Tensor<T>::scalar(s), {x.node()}, [shape](const Tensor<T>& up) {
    return std::vector<Tensor<T>>{Tensor<T>::full(shape, up[0])};
  });
}

}  // namespace fieldcast::nn
