#ifndef MI2GAN_CORE_CONV_HPP
#define MI2GAN_CORE_CONV_HPP

#include <Eigen/Core>

#include "mi2gan/core/ops.hpp"

namespace mi2gan {

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowMat<T>>;

inline int64_t conv_out_dim(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

template <typename T>
std::vector<T>& conv_scratch(int which) {
  thread_local std::vector<T> buf[4];
  return buf[which];
}

// Unfolds one sample into a patch-major (Ho*Wo) x (Cin*kh*kw) matrix: row l
// holds the receptive field of output pixel l. Patch-major keeps the GEMM
// tall and skinny, which is the efficient orientation for the narrow
// channel counts used here.
template <typename T>
void im2col_patches(const T* x, int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw,
                    int64_t stride, int64_t pad, int64_t ho, int64_t wo, T* col) {
  const int64_t K = cin * kh * kw;
  for (int64_t oy = 0; oy < ho; ++oy) {
    const int64_t base_iy = oy * stride - pad;
    for (int64_t ox = 0; ox < wo; ++ox) {
      const int64_t base_ix = ox * stride - pad;
      T* dst = col + (oy * wo + ox) * K;
      int64_t idx = 0;
      for (int64_t c = 0; c < cin; ++c) {
        const T* xc = x + c * h * w;
        for (int64_t ky = 0; ky < kh; ++ky) {
          const int64_t iy = base_iy + ky;
          if (iy < 0 || iy >= h) {
            for (int64_t kx = 0; kx < kw; ++kx) dst[idx++] = T(0);
            continue;
          }
          const T* row = xc + iy * w;
          if (base_ix >= 0 && base_ix + kw <= w) {
            for (int64_t kx = 0; kx < kw; ++kx) dst[idx++] = row[base_ix + kx];
          } else {
            for (int64_t kx = 0; kx < kw; ++kx) {
              const int64_t ix = base_ix + kx;
              dst[idx++] = (ix >= 0 && ix < w) ? row[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

// Scatter-add of a patch-major gradient matrix back onto one input sample.
template <typename T>
void col2im_patches_add(const T* col, int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw,
                        int64_t stride, int64_t pad, int64_t ho, int64_t wo, T* dx) {
  const int64_t K = cin * kh * kw;
  for (int64_t oy = 0; oy < ho; ++oy) {
    const int64_t base_iy = oy * stride - pad;
    for (int64_t ox = 0; ox < wo; ++ox) {
      const int64_t base_ix = ox * stride - pad;
      const T* src = col + (oy * wo + ox) * K;
      int64_t idx = 0;
      for (int64_t c = 0; c < cin; ++c) {
        T* xc = dx + c * h * w;
        for (int64_t ky = 0; ky < kh; ++ky) {
          const int64_t iy = base_iy + ky;
          if (iy < 0 || iy >= h) {
            idx += kw;
            continue;
          }
          T* row = xc + iy * w;
          if (base_ix >= 0 && base_ix + kw <= w) {
            for (int64_t kx = 0; kx < kw; ++kx) row[base_ix + kx] += src[idx++];
          } else {
            for (int64_t kx = 0; kx < kw; ++kx) {
              const int64_t ix = base_ix + kx;
              if (ix >= 0 && ix < w) row[ix] += src[idx];
              ++idx;
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

// 2-d convolution, zero padding. x (n, cin, h, w), w (cout, cin, kh, kw),
// b (cout). Output spatial dims follow floor((d + 2p - k) / s) + 1.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int64_t stride, int64_t pad) {
  const auto& xs = x->value.shape();
  const auto& ws = w->value.shape();
  check(xs.size() == 4, "conv2d: input must be rank 4, got " + shape_str(xs));
  check(ws.size() == 4, "conv2d: weight must be rank 4, got " + shape_str(ws));
  check(xs[1] == ws[1], "conv2d: channel mismatch, input " + shape_str(xs) + " weight " +
                            shape_str(ws));
  const int64_t n = xs[0], cin = xs[1], h = xs[2], wdt = xs[3];
  const int64_t cout = ws[0], kh = ws[2], kw = ws[3];
  check(b->value.numel() == cout, "conv2d: bias size mismatch");
  const int64_t ho = detail::conv_out_dim(h, kh, stride, pad);
  const int64_t wo = detail::conv_out_dim(wdt, kw, stride, pad);
  check(ho >= 1 && wo >= 1, "conv2d: input " + shape_str(xs) +
                                " below minimum spatial size for kernel " + shape_str(ws));
  const int64_t K = cin * kh * kw;
  const int64_t L = ho * wo;

  Tensor<T> out = Tensor<T>::uninitialized({n, cout, ho, wo});
  auto& col = detail::conv_scratch<T>(0);
  auto& yt = detail::conv_scratch<T>(1);
  col.resize(static_cast<size_t>(n * L * K));
  yt.resize(static_cast<size_t>(n * L * cout));
  for (int64_t i = 0; i < n; ++i) {
    detail::im2col_patches(x->value.data() + i * cin * h * wdt, cin, h, wdt, kh, kw, stride, pad,
                           ho, wo, col.data() + i * L * K);
  }
  {
    detail::ConstRowMap<T> colmap(col.data(), n * L, K);
    detail::ConstRowMap<T> wmat(w->value.data(), cout, K);
    detail::RowMap<T> ymap(yt.data(), n * L, cout);
    ymap.noalias() = colmap * wmat.transpose();
  }
  const T* pb = b->value.data();
  for (int64_t i = 0; i < n; ++i) {
    const T* src = yt.data() + i * L * cout;
    T* dst = out.data() + i * cout * L;
    for (int64_t co = 0; co < cout; ++co) {
      const T bias = pb[co];
      T* drow = dst + co * L;
      for (int64_t l = 0; l < L; ++l) drow[l] = src[l * cout + co] + bias;
    }
  }

  return make_result<T>(
      std::move(out), {x, w, b},
      [x, w, b, n, cin, h, wdt, cout, kh, kw, stride, pad, ho, wo, K, L](Node<T>& nd) {
        const T* g = nd.grad.data();

        if (b->requires_grad) {
          T* gb = b->ensure_grad().data();
          for (int64_t i = 0; i < n; ++i) {
            for (int64_t co = 0; co < cout; ++co) {
              const T* row = g + (i * cout + co) * L;
              double acc = 0.0;
              for (int64_t l = 0; l < L; ++l) acc += static_cast<double>(row[l]);
              gb[co] += static_cast<T>(acc);
            }
          }
        }

        if (!x->requires_grad && !w->requires_grad) return;

        // patch-major transpose of the incoming gradient
        auto& gyt = detail::conv_scratch<T>(2);
        gyt.resize(static_cast<size_t>(n * L * cout));
        for (int64_t i = 0; i < n; ++i) {
          const T* src = g + i * cout * L;
          T* dst = gyt.data() + i * L * cout;
          for (int64_t co = 0; co < cout; ++co) {
            const T* srow = src + co * L;
            for (int64_t l = 0; l < L; ++l) dst[l * cout + co] = srow[l];
          }
        }
        detail::ConstRowMap<T> gymap(gyt.data(), n * L, cout);

        if (w->requires_grad) {
          auto& col = detail::conv_scratch<T>(0);
          col.resize(static_cast<size_t>(n * L * K));
          for (int64_t i = 0; i < n; ++i) {
            detail::im2col_patches(x->value.data() + i * cin * h * wdt, cin, h, wdt, kh, kw,
                                   stride, pad, ho, wo, col.data() + i * L * K);
          }
          detail::ConstRowMap<T> colmap(col.data(), n * L, K);
          detail::RowMap<T>(w->ensure_grad().data(), cout, K).noalias() +=
              gymap.transpose() * colmap;
        }

        if (x->requires_grad) {
          T* gx = x->ensure_grad().data();
          auto& dcol = detail::conv_scratch<T>(3);
          dcol.resize(static_cast<size_t>(n * L * K));
          detail::ConstRowMap<T> wmat(w->value.data(), cout, K);
          detail::RowMap<T> dcolmap(dcol.data(), n * L, K);
          dcolmap.noalias() = gymap * wmat;
          for (int64_t i = 0; i < n; ++i) {
            detail::col2im_patches_add(dcol.data() + i * L * K, cin, h, wdt, kh, kw, stride, pad,
                                       ho, wo, gx + i * cin * h * wdt);
          }
        }
      });
}

// Fully connected layer: x (n, f), w (o, f), b (o) -> (n, o).
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  const auto& xs = x->value.shape();
  const auto& ws = w->value.shape();
  check(xs.size() == 2 && ws.size() == 2, "linear: rank-2 input and weight required");
  check(xs[1] == ws[1], "linear: feature mismatch " + shape_str(xs) + " vs " + shape_str(ws));
  const int64_t n = xs[0], f = xs[1], o = ws[0];
  check(b->value.numel() == o, "linear: bias size mismatch");
  Tensor<T> out = Tensor<T>::uninitialized({n, o});
  detail::ConstRowMap<T> xm(x->value.data(), n, f);
  detail::ConstRowMap<T> wm(w->value.data(), o, f);
  detail::RowMap<T> ym(out.data(), n, o);
  ym.noalias() = xm * wm.transpose();
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < o; ++j) po[i * o + j] += pb[j];

  return make_result<T>(std::move(out), {x, w, b}, [x, w, b, n, f, o](Node<T>& nd) {
    detail::ConstRowMap<T> gm(nd.grad.data(), n, o);
    if (x->requires_grad) {
      detail::ConstRowMap<T> wm2(w->value.data(), o, f);
      detail::RowMap<T>(x->ensure_grad().data(), n, f).noalias() += gm * wm2;
    }
    if (w->requires_grad) {
      detail::ConstRowMap<T> xm2(x->value.data(), n, f);
      detail::RowMap<T>(w->ensure_grad().data(), o, f).noalias() += gm.transpose() * xm2;
    }
    if (b->requires_grad) {
      T* gb = b->ensure_grad().data();
      const T* g = nd.grad.data();
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < o; ++j) gb[j] += g[i * o + j];
    }
  });
}

// Per-sample, per-channel normalization with learnable affine (gamma, beta
// of shape {c}).
template <typename T>
Var<T> instance_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                     double eps = 1e-5) {
  const auto& xs = x->value.shape();
  check(xs.size() == 4, "instance_norm: rank-4 input required");
  const int64_t n = xs[0], c = xs[1], hw = xs[2] * xs[3];
  check(gamma->value.numel() == c && beta->value.numel() == c,
        "instance_norm: affine parameter size mismatch");
  check(hw > 0, "instance_norm: empty spatial extent");

  Tensor<T> out = Tensor<T>::uninitialized(xs);
  Tensor<T> mean = Tensor<T>::uninitialized({n, c});
  Tensor<T> invstd = Tensor<T>::uninitialized({n, c});
  const T* px = x->value.data();
  const T* pg = gamma->value.data();
  const T* pbeta = beta->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < n * c; ++i) {
    const T* xi = px + i * hw;
    double acc = 0.0;
    for (int64_t j = 0; j < hw; ++j) acc += static_cast<double>(xi[j]);
    const double mu = acc / static_cast<double>(hw);
    double var = 0.0;
    for (int64_t j = 0; j < hw; ++j) {
      const double d = static_cast<double>(xi[j]) - mu;
      var += d * d;
    }
    var /= static_cast<double>(hw);
    const double is = 1.0 / std::sqrt(var + eps);
    mean[i] = static_cast<T>(mu);
    invstd[i] = static_cast<T>(is);
    const T gch = pg[i % c];
    const T bch = pbeta[i % c];
    const T tmu = static_cast<T>(mu);
    const T tis = static_cast<T>(is);
    T* oi = po + i * hw;
    for (int64_t j = 0; j < hw; ++j) {
      oi[j] = gch * ((xi[j] - tmu) * tis) + bch;
    }
  }

  return make_result<T>(
      std::move(out), {x, gamma, beta}, [x, gamma, beta, mean, invstd, n, c, hw](Node<T>& nd) {
        const T* g = nd.grad.data();
        const T* px2 = x->value.data();
        const T* pg2 = gamma->value.data();
        T* gx = x->requires_grad ? x->ensure_grad().data() : nullptr;
        T* ggamma = gamma->requires_grad ? gamma->ensure_grad().data() : nullptr;
        T* gbeta = beta->requires_grad ? beta->ensure_grad().data() : nullptr;
        for (int64_t i = 0; i < n * c; ++i) {
          const T* xi = px2 + i * hw;
          const T* gi = g + i * hw;
          const double mu = static_cast<double>(mean[i]);
          const double is = static_cast<double>(invstd[i]);
          double sum_g = 0.0, sum_gx = 0.0;
          for (int64_t j = 0; j < hw; ++j) {
            const double xhat = (static_cast<double>(xi[j]) - mu) * is;
            sum_g += static_cast<double>(gi[j]);
            sum_gx += static_cast<double>(gi[j]) * xhat;
          }
          if (ggamma) ggamma[i % c] += static_cast<T>(sum_gx);
          if (gbeta) gbeta[i % c] += static_cast<T>(sum_g);
          if (gx) {
            const double gch = static_cast<double>(pg2[i % c]);
            const double mg = sum_g / static_cast<double>(hw);
            const double mgx = sum_gx / static_cast<double>(hw);
            const T a1 = static_cast<T>(gch * is);
            const T a2 = static_cast<T>(mg);
            const T a3 = static_cast<T>(mgx * is);
            const T tmu = static_cast<T>(mu);
            T* gxi = gx + i * hw;
            for (int64_t j = 0; j < hw; ++j) {
              gxi[j] += a1 * (gi[j] - a2 - (xi[j] - tmu) * a3);
            }
          }
        }
      });
}

// Nearest-neighbor 2x spatial upsampling.
template <typename T>
Var<T> upsample_nearest2(const Var<T>& x) {
  const auto& xs = x->value.shape();
  check(xs.size() == 4, "upsample_nearest2: rank-4 input required");
  const int64_t n = xs[0], c = xs[1], h = xs[2], w = xs[3];
  Tensor<T> out = Tensor<T>::uninitialized({n, c, 2 * h, 2 * w});
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < n * c; ++i) {
    const T* xi = px + i * h * w;
    T* oi = po + i * 4 * h * w;
    for (int64_t y = 0; y < h; ++y) {
      T* row0 = oi + (2 * y) * 2 * w;
      T* row1 = oi + (2 * y + 1) * 2 * w;
      for (int64_t xcol = 0; xcol < w; ++xcol) {
        const T v = xi[y * w + xcol];
        row0[2 * xcol] = v;
        row0[2 * xcol + 1] = v;
        row1[2 * xcol] = v;
        row1[2 * xcol + 1] = v;
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [x, n, c, h, w](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* g = nd.grad.data();
    for (int64_t i = 0; i < n * c; ++i) {
      T* gxi = gx + i * h * w;
      const T* gi = g + i * 4 * h * w;
      for (int64_t y = 0; y < h; ++y) {
        const T* row0 = gi + (2 * y) * 2 * w;
        const T* row1 = gi + (2 * y + 1) * 2 * w;
        for (int64_t xcol = 0; xcol < w; ++xcol) {
          gxi[y * w + xcol] += row0[2 * xcol] + row0[2 * xcol + 1] + row1[2 * xcol] +
                               row1[2 * xcol + 1];
        }
      }
    }
  });
}

}  // namespace mi2gan

#endif
