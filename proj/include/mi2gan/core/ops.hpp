#ifndef MI2GAN_CORE_OPS_HPP
#define MI2GAN_CORE_OPS_HPP

#include <cmath>

#include "mi2gan/core/autograd.hpp"

namespace mi2gan {

template <typename T>
double scalar_value(const Var<T>& v) {
  check(v->value.numel() == 1, "scalar_value: not a scalar");
  return static_cast<double>(v->value[0]);
}

namespace detail {

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src, T scale = T(1)) {
  T* d = dst.data();
  const T* s = src.data();
  for (int64_t i = 0; i < dst.numel(); ++i) d[i] += scale * s[i];
}

}  // namespace detail

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  check(a->value.same_shape(b->value), "add: shape mismatch " + shape_str(a->value.shape()) +
                                           " vs " + shape_str(b->value.shape()));
  Tensor<T> out = Tensor<T>::uninitialized(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + pb[i];
  return make_result<T>(std::move(out), {a, b}, [a, b](Node<T>& n) {
    if (a->requires_grad) detail::accumulate(a->ensure_grad(), n.grad);
    if (b->requires_grad) detail::accumulate(b->ensure_grad(), n.grad);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  check(a->value.same_shape(b->value), "sub: shape mismatch");
  Tensor<T> out = Tensor<T>::uninitialized(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] - pb[i];
  return make_result<T>(std::move(out), {a, b}, [a, b](Node<T>& n) {
    if (a->requires_grad) detail::accumulate(a->ensure_grad(), n.grad);
    if (b->requires_grad) detail::accumulate(b->ensure_grad(), n.grad, T(-1));
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  check(a->value.same_shape(b->value), "mul: shape mismatch");
  Tensor<T> out = Tensor<T>::uninitialized(a->value.shape());
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * pb[i];
  return make_result<T>(std::move(out), {a, b}, [a, b](Node<T>& n) {
    if (a->requires_grad) {
      Tensor<T>& ga = a->ensure_grad();
      const T* pb2 = b->value.data();
      const T* g = n.grad.data();
      for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += g[i] * pb2[i];
    }
    if (b->requires_grad) {
      Tensor<T>& gb = b->ensure_grad();
      const T* pa2 = a->value.data();
      const T* g = n.grad.data();
      for (int64_t i = 0; i < gb.numel(); ++i) gb[i] += g[i] * pa2[i];
    }
  });
}

template <typename T>
Var<T> mul_scalar(const Var<T>& a, double s) {
  Tensor<T> out = Tensor<T>::uninitialized(a->value.shape());
  const T* pa = a->value.data();
  T* po = out.data();
  const T ts = static_cast<T>(s);
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * ts;
  return make_result<T>(std::move(out), {a}, [a, ts](Node<T>& n) {
    if (a->requires_grad) detail::accumulate(a->ensure_grad(), n.grad, ts);
  });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, double s) {
  Tensor<T> out = Tensor<T>::uninitialized(a->value.shape());
  const T* pa = a->value.data();
  T* po = out.data();
  const T ts = static_cast<T>(s);
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + ts;
  return make_result<T>(std::move(out), {a}, [a](Node<T>& n) {
    if (a->requires_grad) detail::accumulate(a->ensure_grad(), n.grad);
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out = Tensor<T>::uninitialized(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = px[i] > T(0) ? px[i] : T(0);
  return make_result<T>(std::move(out), {x}, [x](Node<T>& n) {
    if (!x->requires_grad) return;
    Tensor<T>& gx = x->ensure_grad();
    const T* px2 = x->value.data();
    const T* g = n.grad.data();
    for (int64_t i = 0; i < gx.numel(); ++i) {
      if (px2[i] > T(0)) gx[i] += g[i];
    }
  });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, double slope = 0.2) {
  Tensor<T> out = Tensor<T>::uninitialized(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  const T s = static_cast<T>(slope);
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = px[i] > T(0) ? px[i] : s * px[i];
  return make_result<T>(std::move(out), {x}, [x, s](Node<T>& n) {
    if (!x->requires_grad) return;
    Tensor<T>& gx = x->ensure_grad();
    const T* px2 = x->value.data();
    const T* g = n.grad.data();
    for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += px2[i] > T(0) ? g[i] : s * g[i];
  });
}

template <typename T>
Var<T> tanh_act(const Var<T>& x) {
  Tensor<T> out = Tensor<T>::uninitialized(x->value.shape());
  const T* px = x->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] = std::tanh(px[i]);
  Tensor<T> saved = out;  // shares storage, read-only in backward
  return make_result<T>(std::move(out), {x}, [x, saved](Node<T>& n) {
    if (!x->requires_grad) return;
    Tensor<T>& gx = x->ensure_grad();
    const T* y = saved.data();
    const T* g = n.grad.data();
    for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += g[i] * (T(1) - y[i] * y[i]);
  });
}

// Channel concatenation of two NCHW tensors.
template <typename T>
Var<T> concat_ch(const Var<T>& a, const Var<T>& b) {
  const auto& sa = a->value.shape();
  const auto& sb = b->value.shape();
  check(sa.size() == 4 && sb.size() == 4, "concat_ch: rank-4 inputs required");
  check(sa[0] == sb[0] && sa[2] == sb[2] && sa[3] == sb[3],
        "concat_ch: batch/spatial mismatch " + shape_str(sa) + " vs " + shape_str(sb));
  const int64_t n = sa[0], ca = sa[1], cb = sb[1], hw = sa[2] * sa[3];
  Tensor<T> out = Tensor<T>::uninitialized({n, ca + cb, sa[2], sa[3]});
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < n; ++i) {
    std::copy(pa + i * ca * hw, pa + (i + 1) * ca * hw, po + i * (ca + cb) * hw);
    std::copy(pb + i * cb * hw, pb + (i + 1) * cb * hw, po + i * (ca + cb) * hw + ca * hw);
  }
  return make_result<T>(std::move(out), {a, b}, [a, b, n, ca, cb, hw](Node<T>& nd) {
    const T* g = nd.grad.data();
    if (a->requires_grad) {
      T* ga = a->ensure_grad().data();
      for (int64_t i = 0; i < n; ++i) {
        const T* src = g + i * (ca + cb) * hw;
        T* dst = ga + i * ca * hw;
        for (int64_t j = 0; j < ca * hw; ++j) dst[j] += src[j];
      }
    }
    if (b->requires_grad) {
      T* gb = b->ensure_grad().data();
      for (int64_t i = 0; i < n; ++i) {
        const T* src = g + i * (ca + cb) * hw + ca * hw;
        T* dst = gb + i * cb * hw;
        for (int64_t j = 0; j < cb * hw; ++j) dst[j] += src[j];
      }
    }
  });
}

// Same storage viewed under a new shape.
template <typename T>
Var<T> reshape(const Var<T>& x, std::vector<int64_t> shape) {
  Tensor<T> out = x->value.reshaped(std::move(shape));
  return make_result<T>(std::move(out), {x}, [x](Node<T>& n) {
    if (x->requires_grad) detail::accumulate(x->ensure_grad(), n.grad.reshaped(x->value.shape()));
  });
}

// (n, c, h, w) -> (n, c) spatial mean.
template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  const auto& s = x->value.shape();
  check(s.size() == 4, "global_avg_pool: rank-4 input required");
  const int64_t n = s[0], c = s[1], hw = s[2] * s[3];
  check(hw > 0, "global_avg_pool: empty spatial extent");
  Tensor<T> out = Tensor<T>::uninitialized({n, c});
  const T* px = x->value.data();
  for (int64_t i = 0; i < n * c; ++i) {
    double acc = 0.0;
    for (int64_t j = 0; j < hw; ++j) acc += static_cast<double>(px[i * hw + j]);
    out[i] = static_cast<T>(acc / static_cast<double>(hw));
  }
  return make_result<T>(std::move(out), {x}, [x, hw](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* g = nd.grad.data();
    const T inv = static_cast<T>(1.0 / static_cast<double>(hw));
    for (int64_t i = 0; i < nd.grad.numel(); ++i) {
      for (int64_t j = 0; j < hw; ++j) gx[i * hw + j] += g[i] * inv;
    }
  });
}

template <typename T>
Var<T> mean_all(const Var<T>& x) {
  const int64_t n = x->value.numel();
  check(n > 0, "mean_all: empty tensor");
  double acc = 0.0;
  const T* px = x->value.data();
  for (int64_t i = 0; i < n; ++i) acc += static_cast<double>(px[i]);
  Tensor<T> out = Tensor<T>::full({1}, static_cast<T>(acc / static_cast<double>(n)));
  return make_result<T>(std::move(out), {x}, [x, n](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T g = nd.grad[0] / static_cast<T>(n);
    for (int64_t i = 0; i < n; ++i) gx[i] += g;
  });
}

// Mean absolute difference over all elements (the L1 losses use this).
template <typename T>
Var<T> l1_mean(const Var<T>& a, const Var<T>& b) {
  check(a->value.same_shape(b->value), "l1_mean: shape mismatch " +
                                           shape_str(a->value.shape()) + " vs " +
                                           shape_str(b->value.shape()));
  const int64_t n = a->value.numel();
  check(n > 0, "l1_mean: empty tensors");
  const T* pa = a->value.data();
  const T* pb = b->value.data();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += std::abs(static_cast<double>(pa[i]) - static_cast<double>(pb[i]));
  Tensor<T> out = Tensor<T>::full({1}, static_cast<T>(acc / static_cast<double>(n)));
  return make_result<T>(std::move(out), {a, b}, [a, b, n](Node<T>& nd) {
    const T g = nd.grad[0] / static_cast<T>(n);
    const T* pa2 = a->value.data();
    const T* pb2 = b->value.data();
    T* ga = a->requires_grad ? a->ensure_grad().data() : nullptr;
    T* gb = b->requires_grad ? b->ensure_grad().data() : nullptr;
    for (int64_t i = 0; i < n; ++i) {
      const T d = pa2[i] - pb2[i];
      const T s = d > T(0) ? g : (d < T(0) ? -g : T(0));
      if (ga) ga[i] += s;
      if (gb) gb[i] -= s;
    }
  });
}

// mean((x - target)^2), the least-squares GAN building block.
template <typename T>
Var<T> mse_to_const(const Var<T>& x, double target) {
  const int64_t n = x->value.numel();
  check(n > 0, "mse_to_const: empty tensor");
  const T* px = x->value.data();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(px[i]) - target;
    acc += d * d;
  }
  Tensor<T> out = Tensor<T>::full({1}, static_cast<T>(acc / static_cast<double>(n)));
  const T t = static_cast<T>(target);
  return make_result<T>(std::move(out), {x}, [x, n, t](Node<T>& nd) {
    if (!x->requires_grad) return;
    T* gx = x->ensure_grad().data();
    const T* px2 = x->value.data();
    const T g = T(2) * nd.grad[0] / static_cast<T>(n);
    for (int64_t i = 0; i < n; ++i) gx[i] += g * (px2[i] - t);
  });
}

// Numerically stable mean binary cross-entropy on logits; targets are a
// plain tensor in {0, 1}.
template <typename T>
Var<T> bce_with_logits_mean(const Var<T>& logits, const Tensor<T>& targets) {
  check(logits->value.same_shape(targets), "bce_with_logits_mean: shape mismatch");
  const int64_t n = logits->value.numel();
  check(n > 0, "bce_with_logits_mean: empty tensors");
  const T* pz = logits->value.data();
  const T* py = targets.data();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double z = static_cast<double>(pz[i]);
    const double y = static_cast<double>(py[i]);
    acc += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  Tensor<T> out = Tensor<T>::full({1}, static_cast<T>(acc / static_cast<double>(n)));
  return make_result<T>(std::move(out), {logits}, [logits, targets, n](Node<T>& nd) {
    if (!logits->requires_grad) return;
    T* gx = logits->ensure_grad().data();
    const T* pz2 = logits->value.data();
    const T* py2 = targets.data();
    const double g = static_cast<double>(nd.grad[0]) / static_cast<double>(n);
    for (int64_t i = 0; i < n; ++i) {
      const double z = static_cast<double>(pz2[i]);
      const double sig = 1.0 / (1.0 + std::exp(-z));
      gx[i] += static_cast<T>(g * (sig - static_cast<double>(py2[i])));
    }
  });
}

// Donsker-Varadhan lower bound on MI from critic scores:
//   mean(scores_joint) - log(mean(exp(scores_marginal)))
// computed as mean(J - m) - log(mean(exp(M - m))) with m = max(M), which is
// finite for large score magnitudes and exactly zero when every score equals
// the same constant.
template <typename T>
Var<T> dv_bound(const Var<T>& scores_joint, const Var<T>& scores_marginal) {
  const int64_t nj = scores_joint->value.numel();
  const int64_t nm = scores_marginal->value.numel();
  check(nj > 0 && nm > 0, "dv_bound: empty score vectors");
  const T* pj = scores_joint->value.data();
  const T* pm = scores_marginal->value.data();
  for (int64_t i = 0; i < nj; ++i)
    check(std::isfinite(static_cast<double>(pj[i])), "dv_bound: non-finite joint score");
  for (int64_t i = 0; i < nm; ++i)
    check(std::isfinite(static_cast<double>(pm[i])), "dv_bound: non-finite marginal score");

  T m = pm[0];
  for (int64_t i = 1; i < nm; ++i) m = std::max(m, pm[i]);

  double mean_shifted_j = 0.0;
  for (int64_t i = 0; i < nj; ++i) mean_shifted_j += static_cast<double>(pj[i] - m);
  mean_shifted_j /= static_cast<double>(nj);

  double sum_exp = 0.0;
  for (int64_t i = 0; i < nm; ++i) sum_exp += std::exp(static_cast<double>(pm[i] - m));
  const double log_mean_exp = std::log(sum_exp / static_cast<double>(nm));

  Tensor<T> out = Tensor<T>::full({1}, static_cast<T>(mean_shifted_j - log_mean_exp));
  return make_result<T>(
      std::move(out), {scores_joint, scores_marginal},
      [scores_joint, scores_marginal, nj, nm, m, sum_exp](Node<T>& nd) {
        const double g = static_cast<double>(nd.grad[0]);
        if (scores_joint->requires_grad) {
          T* gj = scores_joint->ensure_grad().data();
          const T gval = static_cast<T>(g / static_cast<double>(nj));
          for (int64_t i = 0; i < nj; ++i) gj[i] += gval;
        }
        if (scores_marginal->requires_grad) {
          T* gm = scores_marginal->ensure_grad().data();
          const T* pm2 = scores_marginal->value.data();
          for (int64_t i = 0; i < nm; ++i) {
            const double w = std::exp(static_cast<double>(pm2[i] - m)) / sum_exp;
            gm[i] -= static_cast<T>(g * w);
          }
        }
      });
}

// Convenience wrapper evaluating the DV bound on plain score vectors.
template <typename T>
double dv_lower_bound(const Tensor<T>& scores_joint, const Tensor<T>& scores_marginal) {
  NoGradGuard ng;
  auto b = dv_bound(make_constant(scores_joint), make_constant(scores_marginal));
  return scalar_value(b);
}

// Bias-corrected MINE ascent surrogate:
//   mean(scores_joint) - mean(exp(scores_marginal)) / denom
// where denom is a detached moving average of mean(exp(scores_marginal)).
// Its gradient equals the DV-bound gradient with the log term's denominator
// replaced by the moving average.
template <typename T>
Var<T> mine_surrogate(const Var<T>& scores_joint, const Var<T>& scores_marginal, double denom) {
  const int64_t nj = scores_joint->value.numel();
  const int64_t nm = scores_marginal->value.numel();
  check(nj > 0 && nm > 0, "mine_surrogate: empty score vectors");
  check(denom > 0.0 && std::isfinite(denom), "mine_surrogate: invalid denominator");
  const T* pj = scores_joint->value.data();
  const T* pm = scores_marginal->value.data();
  double mean_j = 0.0;
  for (int64_t i = 0; i < nj; ++i) mean_j += static_cast<double>(pj[i]);
  mean_j /= static_cast<double>(nj);
  double mean_exp = 0.0;
  for (int64_t i = 0; i < nm; ++i) mean_exp += std::exp(static_cast<double>(pm[i]));
  mean_exp /= static_cast<double>(nm);

  Tensor<T> out = Tensor<T>::full({1}, static_cast<T>(mean_j - mean_exp / denom));
  return make_result<T>(
      std::move(out), {scores_joint, scores_marginal},
      [scores_joint, scores_marginal, nj, nm, denom](Node<T>& nd) {
        const double g = static_cast<double>(nd.grad[0]);
        if (scores_joint->requires_grad) {
          T* gj = scores_joint->ensure_grad().data();
          const T gval = static_cast<T>(g / static_cast<double>(nj));
          for (int64_t i = 0; i < nj; ++i) gj[i] += gval;
        }
        if (scores_marginal->requires_grad) {
          T* gm = scores_marginal->ensure_grad().data();
          const T* pm2 = scores_marginal->value.data();
          const double scale = g / (static_cast<double>(nm) * denom);
          for (int64_t i = 0; i < nm; ++i) {
            gm[i] -= static_cast<T>(scale * std::exp(static_cast<double>(pm2[i])));
          }
        }
      });
}

// mean(exp(scores)) of a plain vector, for the MINE moving-average update.
template <typename T>
double mean_exp(const Tensor<T>& scores) {
  double acc = 0.0;
  for (int64_t i = 0; i < scores.numel(); ++i) acc += std::exp(static_cast<double>(scores[i]));
  return acc / static_cast<double>(scores.numel());
}

}  // namespace mi2gan

#endif
