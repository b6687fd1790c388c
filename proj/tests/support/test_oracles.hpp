#ifndef MI2GAN_TESTS_SUPPORT_TEST_ORACLES_HPP
#define MI2GAN_TESTS_SUPPORT_TEST_ORACLES_HPP

// Independent reference implementations used as oracles by the unit and
// acceptance suites. Everything here is written as plain scalar loops with
// no shared code paths with the library ops they check.

#include <cmath>
#include <functional>
#include <vector>

#include "mi2gan/core/ops.hpp"
#include "mi2gan/nn/module.hpp"

namespace mi2gan::testing {

// Direct 7-loop convolution reference.
template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                       int64_t stride, int64_t pad) {
  const int64_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int64_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int64_t ho = (h + 2 * pad - kh) / stride + 1;
  const int64_t wo = (wd + 2 * pad - kw) / stride + 1;
  Tensor<T> y({n, cout, ho, wo});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t co = 0; co < cout; ++co)
      for (int64_t oy = 0; oy < ho; ++oy)
        for (int64_t ox = 0; ox < wo; ++ox) {
          double acc = static_cast<double>(b[co]);
          for (int64_t ci = 0; ci < cin; ++ci)
            for (int64_t ky = 0; ky < kh; ++ky)
              for (int64_t kx = 0; kx < kw; ++kx) {
                const int64_t iy = oy * stride - pad + ky;
                const int64_t ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
                acc += static_cast<double>(x.at4(i, ci, iy, ix)) *
                       static_cast<double>(w.at4(co, ci, ky, kx));
              }
          y.at4(i, co, oy, ox) = static_cast<T>(acc);
        }
  return y;
}

// Scalar-loop mean absolute difference.
template <typename T>
double loop_l1_mean(const Tensor<T>& a, const Tensor<T>& b) {
  double acc = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i)
    acc += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return acc / static_cast<double>(a.numel());
}

// Set-counting Dice reference.
inline double loop_dice(const Tensor<float>& x, const Tensor<float>& y) {
  long long nx = 0, ny = 0, inter = 0;
  for (int64_t i = 0; i < x.numel(); ++i) {
    if (x[i] == 1.0f) ++nx;
    if (y[i] == 1.0f) ++ny;
    if (x[i] == 1.0f && y[i] == 1.0f) ++inter;
  }
  if (nx + ny == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(nx + ny);
}

// Direct scalar evaluation of the DV bound.
inline double loop_dv_bound(const std::vector<double>& joint, const std::vector<double>& marginal) {
  double mj = 0.0;
  for (double v : joint) mj += v;
  mj /= static_cast<double>(joint.size());
  double me = 0.0;
  for (double v : marginal) me += std::exp(v);
  me /= static_cast<double>(marginal.size());
  return mj - std::log(me);
}

struct GradCheckResult {
  double autodiff = 0.0;
  double central_diff = 0.0;
  double rel_error = 1.0;
  bool ok = false;
};

// Central-difference check of d(loss)/d(param[entry]) at step h. The loss
// closure must rebuild its graph from current parameter values on every
// call.
inline GradCheckResult central_diff_check(const Var<double>& param, int64_t entry,
                                          const std::function<Var<double>()>& loss_fn,
                                          double h = 1e-3, double rel_tol = 1e-3) {
  GradCheckResult res;

  Var<double> loss = loss_fn();
  backward(loss);
  res.autodiff = grad_or_zeros(param)[entry];
  param->zero_grad();

  const double saved = param->value[entry];
  param->value[entry] = saved + h;
  double f_plus;
  {
    NoGradGuard ng;
    f_plus = scalar_value(loss_fn());
  }
  param->value[entry] = saved - h;
  double f_minus;
  {
    NoGradGuard ng;
    f_minus = scalar_value(loss_fn());
  }
  param->value[entry] = saved;

  res.central_diff = (f_plus - f_minus) / (2.0 * h);
  const double denom = std::max({std::abs(res.autodiff), std::abs(res.central_diff), 1e-8});
  res.rel_error = std::abs(res.autodiff - res.central_diff) / denom;
  res.ok = res.rel_error <= rel_tol;
  return res;
}

// Runs the check on the first parameter entry with a non-negligible
// gradient (so the relative tolerance is meaningful).
inline GradCheckResult gradcheck_first_active(const Var<double>& param,
                                              const std::function<Var<double>()>& loss_fn,
                                              double h = 1e-3, double rel_tol = 1e-3) {
  const int64_t n = std::min<int64_t>(param->value.numel(), 16);
  GradCheckResult last;
  for (int64_t entry = 0; entry < n; ++entry) {
    last = central_diff_check(param, entry, loss_fn, h, rel_tol);
    if (std::abs(last.central_diff) > 1e-6) return last;
  }
  return last;
}

}  // namespace mi2gan::testing

#endif
