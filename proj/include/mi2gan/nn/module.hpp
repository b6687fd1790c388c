#ifndef MI2GAN_NN_MODULE_HPP
#define MI2GAN_NN_MODULE_HPP

#include <string>
#include <vector>

#include "mi2gan/core/autograd.hpp"

namespace mi2gan {

template <typename T>
struct NamedParam {
  std::string name;
  Var<T> var;
};

template <typename T>
using ParamList = std::vector<NamedParam<T>>;

template <typename T>
void append_params(ParamList<T>& dst, const ParamList<T>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

template <typename T>
void set_requires_grad(ParamList<T>& params, bool value) {
  for (auto& p : params) p.var->requires_grad = value;
}

template <typename T>
void zero_grad(ParamList<T>& params) {
  for (auto& p : params) p.var->zero_grad();
}

template <typename T>
int64_t param_count(const ParamList<T>& params) {
  int64_t n = 0;
  for (const auto& p : params) n += p.var->value.numel();
  return n;
}

// Gradient of a parameter as seen by tests: an unallocated grad reads as
// zeros.
template <typename T>
Tensor<T> grad_or_zeros(const Var<T>& param) {
  if (param->grad.numel() == param->value.numel()) return param->grad;
  return Tensor<T>(param->value.shape());
}

template <typename T>
double grad_norm(const ParamList<T>& params) {
  double acc = 0.0;
  for (const auto& p : params) {
    if (p.var->grad.numel() != p.var->value.numel()) continue;
    const T* g = p.var->grad.data();
    for (int64_t i = 0; i < p.var->grad.numel(); ++i) {
      const double v = static_cast<double>(g[i]);
      acc += v * v;
    }
  }
  return std::sqrt(acc);
}

template <typename T>
void clip_grad_norm(ParamList<T>& params, double max_norm) {
  const double total = grad_norm(params);
  if (total <= max_norm || total == 0.0) return;
  const T scale = static_cast<T>(max_norm / total);
  for (auto& p : params) {
    if (p.var->grad.numel() != p.var->value.numel()) continue;
    T* g = p.var->grad.data();
    for (int64_t i = 0; i < p.var->grad.numel(); ++i) g[i] *= scale;
  }
}

// Adam over a fixed parameter list. Moments live in the optimizer and are
// checkpointed alongside the parameters.
template <typename T>
class Adam {
 public:
  Adam() = default;
  Adam(ParamList<T> params, double lr, double beta1 = 0.5, double beta2 = 0.999,
       double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
      m_.emplace_back(p.var->value.shape());
      v_.emplace_back(p.var->value.shape());
    }
  }

  void zero_grad() { mi2gan::zero_grad(params_); }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t k = 0; k < params_.size(); ++k) {
      Var<T>& p = params_[k].var;
      const bool has_grad = p->grad.numel() == p->value.numel();
      T* m = m_[k].data();
      T* v = v_[k].data();
      T* w = p->value.data();
      const T* g = has_grad ? p->grad.data() : nullptr;
      for (int64_t i = 0; i < p->value.numel(); ++i) {
        const double gi = g ? static_cast<double>(g[i]) : 0.0;
        const double mi = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * gi;
        const double vi = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * gi * gi;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double update = lr_ * (mi / bc1) / (std::sqrt(vi / bc2) + eps_);
        w[i] -= static_cast<T>(update);
      }
    }
  }

  ParamList<T>& params() { return params_; }
  const ParamList<T>& params() const { return params_; }
  int64_t steps_taken() const { return t_; }
  void set_steps_taken(int64_t t) { t_ = t; }
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

  std::vector<Tensor<T>>& moments_m() { return m_; }
  std::vector<Tensor<T>>& moments_v() { return v_; }

 private:
  ParamList<T> params_;
  double lr_ = 0.0;
  double beta1_ = 0.5;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  int64_t t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace mi2gan

#endif
