#ifndef MI2GAN_NN_LAYERS_HPP
#define MI2GAN_NN_LAYERS_HPP

#include "mi2gan/core/conv.hpp"
#include "mi2gan/core/rng.hpp"
#include "mi2gan/nn/module.hpp"

namespace mi2gan {

template <typename T>
Tensor<T> normal_init(std::vector<int64_t> shape, Rng& rng, double stddev = 0.02) {
  Tensor<T> t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.normal(0.0, stddev));
  return t;
}

template <typename T>
struct Conv2dLayer {
  Var<T> w, b;
  int64_t stride = 1;
  int64_t pad = 0;

  Conv2dLayer() = default;
  Conv2dLayer(int64_t cin, int64_t cout, int64_t k, int64_t stride_, int64_t pad_, Rng& rng)
      : stride(stride_), pad(pad_) {
    w = make_parameter(normal_init<T>({cout, cin, k, k}, rng));
    b = make_parameter(Tensor<T>({cout}));
  }

  Var<T> forward(const Var<T>& x) const { return conv2d(x, w, b, stride, pad); }

  void collect(const std::string& prefix, ParamList<T>& out) const {
    out.push_back({prefix + ".w", w});
    out.push_back({prefix + ".b", b});
  }
};

template <typename T>
struct InstanceNorm2dLayer {
  Var<T> gamma, beta;

  InstanceNorm2dLayer() = default;
  explicit InstanceNorm2dLayer(int64_t channels) {
    gamma = make_parameter(Tensor<T>::full({channels}, T(1)));
    beta = make_parameter(Tensor<T>({channels}));
  }

  Var<T> forward(const Var<T>& x) const { return instance_norm(x, gamma, beta); }

  void collect(const std::string& prefix, ParamList<T>& out) const {
    out.push_back({prefix + ".gamma", gamma});
    out.push_back({prefix + ".beta", beta});
  }
};

template <typename T>
struct LinearLayer {
  Var<T> w, b;

  LinearLayer() = default;
  LinearLayer(int64_t in_features, int64_t out_features, Rng& rng) {
    w = make_parameter(normal_init<T>({out_features, in_features}, rng));
    b = make_parameter(Tensor<T>({out_features}));
  }

  Var<T> forward(const Var<T>& x) const { return linear(x, w, b); }

  void collect(const std::string& prefix, ParamList<T>& out) const {
    out.push_back({prefix + ".w", w});
    out.push_back({prefix + ".b", b});
  }
};

}  // namespace mi2gan

#endif
