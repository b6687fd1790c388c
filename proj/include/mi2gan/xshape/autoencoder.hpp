#ifndef MI2GAN_XSHAPE_AUTOENCODER_HPP
#define MI2GAN_XSHAPE_AUTOENCODER_HPP

#include "mi2gan/nn/layers.hpp"

namespace mi2gan {

inline constexpr int64_t kLatentChannels = 64;

// Domain-specific content encoder: (n, 3, h, w) -> (n, 64, h/4, w/4).
// Instance norm + leaky ReLU, two stride-2 stages.
template <typename T>
struct ContentEncoder {
  Conv2dLayer<T> e1, e2, e3, e4;
  InstanceNorm2dLayer<T> in1, in2, in3, in4;

  ContentEncoder() = default;
  explicit ContentEncoder(Rng& rng, int64_t base = 8) {
    e1 = Conv2dLayer<T>(3, base, 7, 1, 3, rng);
    in1 = InstanceNorm2dLayer<T>(base);
    e2 = Conv2dLayer<T>(base, 2 * base, 3, 2, 1, rng);
    in2 = InstanceNorm2dLayer<T>(2 * base);
    e3 = Conv2dLayer<T>(2 * base, 4 * base, 3, 2, 1, rng);
    in3 = InstanceNorm2dLayer<T>(4 * base);
    e4 = Conv2dLayer<T>(4 * base, kLatentChannels, 3, 1, 1, rng);
    in4 = InstanceNorm2dLayer<T>(kLatentChannels);
  }

  Var<T> forward(const Var<T>& x) const {
    const auto& s = x->value.shape();
    check(s.size() == 4 && s[1] == 3, "encoder: input must be (n, 3, h, w), got " +
                                          shape_str(s));
    check(s[2] % 4 == 0 && s[3] % 4 == 0,
          "encoder: spatial dims must be divisible by 4, got " + shape_str(s));
    Var<T> h = leaky_relu(in1.forward(e1.forward(x)), 0.2);
    h = leaky_relu(in2.forward(e2.forward(h)), 0.2);
    h = leaky_relu(in3.forward(e3.forward(h)), 0.2);
    return leaky_relu(in4.forward(e4.forward(h)), 0.2);
  }

  ParamList<T> parameters(const std::string& prefix = "enc") const {
    ParamList<T> out;
    e1.collect(prefix + ".e1", out);
    in1.collect(prefix + ".in1", out);
    e2.collect(prefix + ".e2", out);
    in2.collect(prefix + ".in2", out);
    e3.collect(prefix + ".e3", out);
    in3.collect(prefix + ".in3", out);
    e4.collect(prefix + ".e4", out);
    in4.collect(prefix + ".in4", out);
    return out;
  }
};

// Domain-specific decoder: (n, 64, h/4, w/4) -> (n, 3, h, w), tanh output.
// Mirrors the encoder's downsampling with nearest-upsample + conv stages.
template <typename T>
struct DomainDecoder {
  Conv2dLayer<T> d1, up1, up2, head;
  InstanceNorm2dLayer<T> in1, in_up1, in_up2;

  DomainDecoder() = default;
  explicit DomainDecoder(Rng& rng, int64_t base = 8) {
    d1 = Conv2dLayer<T>(kLatentChannels, 4 * base, 3, 1, 1, rng);
    in1 = InstanceNorm2dLayer<T>(4 * base);
    up1 = Conv2dLayer<T>(4 * base, 2 * base, 3, 1, 1, rng);
    in_up1 = InstanceNorm2dLayer<T>(2 * base);
    up2 = Conv2dLayer<T>(2 * base, base, 3, 1, 1, rng);
    in_up2 = InstanceNorm2dLayer<T>(base);
    head = Conv2dLayer<T>(base, 3, 3, 1, 1, rng);
  }

  Var<T> forward(const Var<T>& z) const {
    const auto& s = z->value.shape();
    check(s.size() == 4 && s[1] == kLatentChannels,
          "decoder: latent must be (n, 64, h, w), got " + shape_str(s));
    Var<T> h = leaky_relu(in1.forward(d1.forward(z)), 0.2);
    h = upsample_nearest2(leaky_relu(in_up1.forward(up1.forward(h)), 0.2));
    h = upsample_nearest2(leaky_relu(in_up2.forward(up2.forward(h)), 0.2));
    return tanh_act(head.forward(h));
  }

  ParamList<T> parameters(const std::string& prefix = "dec") const {
    ParamList<T> out;
    d1.collect(prefix + ".d1", out);
    in1.collect(prefix + ".in1", out);
    up1.collect(prefix + ".up1", out);
    in_up1.collect(prefix + ".in_up1", out);
    up2.collect(prefix + ".up2", out);
    in_up2.collect(prefix + ".in_up2", out);
    head.collect(prefix + ".head", out);
    return out;
  }
};

// Content feature distillation loss: mean-absolute cross-domain term plus
// mean-absolute reconstruction term.
template <typename T>
Var<T> distill_loss(const Var<T>& translated, const Var<T>& cross_decoded,
                    const Var<T>& source, const Var<T>& reconstructed) {
  return add(l1_mean(translated, cross_decoded), l1_mean(source, reconstructed));
}

template <typename T>
double distill_loss_value(const Tensor<T>& translated, const Tensor<T>& cross_decoded,
                          const Tensor<T>& source, const Tensor<T>& reconstructed) {
  NoGradGuard ng;
  return scalar_value(distill_loss(make_constant(translated), make_constant(cross_decoded),
                                   make_constant(source), make_constant(reconstructed)));
}

}  // namespace mi2gan

#endif
