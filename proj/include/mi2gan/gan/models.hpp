#ifndef MI2GAN_GAN_MODELS_HPP
#define MI2GAN_GAN_MODELS_HPP

#include "mi2gan/nn/layers.hpp"

namespace mi2gan {

// Image-to-image generator: two stride-2 downsampling convs, residual
// blocks at the bottleneck, two nearest-upsample+conv stages, tanh output.
// Instance normalization throughout. Input and output are 3-channel images
// of identical spatial size.
template <typename T>
struct ResnetGenerator {
  struct ResBlock {
    Conv2dLayer<T> conv1, conv2;
    InstanceNorm2dLayer<T> in1, in2;
  };

  Conv2dLayer<T> stem, down1, down2, up1, up2, head;
  InstanceNorm2dLayer<T> in_stem, in_down1, in_down2, in_up1, in_up2;
  std::vector<ResBlock> blocks;

  ResnetGenerator() = default;
  explicit ResnetGenerator(Rng& rng, int64_t base = 8, int64_t num_blocks = 4) {
    stem = Conv2dLayer<T>(3, base, 7, 1, 3, rng);
    in_stem = InstanceNorm2dLayer<T>(base);
    down1 = Conv2dLayer<T>(base, 2 * base, 3, 2, 1, rng);
    in_down1 = InstanceNorm2dLayer<T>(2 * base);
    down2 = Conv2dLayer<T>(2 * base, 4 * base, 3, 2, 1, rng);
    in_down2 = InstanceNorm2dLayer<T>(4 * base);
    for (int64_t i = 0; i < num_blocks; ++i) {
      ResBlock blk;
      blk.conv1 = Conv2dLayer<T>(4 * base, 4 * base, 3, 1, 1, rng);
      blk.in1 = InstanceNorm2dLayer<T>(4 * base);
      blk.conv2 = Conv2dLayer<T>(4 * base, 4 * base, 3, 1, 1, rng);
      blk.in2 = InstanceNorm2dLayer<T>(4 * base);
      blocks.push_back(std::move(blk));
    }
    up1 = Conv2dLayer<T>(4 * base, 2 * base, 3, 1, 1, rng);
    in_up1 = InstanceNorm2dLayer<T>(2 * base);
    up2 = Conv2dLayer<T>(2 * base, base, 3, 1, 1, rng);
    in_up2 = InstanceNorm2dLayer<T>(base);
    head = Conv2dLayer<T>(base, 3, 3, 1, 1, rng);
  }

  Var<T> forward(const Var<T>& x) const {
    const auto& s = x->value.shape();
    check(s.size() == 4 && s[1] == 3, "generator: input must be (n, 3, h, w), got " +
                                          shape_str(s));
    check(s[2] % 4 == 0 && s[3] % 4 == 0,
          "generator: spatial dims must be divisible by 4, got " + shape_str(s));
    Var<T> h = relu(in_stem.forward(stem.forward(x)));
    h = relu(in_down1.forward(down1.forward(h)));
    h = relu(in_down2.forward(down2.forward(h)));
    for (const auto& blk : blocks) {
      Var<T> r = relu(blk.in1.forward(blk.conv1.forward(h)));
      r = blk.in2.forward(blk.conv2.forward(r));
      h = add(h, r);
    }
    // conv before upsample keeps the expensive kernels at low resolution
    h = upsample_nearest2(relu(in_up1.forward(up1.forward(h))));
    h = upsample_nearest2(relu(in_up2.forward(up2.forward(h))));
    return tanh_act(head.forward(h));
  }

  ParamList<T> parameters(const std::string& prefix = "g") const {
    ParamList<T> out;
    stem.collect(prefix + ".stem", out);
    in_stem.collect(prefix + ".in_stem", out);
    down1.collect(prefix + ".down1", out);
    in_down1.collect(prefix + ".in_down1", out);
    down2.collect(prefix + ".down2", out);
    in_down2.collect(prefix + ".in_down2", out);
    for (size_t i = 0; i < blocks.size(); ++i) {
      const std::string bp = prefix + ".block" + std::to_string(i);
      blocks[i].conv1.collect(bp + ".conv1", out);
      blocks[i].in1.collect(bp + ".in1", out);
      blocks[i].conv2.collect(bp + ".conv2", out);
      blocks[i].in2.collect(bp + ".in2", out);
    }
    up1.collect(prefix + ".up1", out);
    in_up1.collect(prefix + ".in_up1", out);
    up2.collect(prefix + ".up2", out);
    in_up2.collect(prefix + ".in_up2", out);
    head.collect(prefix + ".head", out);
    return out;
  }
};

// PatchGAN discriminator: three stride-2 convs then two stride-1 convs,
// kernel 4 pad 1 everywhere, leaky ReLU 0.2. For 64x64 input the score map
// is 6x6 (64 -> 32 -> 16 -> 8 -> 7 -> 6).
template <typename T>
struct PatchDiscriminator {
  Conv2dLayer<T> c1, c2, c3, c4, head;
  InstanceNorm2dLayer<T> in2, in3, in4;

  PatchDiscriminator() = default;
  explicit PatchDiscriminator(Rng& rng, int64_t base = 16) {
    c1 = Conv2dLayer<T>(3, base, 4, 2, 1, rng);
    c2 = Conv2dLayer<T>(base, 2 * base, 4, 2, 1, rng);
    in2 = InstanceNorm2dLayer<T>(2 * base);
    c3 = Conv2dLayer<T>(2 * base, 4 * base, 4, 2, 1, rng);
    in3 = InstanceNorm2dLayer<T>(4 * base);
    c4 = Conv2dLayer<T>(4 * base, 8 * base, 4, 1, 1, rng);
    in4 = InstanceNorm2dLayer<T>(8 * base);
    head = Conv2dLayer<T>(8 * base, 1, 4, 1, 1, rng);
  }

  // Returns an (n, 1, h', w') score map of unbounded reals.
  Var<T> forward(const Var<T>& x) const {
    Var<T> h = leaky_relu(c1.forward(x), 0.2);
    h = leaky_relu(in2.forward(c2.forward(h)), 0.2);
    h = leaky_relu(in3.forward(c3.forward(h)), 0.2);
    h = leaky_relu(in4.forward(c4.forward(h)), 0.2);
    return head.forward(h);
  }

  ParamList<T> parameters(const std::string& prefix = "d") const {
    ParamList<T> out;
    c1.collect(prefix + ".c1", out);
    c2.collect(prefix + ".c2", out);
    in2.collect(prefix + ".in2", out);
    c3.collect(prefix + ".c3", out);
    in3.collect(prefix + ".in3", out);
    c4.collect(prefix + ".c4", out);
    in4.collect(prefix + ".in4", out);
    head.collect(prefix + ".head", out);
    return out;
  }
};

}  // namespace mi2gan

#endif
