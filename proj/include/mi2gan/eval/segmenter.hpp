#ifndef MI2GAN_EVAL_SEGMENTER_HPP
#define MI2GAN_EVAL_SEGMENTER_HPP

#include "mi2gan/core/log.hpp"
#include "mi2gan/nn/layers.hpp"
#include "mi2gan/synth/dataset.hpp"

namespace mi2gan {

// Small 4-level U-shape segmentation network with skip connections:
// (n, 3, h, w) -> per-pixel foreground logits (n, 1, h, w).
template <typename T>
struct UNetSegmenter {
  Conv2dLayer<T> enc1, down1, enc2, down2, enc3, down3, bottleneck;
  Conv2dLayer<T> up3, merge3, up2, merge2, up1, merge1, head;
  InstanceNorm2dLayer<T> n_enc1, n_down1, n_enc2, n_down2, n_enc3, n_down3, n_bott;
  InstanceNorm2dLayer<T> n_up3, n_merge3, n_up2, n_merge2, n_up1, n_merge1;

  UNetSegmenter() = default;
  explicit UNetSegmenter(Rng& rng, int64_t base = 8) {
    enc1 = Conv2dLayer<T>(3, base, 3, 1, 1, rng);
    n_enc1 = InstanceNorm2dLayer<T>(base);
    down1 = Conv2dLayer<T>(base, 2 * base, 3, 2, 1, rng);
    n_down1 = InstanceNorm2dLayer<T>(2 * base);
    enc2 = Conv2dLayer<T>(2 * base, 2 * base, 3, 1, 1, rng);
    n_enc2 = InstanceNorm2dLayer<T>(2 * base);
    down2 = Conv2dLayer<T>(2 * base, 4 * base, 3, 2, 1, rng);
    n_down2 = InstanceNorm2dLayer<T>(4 * base);
    enc3 = Conv2dLayer<T>(4 * base, 4 * base, 3, 1, 1, rng);
    n_enc3 = InstanceNorm2dLayer<T>(4 * base);
    down3 = Conv2dLayer<T>(4 * base, 8 * base, 3, 2, 1, rng);
    n_down3 = InstanceNorm2dLayer<T>(8 * base);
    bottleneck = Conv2dLayer<T>(8 * base, 8 * base, 3, 1, 1, rng);
    n_bott = InstanceNorm2dLayer<T>(8 * base);
    up3 = Conv2dLayer<T>(8 * base, 4 * base, 3, 1, 1, rng);
    n_up3 = InstanceNorm2dLayer<T>(4 * base);
    merge3 = Conv2dLayer<T>(8 * base, 4 * base, 3, 1, 1, rng);
    n_merge3 = InstanceNorm2dLayer<T>(4 * base);
    up2 = Conv2dLayer<T>(4 * base, 2 * base, 3, 1, 1, rng);
    n_up2 = InstanceNorm2dLayer<T>(2 * base);
    merge2 = Conv2dLayer<T>(4 * base, 2 * base, 3, 1, 1, rng);
    n_merge2 = InstanceNorm2dLayer<T>(2 * base);
    up1 = Conv2dLayer<T>(2 * base, base, 3, 1, 1, rng);
    n_up1 = InstanceNorm2dLayer<T>(base);
    merge1 = Conv2dLayer<T>(2 * base, base, 3, 1, 1, rng);
    n_merge1 = InstanceNorm2dLayer<T>(base);
    head = Conv2dLayer<T>(base, 1, 3, 1, 1, rng);
  }

  Var<T> forward(const Var<T>& x) const {
    const auto& s = x->value.shape();
    check(s.size() == 4 && s[1] == 3, "segmenter: input must be (n, 3, h, w)");
    check(s[2] % 8 == 0 && s[3] % 8 == 0,
          "segmenter: spatial dims must be divisible by 8, got " + shape_str(s));
    Var<T> s1 = leaky_relu(n_enc1.forward(enc1.forward(x)), 0.2);
    Var<T> h = leaky_relu(n_down1.forward(down1.forward(s1)), 0.2);
    Var<T> s2 = leaky_relu(n_enc2.forward(enc2.forward(h)), 0.2);
    h = leaky_relu(n_down2.forward(down2.forward(s2)), 0.2);
    Var<T> s3 = leaky_relu(n_enc3.forward(enc3.forward(h)), 0.2);
    h = leaky_relu(n_down3.forward(down3.forward(s3)), 0.2);
    h = leaky_relu(n_bott.forward(bottleneck.forward(h)), 0.2);
    h = upsample_nearest2(leaky_relu(n_up3.forward(up3.forward(h)), 0.2));
    h = leaky_relu(n_merge3.forward(merge3.forward(concat_ch(h, s3))), 0.2);
    h = upsample_nearest2(leaky_relu(n_up2.forward(up2.forward(h)), 0.2));
    h = leaky_relu(n_merge2.forward(merge2.forward(concat_ch(h, s2))), 0.2);
    h = upsample_nearest2(leaky_relu(n_up1.forward(up1.forward(h)), 0.2));
    h = leaky_relu(n_merge1.forward(merge1.forward(concat_ch(h, s1))), 0.2);
    return head.forward(h);
  }

  ParamList<T> parameters(const std::string& prefix = "seg") const {
    ParamList<T> out;
    enc1.collect(prefix + ".enc1", out);
    n_enc1.collect(prefix + ".n_enc1", out);
    down1.collect(prefix + ".down1", out);
    n_down1.collect(prefix + ".n_down1", out);
    enc2.collect(prefix + ".enc2", out);
    n_enc2.collect(prefix + ".n_enc2", out);
    down2.collect(prefix + ".down2", out);
    n_down2.collect(prefix + ".n_down2", out);
    enc3.collect(prefix + ".enc3", out);
    n_enc3.collect(prefix + ".n_enc3", out);
    down3.collect(prefix + ".down3", out);
    n_down3.collect(prefix + ".n_down3", out);
    bottleneck.collect(prefix + ".bottleneck", out);
    n_bott.collect(prefix + ".n_bott", out);
    up3.collect(prefix + ".up3", out);
    n_up3.collect(prefix + ".n_up3", out);
    merge3.collect(prefix + ".merge3", out);
    n_merge3.collect(prefix + ".n_merge3", out);
    up2.collect(prefix + ".up2", out);
    n_up2.collect(prefix + ".n_up2", out);
    merge2.collect(prefix + ".merge2", out);
    n_merge2.collect(prefix + ".n_merge2", out);
    up1.collect(prefix + ".up1", out);
    n_up1.collect(prefix + ".n_up1", out);
    merge1.collect(prefix + ".merge1", out);
    n_merge1.collect(prefix + ".n_merge1", out);
    head.collect(prefix + ".head", out);
    return out;
  }
};

// Supervised training with per-pixel binary cross-entropy. Deterministic
// under the seed; epochs = 0 returns the untrained initialization.
template <typename T>
UNetSegmenter<T> train_segmenter(const Tensor<T>& images, const Tensor<T>& masks,
                                 int64_t epochs, uint64_t seed, int64_t batch_size = 8,
                                 double lr = 1e-3) {
  check(images.rank() == 4 && masks.rank() == 4, "train_segmenter: rank-4 tensors required");
  check(images.dim(0) == masks.dim(0) && masks.dim(1) == 1,
        "train_segmenter: dataset must pair (n,3,h,w) images with (n,1,h,w) masks");
  check(masks.numel() > 0, "train_segmenter: dataset without masks");
  const int64_t n = images.dim(0);
  Rng rng(mix_seed(seed, 0x736567ull));
  UNetSegmenter<T> model(rng);
  if (epochs == 0) return model;

  Adam<T> opt(model.parameters(), lr, 0.9, 0.999);
  const int64_t per_epoch = std::max<int64_t>(1, n / batch_size);
  for (int64_t epoch = 0; epoch < epochs; ++epoch) {
    std::vector<int64_t> order(n);
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    shuffle(order, rng);
    double epoch_loss = 0.0;
    for (int64_t s = 0; s < per_epoch; ++s) {
      const int64_t lo = s * batch_size;
      const int64_t hi = std::min(lo + batch_size, n);
      std::vector<int64_t> idx(order.begin() + lo, order.begin() + hi);
      Tensor<T> bx = gather_batch_t(images, idx);
      Tensor<T> by = gather_batch_t(masks, idx);
      Var<T> logits = model.forward(make_constant(bx));
      Var<T> loss = bce_with_logits_mean(logits, by);
      epoch_loss += scalar_value(loss);
      opt.zero_grad();
      backward(loss);
      opt.step();
    }
    log_debug("segmenter epoch " + std::to_string(epoch + 1) + " loss " +
              std::to_string(epoch_loss / static_cast<double>(per_epoch)));
  }
  return model;
}

// Thresholded foreground prediction, batched inference.
template <typename T>
Tensor<float> predict_masks(const UNetSegmenter<T>& model, const Tensor<T>& images,
                            int64_t batch_size = 8) {
  NoGradGuard ng;
  const int64_t n = images.dim(0), h = images.dim(2), w = images.dim(3);
  Tensor<float> out({n, 1, h, w});
  for (int64_t lo = 0; lo < n; lo += batch_size) {
    const int64_t hi = std::min(lo + batch_size, n);
    std::vector<int64_t> idx;
    for (int64_t i = lo; i < hi; ++i) idx.push_back(i);
    Tensor<T> bx = gather_batch_t(images, idx);
    Var<T> logits = model.forward(make_constant(bx));
    for (int64_t i = lo; i < hi; ++i) {
      const T* src = logits->value.data() + (i - lo) * h * w;
      float* dst = out.data() + i * h * w;
      for (int64_t j = 0; j < h * w; ++j) dst[j] = src[j] > T(0) ? 1.0f : 0.0f;
    }
  }
  return out;
}

}  // namespace mi2gan

#endif
