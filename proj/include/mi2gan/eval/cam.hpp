#ifndef MI2GAN_EVAL_CAM_HPP
#define MI2GAN_EVAL_CAM_HPP

#include "mi2gan/core/transforms.hpp"

namespace mi2gan {

// Activation-magnitude heat map of a single latent code: channel-wise mean
// of absolute activations, bilinearly upsampled to image resolution,
// min-max normalized to [0, 1]. A constant code maps to all zeros.
template <typename T>
Tensor<float> cam_heatmap(const Tensor<T>& z, int64_t out_h = 0, int64_t out_w = 0) {
  check(z.rank() == 4, "cam_heatmap: rank-4 latent required");
  check(z.dim(0) == 1, "cam_heatmap: per-sample op, got batch of " + std::to_string(z.dim(0)));
  const int64_t c = z.dim(1), h = z.dim(2), w = z.dim(3);
  if (out_h == 0) out_h = 4 * h;  // encoders downsample by 4
  if (out_w == 0) out_w = 4 * w;

  Tensor<float> mean_abs = Tensor<float>::uninitialized({h, w});
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int64_t ch = 0; ch < c; ++ch)
        acc += std::abs(static_cast<double>(z[(ch * h + y) * w + x]));
      mean_abs[y * w + x] = static_cast<float>(acc / static_cast<double>(c));
    }
  }
  Tensor<float> up = bilinear_resize_map(mean_abs, out_h, out_w);
  return minmax01(up);
}

}  // namespace mi2gan

#endif
