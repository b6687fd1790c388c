#ifndef MI2GAN_SYNTH_STYLE_HPP
#define MI2GAN_SYNTH_STYLE_HPP

#include <array>

#include "mi2gan/synth/scene.hpp"

namespace mi2gan {

// A domain's rendering recipe. Content is style-invariant by construction:
// rendering touches values only, never geometry.
struct DomainStyle {
  std::array<int, 3> channel_map{0, 1, 2};  // out[k] = colored[channel_map[k]]
  double gamma = 1.0;
  double texture_amp = 0.0;     // additive stripe amplitude
  double texture_period = 8.0;  // stripe period, pixels
  std::array<double, 3> bg_tint{0.0, 0.0, 0.0};
};

inline void validate_style(const DomainStyle& s) {
  std::array<bool, 3> seen{false, false, false};
  for (int k : s.channel_map) {
    check(k >= 0 && k < 3, "style: channel_map entries must be in {0,1,2}");
    seen[static_cast<size_t>(k)] = true;
  }
  check(seen[0] && seen[1] && seen[2], "style: channel_map must be a permutation");
  check(s.gamma >= 0.4 && s.gamma <= 2.5,
        "style: gamma must be in [0.4, 2.5], got " + std::to_string(s.gamma));
  check(s.texture_amp >= 0.0 && s.texture_amp <= 0.3,
        "style: texture_amp must be in [0, 0.3], got " + std::to_string(s.texture_amp));
  check(s.texture_period >= 4.0, "style: texture_period must be >= 4 px");
  for (double t : s.bg_tint) check(t >= 0.0 && t <= 1.0, "style: bg_tint must be in [0, 1]");
}

inline DomainStyle default_style_a() { return DomainStyle{}; }

// Channel rotation (R,G,B) -> (G,B,R), gamma 1.6, diagonal stripes of
// amplitude 0.15 and period 8, purple-ish background tint.
inline DomainStyle default_style_b() {
  DomainStyle s;
  s.channel_map = {1, 2, 0};
  s.gamma = 1.6;
  s.texture_amp = 0.15;
  s.texture_period = 8.0;
  s.bg_tint = {0.10, 0.05, 0.20};
  return s;
}

inline double stripe_value(const DomainStyle& s, int64_t x, int64_t y) {
  if (s.texture_amp == 0.0) return 0.0;
  const double phase = 6.283185307179586 * static_cast<double>(x + y) / s.texture_period;
  return s.texture_amp * 0.5 * (1.0 + std::sin(phase));
}

// Renders a content map through a style: background-tint blend, gamma,
// channel permutation, additive stripes, explicit clip, then affine map to
// [-1, 1]. Returns a (3, h, w) image.
inline Tensor<float> render_domain(const Tensor<float>& content, const DomainStyle& style) {
  check(content.rank() == 2, "render_domain: (h, w) content map required");
  validate_style(style);
  const int64_t h = content.dim(0), w = content.dim(1);
  for (int64_t i = 0; i < content.numel(); ++i)
    check(content[i] >= 0.0f && content[i] <= 1.0f, "render_domain: content must be in [0, 1]");

  Tensor<float> img({3, h, w});
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      const double c = static_cast<double>(content[y * w + x]);
      std::array<double, 3> colored;
      for (int k = 0; k < 3; ++k) {
        const double blended = c + (1.0 - c) * style.bg_tint[static_cast<size_t>(k)];
        colored[static_cast<size_t>(k)] = std::pow(blended, style.gamma);
      }
      const double stripe = stripe_value(style, x, y);
      for (int k = 0; k < 3; ++k) {
        double v = colored[static_cast<size_t>(style.channel_map[static_cast<size_t>(k)])];
        v += stripe;
        v = std::clamp(v, 0.0, 1.0);  // explicit clip before the affine map
        img[(k * h + y) * w + x] = static_cast<float>(2.0 * v - 1.0);
      }
    }
  }
  return img;
}

// Exact inverse of render_domain for non-saturating styles: undo the affine
// map, subtract the stripe pattern, invert the permutation, gamma and tint
// blend, then average channels. Returns a (h, w) content estimate.
inline Tensor<float> invert_style(const Tensor<float>& img, const DomainStyle& style) {
  check(img.rank() == 3 && img.dim(0) == 3, "invert_style: (3, h, w) image required");
  validate_style(style);
  for (double t : style.bg_tint)
    check(t < 1.0, "invert_style: bg_tint of 1 saturates a channel and cannot be inverted");
  const int64_t h = img.dim(1), w = img.dim(2);
  std::array<int, 3> inv_map{};
  for (int k = 0; k < 3; ++k) inv_map[static_cast<size_t>(style.channel_map[static_cast<size_t>(k)])] = k;

  Tensor<float> content({h, w});
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      const double stripe = stripe_value(style, x, y);
      double acc = 0.0;
      for (int j = 0; j < 3; ++j) {
        // channel j of the colored (pre-permutation) image sits at output
        // channel inv_map[j]
        const int k = inv_map[static_cast<size_t>(j)];
        double v = (static_cast<double>(img[(k * h + y) * w + x]) + 1.0) / 2.0;
        v = std::clamp(v - stripe, 0.0, 1.0);
        v = std::pow(v, 1.0 / style.gamma);
        const double tint = style.bg_tint[static_cast<size_t>(j)];
        acc += std::clamp((v - tint) / (1.0 - tint), 0.0, 1.0);
      }
      content[y * w + x] = static_cast<float>(acc / 3.0);
    }
  }
  return content;
}

// Foreground threshold: midpoint between the background ceiling and the
// spec's minimum foreground intensity.
inline double content_threshold(const SceneSpec& spec) {
  check(spec.intensity_min > kBackgroundMax,
        "content threshold undefined: foreground intensity overlaps background range");
  return 0.5 * (kBackgroundMax + spec.intensity_min);
}

}  // namespace mi2gan

#endif
