#ifndef MI2GAN_SYNTH_SCENE_HPP
#define MI2GAN_SYNTH_SCENE_HPP

#include <cmath>

#include "mi2gan/core/rng.hpp"
#include "mi2gan/core/tensor.hpp"

namespace mi2gan {

// The smooth background of generated content maps never exceeds this value,
// which keeps foreground/background separable by a fixed threshold.
inline constexpr double kBackgroundMax = 0.25;

struct SceneSpec {
  int64_t num_blobs = 3;
  double axis_min = 5.0;
  double axis_max = 12.0;
  double intensity_min = 0.65;
  double intensity_max = 0.85;
  int64_t canvas_h = 64;
  int64_t canvas_w = 64;
};

inline void validate_scene_spec(const SceneSpec& s) {
  check(s.num_blobs >= 1 && s.num_blobs <= 4,
        "scene spec: num_blobs must be in [1, 4], got " + std::to_string(s.num_blobs));
  check(s.axis_min >= 2.0, "scene spec: axis_min must be >= 2 px, got " +
                               std::to_string(s.axis_min));
  check(s.axis_max >= s.axis_min, "scene spec: axis_max < axis_min");
  check(s.canvas_h > 0 && s.canvas_w > 0, "scene spec: empty canvas");
  const double min_dim = static_cast<double>(std::min(s.canvas_h, s.canvas_w));
  check(2.0 * s.axis_max + 2.0 <= min_dim,
        "scene spec: ellipse semi-axis " + std::to_string(s.axis_max) +
            " exceeds canvas " + std::to_string(s.canvas_h) + "x" + std::to_string(s.canvas_w));
  check(s.intensity_min >= 0.0 && s.intensity_max <= 1.0 && s.intensity_min <= s.intensity_max,
        "scene spec: intensity_range must satisfy 0 <= min <= max <= 1");
}

struct Ellipse {
  double cx, cy;     // center, pixel coordinates
  double a, b;       // semi-axes
  double theta;      // rotation, radians
  double intensity;  // foreground value in [0, 1]
};

// Interior test at pixel centers.
inline bool inside_ellipse(const Ellipse& e, double x, double y) {
  const double dx = x - e.cx;
  const double dy = y - e.cy;
  const double ct = std::cos(e.theta);
  const double st = std::sin(e.theta);
  const double u = (dx * ct + dy * st) / e.a;
  const double v = (-dx * st + dy * ct) / e.b;
  return u * u + v * v <= 1.0;
}

// Binary raster of one ellipse; exposed for the pixel-count oracle.
inline Tensor<float> rasterize_ellipse(int64_t h, int64_t w, const Ellipse& e) {
  Tensor<float> mask({h, w});
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      mask[y * w + x] = inside_ellipse(e, static_cast<double>(x), static_cast<double>(y)) ? 1.0f
                                                                                         : 0.0f;
  return mask;
}

struct Scene {
  Tensor<float> content;  // (h, w) in [0, 1]
  Tensor<float> mask;     // (h, w) in {0, 1}
  std::vector<Ellipse> blobs;
};

// Deterministic scene synthesis: a smooth dark background plus num_blobs
// bright ellipses fully inside the canvas. The mask is exactly the union of
// ellipse interiors.
inline Scene gen_scene(uint64_t seed, const SceneSpec& spec) {
  validate_scene_spec(spec);
  Rng rng(mix_seed(seed, 0x7363656eull));
  const int64_t h = spec.canvas_h, w = spec.canvas_w;

  Scene scene;
  scene.content = Tensor<float>({h, w});
  scene.mask = Tensor<float>({h, w});

  // Smooth low-frequency background clipped to [0, 0.22]; the dips reach
  // the zero floor, the crests stay below kBackgroundMax.
  const double fx = rng.uniform(0.8, 2.0) / static_cast<double>(w);
  const double fy = rng.uniform(0.8, 2.0) / static_cast<double>(h);
  const double phase = rng.uniform(0.0, 6.283185307179586);
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      const double s = std::sin(6.283185307179586 * (fx * x + fy * y) + phase);
      scene.content[y * w + x] = static_cast<float>(std::max(0.0, 0.10 + 0.12 * s));
    }
  }

  for (int64_t i = 0; i < spec.num_blobs; ++i) {
    Ellipse e;
    e.a = rng.uniform(spec.axis_min, spec.axis_max);
    e.b = rng.uniform(spec.axis_min, spec.axis_max);
    e.theta = rng.uniform(0.0, 3.141592653589793);
    const double ct = std::cos(e.theta), st = std::sin(e.theta);
    const double ext_x = std::sqrt(e.a * e.a * ct * ct + e.b * e.b * st * st);
    const double ext_y = std::sqrt(e.a * e.a * st * st + e.b * e.b * ct * ct);
    e.cx = rng.uniform(ext_x, static_cast<double>(w - 1) - ext_x);
    e.cy = rng.uniform(ext_y, static_cast<double>(h - 1) - ext_y);
    e.intensity = rng.uniform(spec.intensity_min, spec.intensity_max);
    scene.blobs.push_back(e);
  }

  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      float best = 0.0f;
      bool covered = false;
      for (const auto& e : scene.blobs) {
        if (inside_ellipse(e, static_cast<double>(x), static_cast<double>(y))) {
          covered = true;
          best = std::max(best, static_cast<float>(e.intensity));
        }
      }
      if (covered) {
        scene.mask[y * w + x] = 1.0f;
        scene.content[y * w + x] = best;
      }
    }
  }
  return scene;
}

}  // namespace mi2gan

#endif
