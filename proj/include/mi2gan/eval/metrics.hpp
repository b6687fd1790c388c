#ifndef MI2GAN_EVAL_METRICS_HPP
#define MI2GAN_EVAL_METRICS_HPP

#include <optional>

#include "mi2gan/synth/style.hpp"

namespace mi2gan {

// Kahan-compensated mean so fan-out evaluation order cannot perturb
// reported values.
inline double compensated_mean(const std::vector<double>& values) {
  check(!values.empty(), "compensated_mean: empty input");
  double sum = 0.0, carry = 0.0;
  for (double v : values) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(values.size());
}

inline void check_binary_mask(const Tensor<float>& m, const char* what) {
  for (int64_t i = 0; i < m.numel(); ++i) {
    check(m[i] == 0.0f || m[i] == 1.0f, std::string(what) + ": mask values must be exactly 0 or 1");
  }
}

// Dice overlap 2|X∩Y| / (|X| + |Y|); two empty masks count as perfect
// agreement (1.0).
inline double dice(const Tensor<float>& x, const Tensor<float>& y) {
  check(x.same_shape(y), "dice: shape mismatch " + shape_str(x.shape()) + " vs " +
                             shape_str(y.shape()));
  check_binary_mask(x, "dice");
  check_binary_mask(y, "dice");
  int64_t nx = 0, ny = 0, inter = 0;
  for (int64_t i = 0; i < x.numel(); ++i) {
    const bool bx = x[i] == 1.0f;
    const bool by = y[i] == 1.0f;
    nx += bx;
    ny += by;
    inter += bx && by;
  }
  if (nx + ny == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(nx + ny);
}

// Foreground IoU between a source mask and the object recovered from a
// translated image by inverting the known target-domain style. Only defined
// for synthetic data; without style metadata the caller is pointed at the
// Dice-based evaluation path.
inline double content_iou(const Tensor<float>& source_mask, const Tensor<float>& translated,
                          const std::optional<DomainStyle>& target_style, const SceneSpec& spec) {
  check(target_style.has_value(),
        "content_iou: no style metadata for this input; this oracle only applies to "
        "synthetic data. Use the dice-based evaluation for real images.");
  check(source_mask.rank() == 2, "content_iou: (h, w) mask required");
  check(translated.rank() == 3 && translated.dim(0) == 3,
        "content_iou: (3, h, w) translated image required");
  check(translated.dim(1) == source_mask.dim(0) && translated.dim(2) == source_mask.dim(1),
        "content_iou: mask / image size mismatch");
  check_binary_mask(source_mask, "content_iou");

  Tensor<float> content = invert_style(translated, *target_style);
  const double thr = content_threshold(spec);
  int64_t inter = 0, uni = 0;
  for (int64_t i = 0; i < source_mask.numel(); ++i) {
    const bool pred = static_cast<double>(content[i]) > thr;
    const bool truth = source_mask[i] == 1.0f;
    inter += pred && truth;
    uni += pred || truth;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Normalized cross-correlation of two equally sized maps; zero-variance
// inputs yield 0.
inline double ncc(const Tensor<float>& a, const Tensor<float>& b) {
  check(a.same_shape(b), "ncc: shape mismatch");
  check(a.numel() > 0, "ncc: empty maps");
  const int64_t n = a.numel();
  double ma = 0.0, mb = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    ma += static_cast<double>(a[i]);
    mb += static_cast<double>(b[i]);
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double da = static_cast<double>(a[i]) - ma;
    const double db = static_cast<double>(b[i]) - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

inline double median(std::vector<double> values) {
  check(!values.empty(), "median: empty input");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace mi2gan

#endif
