#ifndef MI2GAN_EVAL_ADAPTATION_HPP
#define MI2GAN_EVAL_ADAPTATION_HPP

#include <functional>

#include "mi2gan/eval/metrics.hpp"
#include "mi2gan/eval/segmenter.hpp"
#include "mi2gan/gan/models.hpp"

namespace mi2gan {

struct MetricsReport {
  double dice_val = 0.0;         // segmenter on its own domain's validation split
  double dice_direct = 0.0;      // segmenter on raw target-domain images
  double dice_translated = 0.0;  // segmenter on translated target-domain images
  double content_iou_mean = 0.0; // translation content preservation (synthetic only)
  std::vector<std::pair<int64_t, double>> mi_bound_trace;
  std::string config_hash;
};

inline nlohmann::json metrics_report_to_json(const MetricsReport& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& [step, v] : r.mi_bound_trace)
    trace.push_back(nlohmann::json{{"step", step}, {"bound_nats", v}});
  return nlohmann::json{{"dice_val", r.dice_val},
                        {"dice_direct", r.dice_direct},
                        {"dice_translated", r.dice_translated},
                        {"content_iou", r.content_iou_mean},
                        {"mi_bound_trace", trace},
                        {"config_hash", r.config_hash}};
}

using Translator = std::function<Tensor<float>(const Tensor<float>&)>;

inline Translator identity_translator() {
  return [](const Tensor<float>& x) { return x; };
}

inline double mean_sample_dice(const Tensor<float>& pred, const Tensor<float>& truth) {
  const int64_t n = pred.dim(0), h = pred.dim(2), w = pred.dim(3);
  std::vector<double> scores;
  for (int64_t i = 0; i < n; ++i) {
    Tensor<float> p = Tensor<float>::uninitialized({h, w});
    Tensor<float> t = Tensor<float>::uninitialized({h, w});
    std::copy(pred.data() + i * h * w, pred.data() + (i + 1) * h * w, p.data());
    std::copy(truth.data() + i * h * w, truth.data() + (i + 1) * h * w, t.data());
    scores.push_back(dice(p, t));
  }
  return compensated_mean(scores);
}

// Cross-domain adaptation protocol: a segmenter trained on domain A is
// scored on its own validation split, on raw domain-B images (direct
// transfer) and on B images translated toward A. Content preservation of
// the translation is measured against B's ground-truth masks via the
// synthetic style oracle.
inline MetricsReport evaluate_adaptation(const UNetSegmenter<float>& seg,
                                         const DomainData& a_val, const DomainData& b_val,
                                         const Translator& translator,
                                         const std::optional<DomainStyle>& target_style,
                                         const SceneSpec& spec,
                                         const std::string& config_hash_str = "") {
  MetricsReport report;
  report.config_hash = config_hash_str;

  Tensor<float> pred_val = predict_masks(seg, a_val.images);
  report.dice_val = mean_sample_dice(pred_val, a_val.masks);

  Tensor<float> pred_direct = predict_masks(seg, b_val.images);
  report.dice_direct = mean_sample_dice(pred_direct, b_val.masks);

  Tensor<float> translated = translator(b_val.images);
  check(translated.same_shape(b_val.images), "evaluate_adaptation: translator changed shape");
  Tensor<float> pred_translated = predict_masks(seg, translated);
  report.dice_translated = mean_sample_dice(pred_translated, b_val.masks);

  if (target_style.has_value()) {
    const int64_t n = translated.dim(0), h = translated.dim(2), w = translated.dim(3);
    std::vector<double> ious;
    for (int64_t i = 0; i < n; ++i) {
      Tensor<float> img = Tensor<float>::uninitialized({3, h, w});
      std::copy(translated.data() + i * 3 * h * w, translated.data() + (i + 1) * 3 * h * w,
                img.data());
      Tensor<float> mask = Tensor<float>::uninitialized({h, w});
      std::copy(b_val.masks.data() + i * h * w, b_val.masks.data() + (i + 1) * h * w,
                mask.data());
      ious.push_back(content_iou(mask, img, target_style, spec));
    }
    report.content_iou_mean = compensated_mean(ious);
  }
  return report;
}

// Batched generator-backed translator.
template <typename T>
Translator generator_translator(const ResnetGenerator<T>& g, int64_t batch_size = 8) {
  return [&g, batch_size](const Tensor<float>& images) {
    NoGradGuard ng;
    const int64_t n = images.dim(0);
    Tensor<float> out = Tensor<float>::uninitialized(images.shape());
    const int64_t item = images.numel() / n;
    for (int64_t lo = 0; lo < n; lo += batch_size) {
      const int64_t hi = std::min(lo + batch_size, n);
      std::vector<int64_t> idx;
      for (int64_t i = lo; i < hi; ++i) idx.push_back(i);
      Tensor<float> bx = gather_batch(images, idx);
      Tensor<T> tx;
      if constexpr (std::is_same_v<T, float>) {
        tx = bx;
      } else {
        tx = Tensor<T>::uninitialized(bx.shape());
        for (int64_t i = 0; i < bx.numel(); ++i) tx[i] = static_cast<T>(bx[i]);
      }
      Var<T> y = g.forward(make_constant(tx));
      for (int64_t i = lo; i < hi; ++i) {
        const T* src = y->value.data() + (i - lo) * item;
        float* dst = out.data() + i * item;
        for (int64_t j = 0; j < item; ++j) dst[j] = static_cast<float>(src[j]);
      }
    }
    return out;
  };
}

}  // namespace mi2gan

#endif
