#ifndef MI2GAN_EVAL_DEGENERACY_HPP
#define MI2GAN_EVAL_DEGENERACY_HPP

#include <json.hpp>

#include "mi2gan/core/transforms.hpp"
#include "mi2gan/eval/metrics.hpp"
#include "mi2gan/gan/losses.hpp"
#include "mi2gan/gan/models.hpp"

namespace mi2gan {

// Pixel-permutation transforms available for the cycle-degeneracy
// demonstration.
enum class PermTransform { kHflip, kVflip, kRot90, kShift8 };

inline PermTransform parse_transform(const std::string& name) {
  if (name == "hflip") return PermTransform::kHflip;
  if (name == "vflip") return PermTransform::kVflip;
  if (name == "rot90") return PermTransform::kRot90;
  if (name == "shift8") return PermTransform::kShift8;
  throw ValueError("unknown transform '" + name + "' (expected hflip|vflip|rot90|shift8)");
}

inline const char* transform_name(PermTransform t) {
  switch (t) {
    case PermTransform::kHflip: return "hflip";
    case PermTransform::kVflip: return "vflip";
    case PermTransform::kRot90: return "rot90";
    default: return "shift8";
  }
}

template <typename T>
Tensor<T> apply_transform(PermTransform t, const Tensor<T>& x) {
  switch (t) {
    case PermTransform::kHflip: return hflip(x);
    case PermTransform::kVflip: return vflip(x);
    case PermTransform::kRot90: return rot90(x);
    default: return roll(x, 8, 8);
  }
}

template <typename T>
Tensor<T> apply_inverse_transform(PermTransform t, const Tensor<T>& x) {
  switch (t) {
    case PermTransform::kHflip: return hflip(x);
    case PermTransform::kVflip: return vflip(x);
    case PermTransform::kRot90: return rot270(x);
    default: return roll(x, -8, -8);
  }
}

struct DegeneracyReport {
  std::string transform;
  bool a_cycle_bitwise_equal = false;     // modified vs original A->B->A reconstructions
  double b_cycle_err_modified = 0.0;      // modified pair's cycle error at y
  double b_cycle_err_relocated = 0.0;     // original pair's cycle error at T^-1(y)
  double b_cycle_err_gap = 0.0;           // |difference|
  double cycle_err_a_original = 0.0;      // A-side cycle errors (equal by construction)
  double cycle_err_a_modified = 0.0;
  double content_iou_original = 0.0;      // content preservation of G_AB vs T∘G_AB
  double content_iou_modified = 0.0;
};

inline nlohmann::json degeneracy_report_to_json(const DegeneracyReport& r) {
  return nlohmann::json{{"transform", r.transform},
                        {"a_cycle_bitwise_equal", r.a_cycle_bitwise_equal},
                        {"b_cycle_err_modified", r.b_cycle_err_modified},
                        {"b_cycle_err_relocated", r.b_cycle_err_relocated},
                        {"b_cycle_err_gap", r.b_cycle_err_gap},
                        {"cycle_err_a_original", r.cycle_err_a_original},
                        {"cycle_err_a_modified", r.cycle_err_a_modified},
                        {"content_iou_original", r.content_iou_original},
                        {"content_iou_modified", r.content_iou_modified}};
}

// Composes G'_AB = T∘G_AB and G'_BA = G_BA∘T⁻¹ and measures what the cycle
// objective cannot see: both pairs produce identical A-side reconstructions
// and matching B-side cycle errors at relocated inputs, while the modified
// pair's translations have displaced content.
template <typename T>
DegeneracyReport degeneracy_demo(const ResnetGenerator<T>& g_ab, const ResnetGenerator<T>& g_ba,
                                 PermTransform t, const Tensor<T>& images_a,
                                 const Tensor<T>& masks_a, const Tensor<T>& images_b,
                                 const std::optional<DomainStyle>& style_b,
                                 const SceneSpec& spec) {
  NoGradGuard ng;
  DegeneracyReport rep;
  rep.transform = transform_name(t);

  // A side: G'_BA(G'_AB(x)) vs G_BA(G_AB(x)).
  Tensor<T> fake_b = g_ab.forward(make_constant(images_a))->value;
  Tensor<T> fake_b_mod = apply_transform(t, fake_b);              // G'_AB output
  Tensor<T> rec_orig = g_ba.forward(make_constant(fake_b))->value;
  Tensor<T> rec_mod =
      g_ba.forward(make_constant(apply_inverse_transform(t, fake_b_mod)))->value;
  rep.a_cycle_bitwise_equal = bitwise_equal(rec_orig, rec_mod);
  rep.cycle_err_a_original = cycle_loss_value(images_a, rec_orig);
  rep.cycle_err_a_modified = cycle_loss_value(images_a, rec_mod);

  // B side: error of the modified pair at y equals the original pair's
  // error at T^-1(y).
  Tensor<T> y_reloc = apply_inverse_transform(t, images_b);
  Tensor<T> fake_a_mod = g_ba.forward(make_constant(y_reloc))->value;  // G'_BA(y)
  Tensor<T> b_cycle_mod = apply_transform(t, g_ab.forward(make_constant(fake_a_mod))->value);
  rep.b_cycle_err_modified = cycle_loss_value(images_b, b_cycle_mod);
  Tensor<T> fake_a_orig = g_ba.forward(make_constant(y_reloc))->value;
  Tensor<T> b_cycle_orig = g_ab.forward(make_constant(fake_a_orig))->value;
  rep.b_cycle_err_relocated = cycle_loss_value(y_reloc, b_cycle_orig);
  rep.b_cycle_err_gap = std::abs(rep.b_cycle_err_modified - rep.b_cycle_err_relocated);

  // Content preservation of the two A->B translations.
  if (style_b.has_value()) {
    const int64_t n = images_a.dim(0), h = images_a.dim(2), w = images_a.dim(3);
    std::vector<double> orig_iou, mod_iou;
    for (int64_t i = 0; i < n; ++i) {
      Tensor<float> mask = Tensor<float>::uninitialized({h, w});
      for (int64_t j = 0; j < h * w; ++j)
        mask[j] = static_cast<float>(masks_a[i * h * w + j]);
      auto slice_img = [&](const Tensor<T>& pool) {
        Tensor<float> img = Tensor<float>::uninitialized({3, h, w});
        for (int64_t j = 0; j < 3 * h * w; ++j)
          img[j] = static_cast<float>(pool[i * 3 * h * w + j]);
        return img;
      };
      orig_iou.push_back(content_iou(mask, slice_img(fake_b), style_b, spec));
      mod_iou.push_back(content_iou(mask, slice_img(fake_b_mod), style_b, spec));
    }
    rep.content_iou_original = compensated_mean(orig_iou);
    rep.content_iou_modified = compensated_mean(mod_iou);
  }
  return rep;
}

}  // namespace mi2gan

#endif
