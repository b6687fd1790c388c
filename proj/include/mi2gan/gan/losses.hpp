#ifndef MI2GAN_GAN_LOSSES_HPP
#define MI2GAN_GAN_LOSSES_HPP

#include "mi2gan/core/ops.hpp"

namespace mi2gan {

// Least-squares GAN losses on patch score maps.

// Discriminator side: mean((real - 1)^2) + mean(fake^2).
template <typename T>
Var<T> adv_loss_d(const Var<T>& real_scores, const Var<T>& fake_scores) {
  check(real_scores->value.numel() > 0 && fake_scores->value.numel() > 0,
        "adv_loss_d: empty batch");
  check(real_scores->value.same_shape(fake_scores->value),
        "adv_loss_d: score shape mismatch " + shape_str(real_scores->value.shape()) + " vs " +
            shape_str(fake_scores->value.shape()));
  return add(mse_to_const(real_scores, 1.0), mse_to_const(fake_scores, 0.0));
}

// Generator side: mean((fake - 1)^2).
template <typename T>
Var<T> adv_loss_g(const Var<T>& fake_scores) {
  check(fake_scores->value.numel() > 0, "adv_loss_g: empty batch");
  return mse_to_const(fake_scores, 1.0);
}

// Mean absolute round-trip error between an image batch and its cycle
// reconstruction.
template <typename T>
Var<T> cycle_loss(const Var<T>& x, const Var<T>& x_cyc) {
  return l1_mean(x, x_cyc);
}

template <typename T>
double cycle_loss_value(const Tensor<T>& x, const Tensor<T>& x_cyc) {
  NoGradGuard ng;
  return scalar_value(cycle_loss(make_constant(x), make_constant(x_cyc)));
}

}  // namespace mi2gan

#endif
