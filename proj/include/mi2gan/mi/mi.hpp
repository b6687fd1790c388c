#ifndef MI2GAN_MI_MI_HPP
#define MI2GAN_MI_MI_HPP

#include <functional>
#include <optional>

#include "mi2gan/core/log.hpp"
#include "mi2gan/nn/layers.hpp"

namespace mi2gan {

// Critic over channel-concatenated latent pairs: (n, 128, h, w) -> (n,)
// scores. Three stride-2 convs, global average pooling, linear head; no
// normalization on the head.
template <typename T>
struct MIDiscriminator {
  Conv2dLayer<T> c1, c2, c3;
  InstanceNorm2dLayer<T> in2, in3;
  LinearLayer<T> head;

  MIDiscriminator() = default;
  explicit MIDiscriminator(Rng& rng, int64_t base = 32) {
    c1 = Conv2dLayer<T>(128, base, 4, 2, 1, rng);
    c2 = Conv2dLayer<T>(base, base, 4, 2, 1, rng);
    in2 = InstanceNorm2dLayer<T>(base);
    c3 = Conv2dLayer<T>(base, base, 4, 2, 1, rng);
    in3 = InstanceNorm2dLayer<T>(base);
    head = LinearLayer<T>(base, 1, rng);
  }

  Var<T> forward(const Var<T>& pair) const {
    const auto& s = pair->value.shape();
    check(s.size() == 4 && s[1] == 128,
          "mi discriminator: input must be (n, 128, h, w), got " + shape_str(s));
    Var<T> h = leaky_relu(c1.forward(pair), 0.2);
    h = leaky_relu(in2.forward(c2.forward(h)), 0.2);
    h = leaky_relu(in3.forward(c3.forward(h)), 0.2);
    h = head.forward(global_avg_pool(h));
    return reshape(h, {s[0]});
  }

  ParamList<T> parameters(const std::string& prefix = "d_mi") const {
    ParamList<T> out;
    c1.collect(prefix + ".c1", out);
    c2.collect(prefix + ".c2", out);
    in2.collect(prefix + ".in2", out);
    c3.collect(prefix + ".c3", out);
    in3.collect(prefix + ".in3", out);
    head.collect(prefix + ".head", out);
    return out;
  }
};

// Joint / product-of-marginals latent pairs, channel-concatenated.
template <typename T>
struct MISampleBatch {
  Var<T> joint;     // concat(z_src, z_translated)
  Var<T> marginal;  // concat(z_src, z_independent)
};

// Builds the two sample batches fed to the MI discriminator. No gradient
// blocking happens here; callers detach whichever side their phase freezes.
template <typename T>
MISampleBatch<T> build_mi_samples(const Var<T>& z_src, const Var<T>& z_translated,
                                  const Var<T>& z_independent) {
  check(z_src->value.same_shape(z_translated->value) &&
            z_src->value.same_shape(z_independent->value),
        "build_mi_samples: latent shape mismatch");
  return {concat_ch(z_src, z_translated), concat_ch(z_src, z_independent)};
}

// Closed-form MI of a correlated bivariate standard Gaussian, in nats.
inline double gaussian_mi_oracle(double rho) {
  check(std::abs(rho) < 1.0, "gaussian_mi_oracle: |rho| must be < 1");
  return -0.5 * std::log(1.0 - rho * rho);
}

// Small MLP critic for the standalone estimator: rows are concatenated
// (x, y) pairs.
template <typename T>
struct MlpCritic {
  LinearLayer<T> l1, l2, l3;

  MlpCritic() = default;
  MlpCritic(int64_t in_dim, int64_t hidden, Rng& rng) {
    l1 = LinearLayer<T>(in_dim, hidden, rng);
    l2 = LinearLayer<T>(hidden, hidden, rng);
    l3 = LinearLayer<T>(hidden, 1, rng);
  }

  Var<T> forward(const Var<T>& pairs) const {
    Var<T> h = leaky_relu(l1.forward(pairs), 0.2);
    h = leaky_relu(l2.forward(h), 0.2);
    h = l3.forward(h);
    return reshape(h, {pairs->value.dim(0)});
  }

  ParamList<T> parameters(const std::string& prefix = "critic") const {
    ParamList<T> out;
    l1.collect(prefix + ".l1", out);
    l2.collect(prefix + ".l2", out);
    l3.collect(prefix + ".l3", out);
    return out;
  }
};

// One draw from a paired sampler: joint rows (x_i, y_i) and marginal rows
// (x_i, y'_i) with y' independent of x.
template <typename T>
struct MIDraw {
  Tensor<T> joint_pairs;     // (batch, dx + dy)
  Tensor<T> marginal_pairs;  // (batch, dx + dy)
};

template <typename T>
using PairedSampler = std::function<MIDraw<T>(int64_t batch)>;

// Correlated standard Gaussians: y = rho*x + sqrt(1-rho^2)*n. Marginal rows
// reuse x with a within-batch shuffle of an independently drawn y column.
template <typename T>
PairedSampler<T> gaussian_pair_sampler(double rho, Rng& rng) {
  check(std::abs(rho) < 1.0, "gaussian_pair_sampler: |rho| must be < 1");
  auto state = std::make_shared<Rng>(rng.fork(0x6d69u));
  return [rho, state](int64_t batch) {
    MIDraw<T> draw;
    draw.joint_pairs = Tensor<T>({batch, 2});
    draw.marginal_pairs = Tensor<T>({batch, 2});
    const double noise = std::sqrt(1.0 - rho * rho);
    std::vector<double> ys(batch);
    for (int64_t i = 0; i < batch; ++i) {
      const double x = state->normal();
      const double y = rho * x + noise * state->normal();
      draw.joint_pairs.at2(i, 0) = static_cast<T>(x);
      draw.joint_pairs.at2(i, 1) = static_cast<T>(y);
      draw.marginal_pairs.at2(i, 0) = static_cast<T>(x);
      ys[static_cast<size_t>(i)] = rho * state->normal() + noise * state->normal();
    }
    shuffle(ys, *state);
    for (int64_t i = 0; i < batch; ++i)
      draw.marginal_pairs.at2(i, 1) = static_cast<T>(ys[static_cast<size_t>(i)]);
    return draw;
  };
}

// Deterministic copy over k one-hot symbols: y = x. Discrete MI is ln(k).
template <typename T>
PairedSampler<T> onehot_copy_sampler(int64_t k, Rng& rng) {
  auto state = std::make_shared<Rng>(rng.fork(0x6f68u));
  return [k, state](int64_t batch) {
    MIDraw<T> draw;
    draw.joint_pairs = Tensor<T>({batch, 2 * k});
    draw.marginal_pairs = Tensor<T>({batch, 2 * k});
    for (int64_t i = 0; i < batch; ++i) {
      const int64_t sym = state->uniform_int(k);
      const int64_t indep = state->uniform_int(k);
      draw.joint_pairs.at2(i, sym) = T(1);
      draw.joint_pairs.at2(i, k + sym) = T(1);
      draw.marginal_pairs.at2(i, sym) = T(1);
      draw.marginal_pairs.at2(i, k + indep) = T(1);
    }
    return draw;
  };
}

struct MIEstimate {
  double nats = 0.0;         // EMA of the bound over the last 10% of steps
  double last_bound = 0.0;   // final per-batch bound
  bool diverged = false;
  std::vector<std::pair<int64_t, double>> trace;  // (step, bound_nats)
};

// MINE-style training of a critic by gradient ascent on the DV bound. The
// ascent step uses an exponential-moving-average denominator (decay 0.99)
// for the log term's gradient; the reported bound is the plain batch
// estimate. Works with any critic exposing forward() and parameters().
template <typename T, typename Critic>
MIEstimate estimate_mi(const PairedSampler<T>& sampler, Critic& critic, int64_t steps,
                       double lr, int64_t batch = 256, int64_t trace_every = 50) {
  check(steps > 0 && batch > 0, "estimate_mi: steps and batch must be positive");
  Adam<T> opt(critic.parameters(), lr, 0.9, 0.999);
  MIEstimate result;
  double ema_denom = -1.0;
  double ema_bound = 0.0;
  bool ema_started = false;
  const int64_t window_start = steps - std::max<int64_t>(1, steps / 10);
  const double bound_decay = 0.99;

  for (int64_t step = 0; step < steps; ++step) {
    MIDraw<T> draw = sampler(batch);
    Var<T> joint = make_constant(draw.joint_pairs);
    Var<T> marginal = make_constant(draw.marginal_pairs);
    Var<T> sj = critic.forward(joint);
    Var<T> sm = critic.forward(marginal);

    double bound;
    {
      NoGradGuard ng;
      bound = scalar_value(dv_bound(detach(sj), detach(sm)));
    }
    if (!std::isfinite(bound)) {
      log_warn("estimate_mi: bound diverged at step " + std::to_string(step));
      result.diverged = true;
      break;
    }
    result.last_bound = bound;
    if (step % trace_every == 0) result.trace.emplace_back(step, bound);
    if (step >= window_start) {
      if (!ema_started) {
        ema_bound = bound;
        ema_started = true;
      } else {
        ema_bound = bound_decay * ema_bound + (1.0 - bound_decay) * bound;
      }
    }

    const double batch_mean_exp = mean_exp(sm->value);
    if (ema_denom < 0.0) {
      ema_denom = batch_mean_exp;
    } else {
      ema_denom = 0.99 * ema_denom + 0.01 * batch_mean_exp;
    }

    Var<T> surrogate = mine_surrogate(sj, sm, ema_denom);
    Var<T> loss = mul_scalar(surrogate, -1.0);  // ascend the bound
    opt.zero_grad();
    backward(loss);
    opt.step();
  }
  result.nats = ema_started ? ema_bound : result.last_bound;
  return result;
}

}  // namespace mi2gan

#endif
