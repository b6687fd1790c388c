#ifndef MI2GAN_TRAIN_TRAINER_HPP
#define MI2GAN_TRAIN_TRAINER_HPP

#include <deque>
#include <filesystem>
#include <fstream>

#include "mi2gan/core/log.hpp"
#include "mi2gan/gan/losses.hpp"
#include "mi2gan/gan/models.hpp"
#include "mi2gan/mi/mi.hpp"
#include "mi2gan/synth/dataset.hpp"
#include "mi2gan/train/checkpoint.hpp"
#include "mi2gan/train/config.hpp"
#include "mi2gan/xshape/autoencoder.hpp"

namespace mi2gan {

struct LossRecord {
  int64_t step = 0;
  double adv_g_ab = 0, adv_g_ba = 0, cyc = 0, dis_ab = 0, dis_ba = 0;
  double mi_ab = 0, mi_ba = 0, total = 0;
  double d_a = 0, d_b = 0, d_mi_bound = 0;
  bool aborted = false;
};

inline nlohmann::json loss_record_to_json(const LossRecord& r) {
  return nlohmann::json{{"step", r.step},       {"adv_g_ab", r.adv_g_ab},
                        {"adv_g_ba", r.adv_g_ba}, {"cyc", r.cyc},
                        {"dis_ab", r.dis_ab},   {"dis_ba", r.dis_ba},
                        {"mi_ab", r.mi_ab},     {"mi_ba", r.mi_ba},
                        {"total", r.total},     {"d_a", r.d_a},
                        {"d_b", r.d_b},         {"d_mi_bound", r.d_mi_bound},
                        {"aborted", r.aborted}};
}

inline LossRecord loss_record_from_json(const nlohmann::json& j) {
  LossRecord r;
  j.at("step").get_to(r.step);
  j.at("adv_g_ab").get_to(r.adv_g_ab);
  j.at("adv_g_ba").get_to(r.adv_g_ba);
  j.at("cyc").get_to(r.cyc);
  j.at("dis_ab").get_to(r.dis_ab);
  j.at("dis_ba").get_to(r.dis_ba);
  j.at("mi_ab").get_to(r.mi_ab);
  j.at("mi_ba").get_to(r.mi_ba);
  j.at("total").get_to(r.total);
  j.at("d_a").get_to(r.d_a);
  j.at("d_b").get_to(r.d_b);
  j.at("d_mi_bound").get_to(r.d_mi_bound);
  j.at("aborted").get_to(r.aborted);
  return r;
}

// Full objective composition. Minimizing the result maximizes the DV bounds
// (the MI terms enter negated); ablation flags zero their terms.
template <typename T>
Var<T> compose_total(const Var<T>& adv_g_ab, const Var<T>& adv_g_ba, const Var<T>& cyc,
                     const Var<T>& dis_ab, const Var<T>& dis_ba, const Var<T>& mi_ab,
                     const Var<T>& mi_ba, const TrainConfig& cfg) {
  Var<T> total = add(adv_g_ab, adv_g_ba);
  total = add(total, mul_scalar(cyc, cfg.alpha));
  if (!cfg.ablate_ae) {
    total = add(total, mul_scalar(add(dis_ab, dis_ba), cfg.beta));
  }
  if (!cfg.ablate_mi) {
    total = add(total, mul_scalar(add(mi_ab, mi_ba), -cfg.mi_weight));
  }
  return total;
}

// All nine parameter sets plus their optimizers and counters.
template <typename T>
struct TrainState {
  TrainConfig cfg;
  ResnetGenerator<T> g_ab, g_ba;
  PatchDiscriminator<T> d_a, d_b;
  ContentEncoder<T> enc_a, enc_b;
  DomainDecoder<T> dec_a, dec_b;
  MIDiscriminator<T> d_mi;
  Adam<T> opt_g, opt_d_a, opt_d_b, opt_ae, opt_d_mi;
  int64_t step = 0;
  int64_t epoch = 0;
  int64_t incidents = 0;
  std::deque<LossRecord> history;  // bounded ring, newest at the back
  static constexpr size_t kHistoryCap = 100000;

  explicit TrainState(const TrainConfig& config) : cfg(config) {
    validate_config(cfg);
    Rng root(mix_seed(cfg.seed, 0x747261696eull));
    Rng r1 = root.fork(1), r2 = root.fork(2), r3 = root.fork(3), r4 = root.fork(4);
    Rng r5 = root.fork(5), r6 = root.fork(6), r7 = root.fork(7), r8 = root.fork(8);
    Rng r9 = root.fork(9);
    g_ab = ResnetGenerator<T>(r1);
    g_ba = ResnetGenerator<T>(r2);
    d_a = PatchDiscriminator<T>(r3);
    d_b = PatchDiscriminator<T>(r4);
    enc_a = ContentEncoder<T>(r5);
    enc_b = ContentEncoder<T>(r6);
    dec_a = DomainDecoder<T>(r7);
    dec_b = DomainDecoder<T>(r8);
    d_mi = MIDiscriminator<T>(r9);

    ParamList<T> gen_params = g_ab.parameters("g_ab");
    append_params(gen_params, g_ba.parameters("g_ba"));
    opt_g = Adam<T>(gen_params, cfg.lr_g, 0.5, 0.999);
    opt_d_a = Adam<T>(d_a.parameters("d_a"), cfg.lr_d, 0.5, 0.999);
    opt_d_b = Adam<T>(d_b.parameters("d_b"), cfg.lr_d, 0.5, 0.999);
    ParamList<T> ae_params = enc_a.parameters("enc_a");
    append_params(ae_params, enc_b.parameters("enc_b"));
    append_params(ae_params, dec_a.parameters("dec_a"));
    append_params(ae_params, dec_b.parameters("dec_b"));
    opt_ae = Adam<T>(ae_params, cfg.lr_g, 0.5, 0.999);
    opt_d_mi = Adam<T>(d_mi.parameters("d_mi"), cfg.lr_d, 0.5, 0.999);
  }

  std::vector<std::pair<std::string, ParamList<T>>> net_params() {
    return {{"g_ab", g_ab.parameters("g_ab")},   {"g_ba", g_ba.parameters("g_ba")},
            {"d_a", d_a.parameters("d_a")},      {"d_b", d_b.parameters("d_b")},
            {"enc_a", enc_a.parameters("enc_a")}, {"enc_b", enc_b.parameters("enc_b")},
            {"dec_a", dec_a.parameters("dec_a")}, {"dec_b", dec_b.parameters("dec_b")},
            {"d_mi", d_mi.parameters("d_mi")}};
  }

  std::vector<std::pair<std::string, Adam<T>*>> optimizers() {
    return {{"opt_g", &opt_g},
            {"opt_d_a", &opt_d_a},
            {"opt_d_b", &opt_d_b},
            {"opt_ae", &opt_ae},
            {"opt_d_mi", &opt_d_mi}};
  }

  void freeze_all() {
    for (auto& [name, params] : net_params()) {
      auto p = params;
      set_requires_grad(p, false);
    }
  }
};

// Named scalars of the generator phase plus the graph root used for the
// update and the detached fakes that phase 2 reuses.
template <typename T>
struct GenPhaseLosses {
  Var<T> total;
  LossRecord record;
  Tensor<T> fake_b;  // G_AB(a), detached values
  Tensor<T> fake_a;  // G_BA(b), detached values
};

// Builds the generator-phase objective: adversarial terms, two cycle
// directions, both distillation terms against frozen auto-encoder targets,
// and the two DV bounds whose joint samples carry gradients back into the
// generators through the frozen encoders.
template <typename T>
GenPhaseLosses<T> generator_phase_losses(TrainState<T>& st, const Tensor<T>& batch_a,
                                         const Tensor<T>& batch_b) {
  check(batch_a.rank() == 4 && batch_b.rank() == 4, "train: rank-4 batches required");
  check(batch_a.dim(0) == batch_b.dim(0), "train: domain batches must have equal size");
  const TrainConfig& cfg = st.cfg;

  Var<T> a = make_constant(batch_a);
  Var<T> b = make_constant(batch_b);

  Var<T> fake_b = st.g_ab.forward(a);   // I_ab
  Var<T> fake_a = st.g_ba.forward(b);   // I_ba
  Var<T> cyc_a = st.g_ba.forward(fake_b);
  Var<T> cyc_b = st.g_ab.forward(fake_a);

  Var<T> adv_ab = adv_loss_g(st.d_b.forward(fake_b));
  Var<T> adv_ba = adv_loss_g(st.d_a.forward(fake_a));
  Var<T> cyc = add(cycle_loss(a, cyc_a), cycle_loss(b, cyc_b));

  Var<T> zero = make_constant(Tensor<T>::full({1}, T(0)));
  Var<T> dis_ab = zero, dis_ba = zero, mi_ab = zero, mi_ba = zero;

  Var<T> z_a_frozen, z_b_frozen;
  if (!cfg.ablate_ae || !cfg.ablate_mi) {
    NoGradGuard ng;
    z_a_frozen = st.enc_a.forward(a);
    z_b_frozen = st.enc_b.forward(b);
  }

  if (!cfg.ablate_ae) {
    Var<T> cross_ab, rec_a, cross_ba, rec_b;
    {
      NoGradGuard ng;
      cross_ab = st.dec_b.forward(z_a_frozen);  // I_ab'
      rec_a = st.dec_a.forward(z_a_frozen);     // I_a'
      cross_ba = st.dec_a.forward(z_b_frozen);  // I_ba'
      rec_b = st.dec_b.forward(z_b_frozen);     // I_b'
    }
    dis_ab = distill_loss(fake_b, cross_ab, a, rec_a);
    dis_ba = distill_loss(fake_a, cross_ba, b, rec_b);
  }

  if (!cfg.ablate_mi) {
    Var<T> z_ab = st.enc_b.forward(fake_b);  // gradients flow into G_AB
    Var<T> z_ba = st.enc_a.forward(fake_a);
    MISampleBatch<T> ab = build_mi_samples(z_a_frozen, z_ab, z_b_frozen);
    MISampleBatch<T> ba = build_mi_samples(z_b_frozen, z_ba, z_a_frozen);
    mi_ab = dv_bound(st.d_mi.forward(ab.joint), st.d_mi.forward(ab.marginal));
    mi_ba = dv_bound(st.d_mi.forward(ba.joint), st.d_mi.forward(ba.marginal));
  }

  GenPhaseLosses<T> out;
  out.total = compose_total(adv_ab, adv_ba, cyc, dis_ab, dis_ba, mi_ab, mi_ba, cfg);
  out.record.adv_g_ab = scalar_value(adv_ab);
  out.record.adv_g_ba = scalar_value(adv_ba);
  out.record.cyc = scalar_value(cyc);
  out.record.dis_ab = scalar_value(dis_ab);
  out.record.dis_ba = scalar_value(dis_ba);
  out.record.mi_ab = scalar_value(mi_ab);
  out.record.mi_ba = scalar_value(mi_ba);
  out.record.total = scalar_value(out.total);
  out.fake_b = fake_b->value;
  out.fake_a = fake_a->value;
  return out;
}

namespace detail {

template <typename T>
struct StateSnapshot {
  std::vector<Tensor<T>> params;
  std::vector<Tensor<T>> moments;
  std::vector<int64_t> opt_steps;
};

template <typename T>
StateSnapshot<T> snapshot_state(TrainState<T>& st) {
  StateSnapshot<T> snap;
  for (auto& [name, params] : st.net_params()) {
    for (auto& p : params) snap.params.push_back(p.var->value.clone());
  }
  for (auto& [name, opt] : st.optimizers()) {
    for (auto& m : opt->moments_m()) snap.moments.push_back(m.clone());
    for (auto& v : opt->moments_v()) snap.moments.push_back(v.clone());
    snap.opt_steps.push_back(opt->steps_taken());
  }
  return snap;
}

template <typename T>
void restore_state(TrainState<T>& st, const StateSnapshot<T>& snap) {
  size_t pi = 0;
  for (auto& [name, params] : st.net_params()) {
    for (auto& p : params) {
      const Tensor<T>& src = snap.params[pi++];
      std::copy(src.data(), src.data() + src.numel(), p.var->value.data());
    }
  }
  size_t mi = 0, oi = 0;
  for (auto& [name, opt] : st.optimizers()) {
    for (auto& m : opt->moments_m()) {
      const Tensor<T>& src = snap.moments[mi++];
      std::copy(src.data(), src.data() + src.numel(), m.data());
    }
    for (auto& v : opt->moments_v()) {
      const Tensor<T>& src = snap.moments[mi++];
      std::copy(src.data(), src.data() + src.numel(), v.data());
    }
    opt->set_steps_taken(snap.opt_steps[oi++]);
  }
}

}  // namespace detail

// One optimization step in the paper's order: generators first against
// everything frozen, then discriminators, auto-encoders and the MI critic
// with the generators frozen. A non-finite loss anywhere aborts the step
// and rolls the state back.
template <typename T>
LossRecord train_step(TrainState<T>& st, const Tensor<T>& batch_a, const Tensor<T>& batch_b) {
  const TrainConfig& cfg = st.cfg;
  auto snapshot = detail::snapshot_state(st);

  auto abort_step = [&](const std::string& what, LossRecord rec) {
    detail::restore_state(st, snapshot);
    ++st.incidents;
    rec.aborted = true;
    rec.step = st.step;
    log_warn("train_step " + std::to_string(st.step) + " aborted (" + what +
             " non-finite); state rolled back");
    st.history.push_back(rec);
    if (st.history.size() > TrainState<T>::kHistoryCap) st.history.pop_front();
    ++st.step;
    return rec;
  };

  // Phase 1: generators only.
  st.freeze_all();
  set_requires_grad(st.opt_g.params(), true);
  GenPhaseLosses<T> gen = generator_phase_losses(st, batch_a, batch_b);
  LossRecord rec = gen.record;
  if (!std::isfinite(rec.total)) return abort_step("generator total", rec);
  st.opt_g.zero_grad();
  backward(gen.total);
  st.opt_g.step();

  Var<T> a = make_constant(batch_a);
  Var<T> b = make_constant(batch_b);
  Var<T> fake_b = make_constant(gen.fake_b);
  Var<T> fake_a = make_constant(gen.fake_a);

  // Phase 2a: auto-encoders on the distillation loss, generator outputs
  // detached.
  if (!cfg.ablate_ae) {
    st.freeze_all();
    set_requires_grad(st.opt_ae.params(), true);
    Var<T> z_a = st.enc_a.forward(a);
    Var<T> z_b = st.enc_b.forward(b);
    Var<T> dis_a = distill_loss(fake_b, st.dec_b.forward(z_a), a, st.dec_a.forward(z_a));
    Var<T> dis_b = distill_loss(fake_a, st.dec_a.forward(z_b), b, st.dec_b.forward(z_b));
    Var<T> ae_loss = mul_scalar(add(dis_a, dis_b), cfg.beta);
    if (!std::isfinite(scalar_value(ae_loss))) return abort_step("ae loss", rec);
    st.opt_ae.zero_grad();
    backward(ae_loss);
    st.opt_ae.step();
  }

  // Phase 2b: MI critic ascends the DV bound on detached codes from the
  // just-updated encoders; gradient norm clipped at 5.
  if (!cfg.ablate_mi) {
    st.freeze_all();
    set_requires_grad(st.opt_d_mi.params(), true);
    Var<T> z_a, z_ab, z_b, z_ba;
    {
      NoGradGuard ng;
      z_a = st.enc_a.forward(a);
      z_ab = st.enc_b.forward(fake_b);
      z_b = st.enc_b.forward(b);
      z_ba = st.enc_a.forward(fake_a);
    }
    MISampleBatch<T> ab = build_mi_samples(z_a, z_ab, z_b);
    MISampleBatch<T> ba = build_mi_samples(z_b, z_ba, z_a);
    Var<T> bound = add(dv_bound(st.d_mi.forward(ab.joint), st.d_mi.forward(ab.marginal)),
                       dv_bound(st.d_mi.forward(ba.joint), st.d_mi.forward(ba.marginal)));
    rec.d_mi_bound = scalar_value(bound);
    if (!std::isfinite(rec.d_mi_bound)) return abort_step("d_mi bound", rec);
    Var<T> d_mi_loss = mul_scalar(bound, -1.0);
    st.opt_d_mi.zero_grad();
    backward(d_mi_loss);
    clip_grad_norm(st.opt_d_mi.params(), 5.0);
    st.opt_d_mi.step();
  }

  // Phase 2c: domain discriminators on real vs detached fakes.
  {
    st.freeze_all();
    set_requires_grad(st.opt_d_a.params(), true);
    Var<T> d_a_loss = adv_loss_d(st.d_a.forward(a), st.d_a.forward(fake_a));
    rec.d_a = scalar_value(d_a_loss);
    if (!std::isfinite(rec.d_a)) return abort_step("d_a loss", rec);
    st.opt_d_a.zero_grad();
    backward(d_a_loss);
    st.opt_d_a.step();

    st.freeze_all();
    set_requires_grad(st.opt_d_b.params(), true);
    Var<T> d_b_loss = adv_loss_d(st.d_b.forward(b), st.d_b.forward(fake_b));
    rec.d_b = scalar_value(d_b_loss);
    if (!std::isfinite(rec.d_b)) return abort_step("d_b loss", rec);
    st.opt_d_b.zero_grad();
    backward(d_b_loss);
    st.opt_d_b.step();
  }

  rec.step = st.step;
  st.history.push_back(rec);
  if (st.history.size() > TrainState<T>::kHistoryCap) st.history.pop_front();
  ++st.step;
  return rec;
}

template <typename T>
void save_checkpoint(const std::string& dir, TrainState<T>& st) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json nets = nlohmann::json::object();
  for (auto& [name, params] : st.net_params()) {
    const std::string file = name + ".bin";
    auto plist = params;
    save_params_blob((fs::path(dir) / file).string(), plist);
    nets[name] = file;
  }
  nlohmann::json optim = nlohmann::json::object();
  for (auto& [name, opt] : st.optimizers()) {
    const std::string file = name + ".bin";
    save_adam_blob((fs::path(dir) / file).string(), *opt);
    optim[name] = file;
  }
  nlohmann::json manifest{{"version", 1},
                          {"step", st.step},
                          {"epoch", st.epoch},
                          {"nets", nets},
                          {"optim", optim}};
  std::ofstream out((fs::path(dir) / "manifest.json").string());
  if (!out) throw IoError("cannot write checkpoint manifest in " + dir);
  out << manifest.dump(2) << "\n";
  if (!out.good()) throw IoError("failed writing checkpoint manifest in " + dir);
}

template <typename T>
void load_checkpoint(const std::string& dir, TrainState<T>& st) {
  namespace fs = std::filesystem;
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open checkpoint manifest: " + manifest_path);
  nlohmann::json manifest;
  in >> manifest;
  check(manifest.at("version").get<int>() == 1, "checkpoint: unsupported version");
  st.step = manifest.at("step").get<int64_t>();
  st.epoch = manifest.at("epoch").get<int64_t>();
  for (auto& [name, params] : st.net_params()) {
    const std::string file = manifest.at("nets").at(name).template get<std::string>();
    auto plist = params;
    load_params_blob((fs::path(dir) / file).string(), plist);
  }
  if (manifest.contains("optim")) {
    for (auto& [name, opt] : st.optimizers()) {
      const std::string file = manifest.at("optim").at(name).template get<std::string>();
      load_adam_blob((fs::path(dir) / file).string(), *opt);
    }
  }
}

// Epoch loop over shuffled unpaired batches. Writes a checkpoint every
// epoch and appends one JSON line per step to <out_dir>/history.jsonl.
template <typename T>
void fit(TrainState<T>& st, const DatasetManifest& manifest, const std::string& out_dir,
         bool append_history = false) {
  const TrainConfig& cfg = st.cfg;
  check(manifest.spec.canvas_h == cfg.image_size && manifest.spec.canvas_w == cfg.image_size,
        "fit: config image_size " + std::to_string(cfg.image_size) +
            " does not match dataset canvas");

  DomainData train_a = load_split(manifest, "A", "train");
  DomainData train_b = load_split(manifest, "B", "train");
  const int64_t per_epoch = std::min(train_a.count, train_b.count) / cfg.batch_size;
  check(cfg.epochs == 0 || per_epoch > 0, "fit: not enough samples for one batch");

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string history_path = (fs::path(out_dir) / "history.jsonl").string();
  std::ofstream history(history_path, append_history ? std::ios::app : std::ios::trunc);
  if (!history) throw IoError("cannot open history file: " + history_path);

  const std::string ckpt_dir = (fs::path(out_dir) / "checkpoint").string();

  for (int64_t epoch = st.epoch; epoch < cfg.epochs; ++epoch) {
    Rng epoch_rng(mix_seed(mix_seed(cfg.seed, 0x65706f63ull), static_cast<uint64_t>(epoch)));
    std::vector<int64_t> order_a(train_a.count), order_b(train_b.count);
    for (int64_t i = 0; i < train_a.count; ++i) order_a[static_cast<size_t>(i)] = i;
    for (int64_t i = 0; i < train_b.count; ++i) order_b[static_cast<size_t>(i)] = i;
    shuffle(order_a, epoch_rng);
    shuffle(order_b, epoch_rng);

    for (int64_t s = 0; s < per_epoch; ++s) {
      std::vector<int64_t> idx_a(order_a.begin() + s * cfg.batch_size,
                                 order_a.begin() + (s + 1) * cfg.batch_size);
      std::vector<int64_t> idx_b(order_b.begin() + s * cfg.batch_size,
                                 order_b.begin() + (s + 1) * cfg.batch_size);
      Tensor<float> ba = gather_batch(train_a.images, idx_a);
      Tensor<float> bb = gather_batch(train_b.images, idx_b);
      // Training runs in T precision; batches are stored as float.
      LossRecord rec;
      if constexpr (std::is_same_v<T, float>) {
        rec = train_step(st, ba, bb);
      } else {
        Tensor<T> ta = Tensor<T>::uninitialized(ba.shape());
        Tensor<T> tb = Tensor<T>::uninitialized(bb.shape());
        for (int64_t i = 0; i < ba.numel(); ++i) ta[i] = static_cast<T>(ba[i]);
        for (int64_t i = 0; i < bb.numel(); ++i) tb[i] = static_cast<T>(bb[i]);
        rec = train_step(st, ta, tb);
      }
      history << loss_record_to_json(rec).dump() << "\n";
    }
    history.flush();
    st.epoch = epoch + 1;
    save_checkpoint(ckpt_dir, st);
    log_info("epoch " + std::to_string(st.epoch) + "/" + std::to_string(cfg.epochs) +
             " done, step " + std::to_string(st.step));
  }
  save_checkpoint(ckpt_dir, st);
}

}  // namespace mi2gan

#endif
