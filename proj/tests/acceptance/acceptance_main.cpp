// Acceptance suite: runs every release criterion end to end at its stated
// tolerance and prints one pass/fail line per criterion. Exits non-zero if
// any criterion fails. Pass criterion ids as arguments to run a subset.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <set>

#include "mi2gan/eval/adaptation.hpp"
#include "mi2gan/eval/cam.hpp"
#include "mi2gan/eval/degeneracy.hpp"
#include "mi2gan/train/trainer.hpp"
#include "support/test_oracles.hpp"

using namespace mi2gan;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Line {
  std::string id;
  bool pass = false;
  std::string detail;
};

std::vector<Line> g_lines;

void report(const std::string& id, bool pass, const std::string& detail) {
  g_lines.push_back({id, pass, detail});
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
}

double elapsed_s(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

Tensor<float> random_images(int64_t n, int64_t size, Rng& rng) {
  Tensor<float> t = Tensor<float>::uninitialized({n, 3, size, size});
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// ---------------------------------------------------------------------------
// criterion 1: MI estimator soundness on correlated Gaussians
void criterion_1() {
  auto t0 = Clock::now();
  const std::vector<double> rhos{0.0, 0.5, 0.9};
  std::vector<double> estimates;
  bool ok = true;
  for (double rho : rhos) {
    Rng rng(1000 + static_cast<uint64_t>(rho * 10));
    MlpCritic<float> critic(2, 64, rng);
    auto sampler = gaussian_pair_sampler<float>(rho, rng);
    MIEstimate est = estimate_mi(sampler, critic, 5000, 5e-4, 256);
    estimates.push_back(est.nats);
    const double oracle = gaussian_mi_oracle(rho);
    ok = ok && !est.diverged && std::abs(est.nats - oracle) <= 0.1;
  }
  // soundness invariant: estimates increase with |rho|
  ok = ok && estimates[0] < estimates[1] && estimates[1] < estimates[2];
  const double secs = elapsed_s(t0);
  ok = ok && secs < 180.0;
  report("criterion 1", ok,
         "MI estimates " + fmt(estimates[0]) + "/" + fmt(estimates[1]) + "/" + fmt(estimates[2]) +
             " vs oracles 0/" + fmt(gaussian_mi_oracle(0.5)) + "/" + fmt(gaussian_mi_oracle(0.9)) +
             " (tol 0.1, monotone, " + fmt(secs, 1) + "s < 180s)");
}

// ---------------------------------------------------------------------------
// criterion 2: DV-bound identities
void criterion_2() {
  bool ok = true;
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const float c = static_cast<float>(rng.uniform(-60.0, 60.0));
    ok = ok && dv_lower_bound(Tensor<float>::full({8}, c), Tensor<float>::full({6}, c)) == 0.0;
  }
  // direct scalar evaluation oracle for joint [2,2], marginal [0,2]
  const double oracle = testing::loop_dv_bound({2.0, 2.0}, {0.0, 2.0});
  const double got = dv_lower_bound(Tensor<double>::from_vector({2}, {2.0, 2.0}),
                                    Tensor<double>::from_vector({2}, {0.0, 2.0}));
  ok = ok && std::abs(got - oracle) <= 1e-6;
  for (double s : {80.0, -80.0}) {
    Tensor<float> j = Tensor<float>::full({4}, static_cast<float>(s));
    Tensor<float> m = Tensor<float>::from_vector(
        {3}, {static_cast<float>(s), static_cast<float>(-s), 0.0f});
    ok = ok && std::isfinite(dv_lower_bound(j, m));
  }
  report("criterion 2", ok,
         "constant critic -> 0 exactly; [2,2]/[0,2] -> " + fmt(got, 7) + " vs oracle " +
             fmt(oracle, 7) + " (tol 1e-6); finite at |score| = 80");
}

// ---------------------------------------------------------------------------
// criterion 3: loss identities against scalar-loop oracles
void criterion_3() {
  bool ok = true;
  Rng rng(3);
  for (int rep = 0; rep < 100 && ok; ++rep) {
    Tensor<float> a = random_images(1, 8, rng);
    Tensor<float> b = random_images(1, 8, rng);
    ok = ok && cycle_loss_value(a, b) == static_cast<float>(testing::loop_l1_mean(a, b));
    Tensor<float> c = random_images(1, 8, rng);
    Tensor<float> d = random_images(1, 8, rng);
    const float dis_expected = static_cast<float>(testing::loop_l1_mean(a, b)) +
                               static_cast<float>(testing::loop_l1_mean(c, d));
    ok = ok && distill_loss_value(a, b, c, d) == dis_expected;
    Tensor<float> mx({8, 8}), my({8, 8});
    for (int64_t i = 0; i < 64; ++i) {
      mx[i] = rng.uniform() < 0.5 ? 1.0f : 0.0f;
      my[i] = rng.uniform() < 0.5 ? 1.0f : 0.0f;
    }
    ok = ok && dice(mx, my) == testing::loop_dice(mx, my);
  }
  // dice edge cases, exact
  Tensor<float> m1({4, 4}), m2({4, 4}), empty({4, 4});
  m1[0] = m1[5] = 1.0f;
  m2[10] = m2[15] = 1.0f;
  ok = ok && dice(m1, m1) == 1.0;
  ok = ok && dice(m1, m2) == 0.0;
  ok = ok && dice(empty, empty) == 1.0;
  report("criterion 3", ok,
         "cycle/distill/dice match scalar-loop oracles exactly on 100 random instances; "
         "dice edge cases exact");
}

// ---------------------------------------------------------------------------
// criterion 6: gradient checks, one parameter per network
void criterion_6() {
  Rng rng(6);
  ResnetGenerator<double> g(rng);
  PatchDiscriminator<double> d(rng);
  ContentEncoder<double> enc(rng);
  DomainDecoder<double> dec(rng);
  MIDiscriminator<double> dmi(rng);

  Tensor<double> x16 = Tensor<double>::uninitialized({1, 3, 16, 16});
  Tensor<double> x32 = Tensor<double>::uninitialized({1, 3, 32, 32});
  Tensor<double> lat = Tensor<double>::uninitialized({1, 64, 4, 4});
  Tensor<double> pj = Tensor<double>::uninitialized({2, 128, 8, 8});
  Tensor<double> pm = Tensor<double>::uninitialized({2, 128, 8, 8});
  Rng fill(61);
  for (auto* t : {&x16, &x32, &lat, &pj, &pm})
    for (int64_t i = 0; i < t->numel(); ++i) (*t)[i] = fill.uniform(-1.0, 1.0);

  bool ok = true;
  std::string detail;
  auto run = [&](const char* name, const Var<double>& param,
                 const std::function<Var<double>()>& loss) {
    auto res = testing::gradcheck_first_active(param, loss, 1e-3, 1e-3);
    ok = ok && res.ok;
    detail += std::string(name) + " rel.err " + fmt(res.rel_error, 6) + "; ";
  };
  run("generator", g.stem.w,
      [&] { return mean_all(mul(g.forward(make_constant(x16)), g.forward(make_constant(x16)))); });
  run("discriminator", d.c1.w, [&] { return mse_to_const(d.forward(make_constant(x32)), 1.0); });
  run("encoder", enc.e1.w, [&] {
    return mean_all(mul(enc.forward(make_constant(x16)), enc.forward(make_constant(x16))));
  });
  run("decoder", dec.d1.w, [&] {
    return mean_all(mul(dec.forward(make_constant(lat)), dec.forward(make_constant(lat))));
  });
  run("d_mi", dmi.c1.w,
      [&] { return dv_bound(dmi.forward(make_constant(pj)), dmi.forward(make_constant(pm))); });
  report("criterion 6", ok, "central differences vs autodiff (rel tol 1e-3): " + detail);
}

// ---------------------------------------------------------------------------
// training workspace shared by criteria 4, 5, 7, 8

struct TrainedRuns {
  std::string data_dir;
  DatasetManifest manifest;
  std::vector<std::shared_ptr<TrainState<float>>> full;    // per seed
  std::vector<std::shared_ptr<TrainState<float>>> ablate;  // per seed
  std::vector<double> full_secs, ablate_secs;
  std::vector<uint64_t> seeds{1, 2, 3};
};

TrainConfig desk_config(uint64_t seed, bool ablate_mi) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = 30;
  cfg.batch_size = 4;
  cfg.image_size = 64;
  cfg.ablate_mi = ablate_mi;
  return cfg;
}

TrainedRuns prepare_runs(const std::string& work) {
  TrainedRuns runs;
  runs.data_dir = work + "/data";
  if (!fs::exists(runs.data_dir + "/manifest.json")) {
    SceneSpec spec;
    make_dataset(200, 12345, default_style_a(), default_style_b(), spec, runs.data_dir);
  }
  runs.manifest = load_manifest(runs.data_dir + "/manifest.json");

  for (uint64_t seed : runs.seeds) {
    for (bool ablate : {false, true}) {
      auto st = std::make_shared<TrainState<float>>(desk_config(seed, ablate));
      const std::string out =
          work + "/run_" + (ablate ? "ablate_" : "full_") + std::to_string(seed);
      log_info(std::string("training ") + (ablate ? "w/o D_MI" : "full") + " model, seed " +
               std::to_string(seed));
      auto t0 = Clock::now();
      fit(*st, runs.manifest, out);
      const double secs = elapsed_s(t0);
      if (ablate) {
        runs.ablate.push_back(st);
        runs.ablate_secs.push_back(secs);
      } else {
        runs.full.push_back(st);
        runs.full_secs.push_back(secs);
      }
      log_info("run finished in " + fmt(secs, 1) + "s");
    }
  }
  return runs;
}

// criterion 4: cycle degeneracy, bitwise parts on 32 random inputs plus the
// content drop under shift8 with the trained seed-1 generators
void criterion_4(const TrainedRuns& runs) {
  TrainState<float>& st = *runs.full[0];
  Rng rng(4);
  bool perm_ok = true;
  double max_gap = 0.0;
  NoGradGuard ng;
  for (const char* name : {"hflip", "vflip", "rot90", "shift8"}) {
    PermTransform t = parse_transform(name);
    Tensor<float> x = random_images(32, 64, rng);
    Tensor<float> fake = st.g_ab.forward(make_constant(x))->value;
    Tensor<float> rec = st.g_ba.forward(make_constant(fake))->value;
    Tensor<float> rec_mod =
        st.g_ba.forward(make_constant(apply_inverse_transform(t, apply_transform(t, fake))))
            ->value;
    perm_ok = perm_ok && bitwise_equal(rec, rec_mod);

    Tensor<float> y = random_images(32, 64, rng);
    Tensor<float> y_rel = apply_inverse_transform(t, y);
    Tensor<float> ga = st.g_ba.forward(make_constant(y_rel))->value;
    Tensor<float> cycle = st.g_ab.forward(make_constant(ga))->value;
    const double err_orig = cycle_loss_value(y_rel, cycle);
    const double err_mod = cycle_loss_value(y, apply_transform(t, cycle));
    max_gap = std::max(max_gap, std::abs(err_orig - err_mod));
  }
  perm_ok = perm_ok && max_gap <= 1e-9;

  // content drop under shift8 on real domain-A validation scenes
  DomainData a_val = load_split(runs.manifest, "A", "val");
  DomainData b_val = load_split(runs.manifest, "B", "val");
  DegeneracyReport rep =
      degeneracy_demo(st.g_ab, st.g_ba, PermTransform::kShift8, a_val.images, a_val.masks,
                      b_val.images, runs.manifest.style_b, runs.manifest.spec);
  const bool drop_ok = rep.content_iou_modified < rep.content_iou_original;
  report("criterion 4", perm_ok && drop_ok,
         "A-side reconstructions bitwise equal over 4 transforms x 32 inputs; B-side cycle gap " +
             fmt(max_gap, 12) + " <= 1e-9; shift8 content IoU " + fmt(rep.content_iou_modified) +
             " < " + fmt(rep.content_iou_original) + " (unshifted)");
}

// criterion 5: desk-scale adaptation with seeds {1,2,3}
void criterion_5(const TrainedRuns& runs) {
  DomainData a_train = load_split(runs.manifest, "A", "train");
  DomainData a_val = load_split(runs.manifest, "A", "val");
  DomainData b_val = load_split(runs.manifest, "B", "val");

  std::vector<double> dice_vals, dice_directs, dice_full, dice_ablate, recovery;
  std::vector<double> iou_full, iou_ablate;
  for (size_t i = 0; i < runs.seeds.size(); ++i) {
    log_info("training segmenter for seed " + std::to_string(runs.seeds[i]));
    UNetSegmenter<float> seg =
        train_segmenter(a_train.images, a_train.masks, 20, runs.seeds[i]);
    MetricsReport full = evaluate_adaptation(seg, a_val, b_val,
                                             generator_translator(runs.full[i]->g_ba),
                                             runs.manifest.style_a, runs.manifest.spec);
    MetricsReport abl = evaluate_adaptation(seg, a_val, b_val,
                                            generator_translator(runs.ablate[i]->g_ba),
                                            runs.manifest.style_a, runs.manifest.spec);
    dice_vals.push_back(full.dice_val);
    dice_directs.push_back(full.dice_direct);
    dice_full.push_back(full.dice_translated);
    dice_ablate.push_back(abl.dice_translated);
    iou_full.push_back(full.content_iou_mean);
    iou_ablate.push_back(abl.content_iou_mean);
    const double gap = full.dice_val - full.dice_direct;
    recovery.push_back(gap > 0 ? (full.dice_translated - full.dice_direct) / gap : 0.0);
    log_info("seed " + std::to_string(runs.seeds[i]) + ": val " + fmt(full.dice_val) +
             " direct " + fmt(full.dice_direct) + " translated(full) " +
             fmt(full.dice_translated) + " translated(w/o D_MI) " + fmt(abl.dice_translated) +
             " iou " + fmt(full.content_iou_mean) + "/" + fmt(abl.content_iou_mean));
  }

  double max_secs = 0.0;
  for (double s : runs.full_secs) max_secs = std::max(max_secs, s);
  for (double s : runs.ablate_secs) max_secs = std::max(max_secs, s);

  const bool a = median(dice_vals) >= 0.90;
  const bool b = median(dice_vals) - median(dice_directs) >= 0.15;
  const bool c = median(recovery) >= 0.5;
  const bool d = median(dice_full) > median(dice_ablate) &&
                 median(dice_ablate) > median(dice_directs);
  const bool e = median(iou_full) >= median(iou_ablate);
  const bool t = max_secs <= 1800.0;
  report("criterion 5", a && b && c && d && e && t,
         "(a) val dice " + fmt(median(dice_vals)) + " >= 0.90: " + (a ? "yes" : "NO") +
             "; (b) direct-transfer drop " + fmt(median(dice_vals) - median(dice_directs)) +
             " >= 0.15: " + (b ? "yes" : "NO") + "; (c) recovery " + fmt(median(recovery)) +
             " >= 0.5: " + (c ? "yes" : "NO") + "; (d) ordering " + fmt(median(dice_full)) +
             " > " + fmt(median(dice_ablate)) + " > " + fmt(median(dice_directs)) + ": " +
             (d ? "yes" : "NO") + "; (e) content IoU " + fmt(median(iou_full)) + " >= " +
             fmt(median(iou_ablate)) + ": " + (e ? "yes" : "NO") + "; runs <= 30 min: " +
             (t ? "yes" : "NO") + " (max " + fmt(max_secs, 1) + "s)");
}

// fit example regression bounds tied to the desk-scale run
void regression_bounds(const TrainedRuns& runs) {
  bool adv_ok = true;
  bool dis_ok = true;
  std::string detail;
  for (size_t i = 0; i < runs.full.size(); ++i) {
    const auto& hist = runs.full[i]->history;
    const int64_t per_epoch = static_cast<int64_t>(hist.size()) / 30;
    double first_epoch = 0.0, last_epoch = 0.0;
    int64_t idx = 0;
    for (const auto& rec : hist) {
      adv_ok = adv_ok && rec.adv_g_ab >= 0.0 && rec.adv_g_ab <= 4.0 && rec.adv_g_ba >= 0.0 &&
               rec.adv_g_ba <= 4.0;
      const double dis = rec.dis_ab + rec.dis_ba;
      if (idx < per_epoch) first_epoch += dis;
      if (idx >= static_cast<int64_t>(hist.size()) - per_epoch) last_epoch += dis;
      ++idx;
    }
    first_epoch /= static_cast<double>(per_epoch);
    last_epoch /= static_cast<double>(per_epoch);
    dis_ok = dis_ok && last_epoch <= 0.5 * first_epoch;
    detail += "seed " + std::to_string(runs.seeds[i]) + " L_dis " + fmt(first_epoch) + "->" +
              fmt(last_epoch) + "; ";
  }
  report("regression (fit bounds)", adv_ok && dis_ok,
         "generator adv losses within [0,4] at every step: " + std::string(adv_ok ? "yes" : "NO") +
             "; distillation mean fell by >= 50% from epoch 1: " + (dis_ok ? "yes" : "NO") +
             " (" + detail + ")");
}

// criterion 7: determinism of the first 10 steps and checkpoint round trip
void criterion_7(const TrainedRuns& runs, const std::string& work) {
  TrainConfig cfg = desk_config(7, false);
  cfg.epochs = 1;
  TrainState<float> s1(cfg), s2(cfg);
  fit(s1, runs.manifest, work + "/det_run1");
  fit(s2, runs.manifest, work + "/det_run2");
  bool trace_ok = s1.history.size() >= 10 && s2.history.size() >= 10;
  for (size_t i = 0; i < 10 && trace_ok; ++i) {
    const LossRecord &r1 = s1.history[i], &r2 = s2.history[i];
    trace_ok = r1.total == r2.total && r1.adv_g_ab == r2.adv_g_ab &&
               r1.adv_g_ba == r2.adv_g_ba && r1.cyc == r2.cyc && r1.dis_ab == r2.dis_ab &&
               r1.dis_ba == r2.dis_ba && r1.mi_ab == r2.mi_ab && r1.mi_ba == r2.mi_ba &&
               r1.d_a == r2.d_a && r1.d_b == r2.d_b && r1.d_mi_bound == r2.d_mi_bound;
  }

  const std::string ck1 = work + "/ck1", ck2 = work + "/ck2";
  save_checkpoint(ck1, s1);
  TrainState<float> s3(cfg);
  load_checkpoint(ck1, s3);
  save_checkpoint(ck2, s3);
  bool bytes_ok = true;
  for (auto& [name, params] : s1.net_params()) {
    std::ifstream f1(ck1 + "/" + name + ".bin", std::ios::binary);
    std::ifstream f2(ck2 + "/" + name + ".bin", std::ios::binary);
    std::ostringstream b1, b2;
    b1 << f1.rdbuf();
    b2 << f2.rdbuf();
    bytes_ok = bytes_ok && b1.str() == b2.str() && !b1.str().empty();
  }
  report("criterion 7", trace_ok && bytes_ok,
         std::string("first-10-step loss trace bitwise identical across reruns: ") +
             (trace_ok ? "yes" : "NO") +
             "; checkpoint save/load/save parameter payloads byte-identical: " +
             (bytes_ok ? "yes" : "NO"));
}

// criterion 8: CAM encoder-agreement direction of effect over 20 scenes
void criterion_8(const TrainedRuns& runs) {
  TrainState<float>& st = *runs.full[0];
  NoGradGuard ng;
  std::vector<double> matched, mismatched;
  for (int64_t i = 0; i < 20; ++i) {
    Scene scene = gen_scene(mix_seed(888, 0xca6d0000ull + static_cast<uint64_t>(i)),
                            runs.manifest.spec);
    Tensor<float> img_a = render_domain(scene.content, runs.manifest.style_a);
    Tensor<float> img_b = render_domain(scene.content, runs.manifest.style_b);
    auto batch1 = [](const Tensor<float>& img) {
      return make_constant(img.reshaped({1, 3, img.dim(1), img.dim(2)}));
    };
    Tensor<float> heat_a = cam_heatmap(st.enc_a.forward(batch1(img_a))->value);
    Tensor<float> heat_b = cam_heatmap(st.enc_b.forward(batch1(img_b))->value);
    Tensor<float> heat_mis = cam_heatmap(st.enc_b.forward(batch1(img_a))->value);
    matched.push_back(ncc(heat_a, heat_b));
    mismatched.push_back(ncc(heat_a, heat_mis));
  }
  const double med_match = median(matched);
  const double med_mis = median(mismatched);
  report("criterion 8", med_match > med_mis,
         "matched-encoder CAM NCC median " + fmt(med_match) + " > mismatched " + fmt(med_mis) +
             " over 20 scenes");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> selected;
  for (int i = 1; i < argc; ++i) selected.insert(argv[i]);
  auto wanted = [&](const std::string& id) {
    return selected.empty() || selected.count(id) > 0;
  };

  const std::string work = "acceptance_workdir";
  fs::create_directories(work);

  if (wanted("2")) criterion_2();
  if (wanted("3")) criterion_3();
  if (wanted("6")) criterion_6();
  if (wanted("1")) criterion_1();

  const bool needs_runs = wanted("4") || wanted("5") || wanted("8") || wanted("r");
  if (needs_runs) {
    TrainedRuns runs = prepare_runs(work);
    if (wanted("4")) criterion_4(runs);
    if (wanted("5")) criterion_5(runs);
    if (wanted("r")) regression_bounds(runs);
    if (wanted("8")) criterion_8(runs);
    if (wanted("7")) criterion_7(runs, work);
  } else if (wanted("7")) {
    TrainedRuns runs;
    runs.data_dir = work + "/data";
    if (!fs::exists(runs.data_dir + "/manifest.json")) {
      SceneSpec spec;
      make_dataset(200, 12345, default_style_a(), default_style_b(), spec, runs.data_dir);
    }
    runs.manifest = load_manifest(runs.data_dir + "/manifest.json");
    criterion_7(runs, work);
  }

  int failures = 0;
  for (const auto& line : g_lines)
    if (!line.pass) ++failures;
  std::printf("%d/%zu checks passed\n", static_cast<int>(g_lines.size()) - failures,
              g_lines.size());
  return failures == 0 ? 0 : 1;
}
