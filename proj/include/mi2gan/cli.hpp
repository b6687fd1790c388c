#ifndef MI2GAN_CLI_HPP
#define MI2GAN_CLI_HPP

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mi2gan/core/log.hpp"
#include "mi2gan/eval/adaptation.hpp"
#include "mi2gan/eval/cam.hpp"
#include "mi2gan/eval/degeneracy.hpp"
#include "mi2gan/mi/mi.hpp"
#include "mi2gan/train/trainer.hpp"

namespace mi2gan {

namespace cli_detail {

namespace fs = std::filesystem;

inline void write_resolved_config(const std::string& out_dir, const std::string& subcommand,
                                  nlohmann::json args) {
  fs::create_directories(out_dir);
  nlohmann::json j{{"subcommand", subcommand}, {"args", std::move(args)}, {"version", 1}};
  const std::string path = (fs::path(out_dir) / "resolved_config.json").string();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write resolved config: " + path);
  out << j.dump(2) << "\n";
}

inline TrainState<float> load_state_for_checkpoint(const std::string& checkpoint_dir,
                                                   int64_t image_size) {
  TrainConfig cfg;
  cfg.image_size = image_size;
  TrainState<float> st(cfg);
  load_checkpoint(checkpoint_dir, st);
  return st;
}

inline std::vector<std::pair<int64_t, double>> mi_trace_from_history(
    const std::string& history_path) {
  std::vector<std::pair<int64_t, double>> trace;
  std::ifstream in(history_path);
  if (!in) return trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const LossRecord rec = loss_record_from_json(nlohmann::json::parse(line));
      trace.emplace_back(rec.step, rec.mi_ab + rec.mi_ba);
    } catch (const std::exception&) {
      break;
    }
  }
  return trace;
}

struct SceneBatchOut {
  Tensor<float> images;
  Tensor<float> masks;
};

inline SceneBatchOut render_scene_batch(const DatasetManifest& m, const DomainStyle& style,
                                        uint64_t base_seed, int64_t n) {
  const int64_t h = m.spec.canvas_h, w = m.spec.canvas_w;
  SceneBatchOut out;
  out.images = Tensor<float>::uninitialized({n, 3, h, w});
  out.masks = Tensor<float>::uninitialized({n, 1, h, w});
  for (int64_t i = 0; i < n; ++i) {
    Scene scene = gen_scene(mix_seed(base_seed, 0xca6d0000ull + static_cast<uint64_t>(i)), m.spec);
    Tensor<float> img = render_domain(scene.content, style);
    std::copy(img.data(), img.data() + img.numel(), out.images.data() + i * 3 * h * w);
    std::copy(scene.mask.data(), scene.mask.data() + scene.mask.numel(),
              out.masks.data() + i * h * w);
  }
  return out;
}

}  // namespace cli_detail

// Single dispatch point for all subcommands. Returns the process exit code:
// 0 success, 1 usage error, 2 runtime failure.
inline int run_cli(std::vector<std::string> args) {
  namespace fs = std::filesystem;
  CLI::App app{"content-preserving unpaired image-to-image translation"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a two-domain synthetic dataset");
  int64_t synth_n = 200;
  uint64_t synth_seed = 12345;
  int64_t synth_size = 64;
  std::string synth_out;
  synth->add_option("--n", synth_n, "samples per domain");
  synth->add_option("--seed", synth_seed, "dataset seed");
  synth->add_option("--size", synth_size, "canvas size in pixels");
  synth->add_option("--out", synth_out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train the translation networks");
  std::string train_config, train_data, train_out, train_resume;
  uint64_t train_seed = 0;
  int64_t train_epochs = -1;
  bool train_ablate_mi = false, train_ablate_ae = false;
  train->add_option("--config", train_config, "key = value config file")->required();
  train->add_option("--data", train_data, "dataset manifest path")->required();
  train->add_option("--out", train_out, "output directory")->required();
  auto* opt_seed = train->add_option("--seed", train_seed, "override config seed");
  auto* opt_epochs = train->add_option("--epochs", train_epochs, "override config epochs");
  train->add_flag("--ablate-mi", train_ablate_mi, "disable the MI terms");
  train->add_flag("--ablate-ae", train_ablate_ae, "disable the auto-encoder terms");
  train->add_option("--checkpoint", train_resume, "resume from this checkpoint directory");

  // translate
  auto* translate = app.add_subcommand("translate", "translate validation images");
  std::string tr_ckpt, tr_data, tr_out, tr_direction = "ba";
  translate->add_option("--checkpoint", tr_ckpt, "checkpoint directory")->required();
  translate->add_option("--data", tr_data, "dataset manifest path")->required();
  translate->add_option("--out", tr_out, "output directory")->required();
  translate->add_option("--direction", tr_direction, "ab or ba (default ba)");

  // eval
  auto* eval = app.add_subcommand("eval", "run the adaptation evaluation protocol");
  std::string ev_ckpt, ev_data, ev_out;
  uint64_t ev_seed = 1;
  int64_t ev_epochs = 20;
  eval->add_option("--checkpoint", ev_ckpt, "checkpoint directory")->required();
  eval->add_option("--data", ev_data, "dataset manifest path")->required();
  eval->add_option("--out", ev_out, "output directory")->required();
  eval->add_option("--seed", ev_seed, "segmenter training seed");
  eval->add_option("--epochs", ev_epochs, "segmenter training epochs");

  // cam
  auto* cam = app.add_subcommand("cam", "content-feature heat maps and encoder agreement");
  std::string cam_ckpt, cam_data, cam_out;
  uint64_t cam_seed = 7;
  int64_t cam_n = 20;
  cam->add_option("--checkpoint", cam_ckpt, "checkpoint directory")->required();
  cam->add_option("--data", cam_data, "dataset manifest path")->required();
  cam->add_option("--out", cam_out, "output directory")->required();
  cam->add_option("--seed", cam_seed, "scene seed");
  cam->add_option("--n", cam_n, "number of paired scenes");

  // demo-degeneracy
  auto* demo = app.add_subcommand("demo-degeneracy",
                                  "cycle-consistency degeneracy demonstration");
  std::string de_ckpt, de_data, de_out, de_transform = "shift8";
  int64_t de_n = 8;
  demo->add_option("--checkpoint", de_ckpt, "checkpoint directory")->required();
  demo->add_option("--data", de_data, "dataset manifest path")->required();
  demo->add_option("--out", de_out, "output directory")->required();
  demo->add_option("--transform", de_transform, "hflip|vflip|rot90|shift8");
  demo->add_option("--n", de_n, "validation images to use");

  // estimate-mi
  auto* emi = app.add_subcommand("estimate-mi", "standalone MI estimation on Gaussians");
  double emi_rho = 0.9, emi_lr = 5e-4;
  int64_t emi_steps = 5000, emi_batch = 256, emi_hidden = 64;
  uint64_t emi_seed = 1;
  std::string emi_out;
  emi->add_option("--rho", emi_rho, "correlation of the Gaussian pair");
  emi->add_option("--steps", emi_steps, "training steps");
  emi->add_option("--batch", emi_batch, "batch size");
  emi->add_option("--lr", emi_lr, "critic learning rate");
  emi->add_option("--seed", emi_seed, "seed");
  emi->add_option("--hidden", emi_hidden, "critic hidden width");
  emi->add_option("--out", emi_out, "output directory (optional)");

  std::vector<const char*> argv;
  argv.push_back("mi2gan");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      SceneSpec spec;
      spec.canvas_h = synth_size;
      spec.canvas_w = synth_size;
      DatasetManifest m =
          make_dataset(synth_n, synth_seed, default_style_a(), default_style_b(), spec, synth_out);
      cli_detail::write_resolved_config(
          synth_out, "synth",
          nlohmann::json{{"n", synth_n}, {"seed", synth_seed}, {"size", synth_size},
                         {"out", synth_out}});
      log_info("wrote " + std::to_string(m.samples.size()) + " samples to " + synth_out);
      std::cout << (fs::path(synth_out) / "manifest.json").string() << "\n";
      return 0;
    }

    if (train->parsed()) {
      TrainConfig cfg = parse_train_config(train_config);
      if (opt_seed->count() > 0) cfg.seed = train_seed;
      if (opt_epochs->count() > 0) cfg.epochs = train_epochs;
      if (train_ablate_mi) cfg.ablate_mi = true;
      if (train_ablate_ae) cfg.ablate_ae = true;
      DatasetManifest manifest = load_manifest(train_data);
      cfg.image_size = manifest.spec.canvas_h;
      validate_config(cfg);
      TrainState<float> st(cfg);
      bool resumed = false;
      if (!train_resume.empty()) {
        load_checkpoint(train_resume, st);
        resumed = true;
        log_info("resumed from " + train_resume + " at step " + std::to_string(st.step));
      }
      cli_detail::write_resolved_config(
          train_out, "train",
          nlohmann::json{{"config", config_to_json(cfg)},
                         {"config_hash", config_hash(cfg)},
                         {"data", train_data},
                         {"out", train_out},
                         {"resumed_from", train_resume}});
      fit(st, manifest, train_out, resumed);
      log_info("training finished at step " + std::to_string(st.step));
      return 0;
    }

    if (translate->parsed()) {
      check(tr_direction == "ab" || tr_direction == "ba",
            "translate: --direction must be ab or ba");
      DatasetManifest manifest = load_manifest(tr_data);
      TrainState<float> st =
          cli_detail::load_state_for_checkpoint(tr_ckpt, manifest.spec.canvas_h);
      const std::string src_domain = tr_direction == "ba" ? "B" : "A";
      DomainData data = load_split(manifest, src_domain, "val");
      Translator t = tr_direction == "ba" ? generator_translator(st.g_ba)
                                          : generator_translator(st.g_ab);
      Tensor<float> translated = t(data.images);
      fs::create_directories(tr_out);
      const int64_t h = translated.dim(2), w = translated.dim(3);
      for (int64_t i = 0; i < translated.dim(0); ++i) {
        Tensor<float> img = Tensor<float>::uninitialized({3, h, w});
        std::copy(translated.data() + i * 3 * h * w, translated.data() + (i + 1) * 3 * h * w,
                  img.data());
        char name[64];
        std::snprintf(name, sizeof(name), "translated_%s_%04lld.png", tr_direction.c_str(),
                      static_cast<long long>(i));
        write_image_png((fs::path(tr_out) / name).string(), img);
      }
      cli_detail::write_resolved_config(
          tr_out, "translate",
          nlohmann::json{{"checkpoint", tr_ckpt}, {"data", tr_data}, {"out", tr_out},
                         {"direction", tr_direction}});
      log_info("translated " + std::to_string(translated.dim(0)) + " images");
      return 0;
    }

    if (eval->parsed()) {
      DatasetManifest manifest = load_manifest(ev_data);
      TrainState<float> st =
          cli_detail::load_state_for_checkpoint(ev_ckpt, manifest.spec.canvas_h);
      DomainData a_train = load_split(manifest, "A", "train");
      DomainData a_val = load_split(manifest, "A", "val");
      DomainData b_val = load_split(manifest, "B", "val");
      log_info("training segmenter (" + std::to_string(ev_epochs) + " epochs)");
      UNetSegmenter<float> seg =
          train_segmenter(a_train.images, a_train.masks, ev_epochs, ev_seed);
      MetricsReport report = evaluate_adaptation(
          seg, a_val, b_val, generator_translator(st.g_ba), manifest.style_a, manifest.spec,
          config_hash(st.cfg));
      report.mi_bound_trace = cli_detail::mi_trace_from_history(
          (fs::path(ev_ckpt).parent_path() / "history.jsonl").string());
      fs::create_directories(ev_out);
      const std::string metrics_path = (fs::path(ev_out) / "metrics.json").string();
      std::ofstream mout(metrics_path);
      if (!mout) throw IoError("cannot write " + metrics_path);
      mout << metrics_report_to_json(report).dump(2) << "\n";
      cli_detail::write_resolved_config(
          ev_out, "eval",
          nlohmann::json{{"checkpoint", ev_ckpt}, {"data", ev_data}, {"out", ev_out},
                         {"seed", ev_seed}, {"epochs", ev_epochs}});
      std::cout << metrics_report_to_json(report).dump(2) << "\n";
      return 0;
    }

    if (cam->parsed()) {
      DatasetManifest manifest = load_manifest(cam_data);
      TrainState<float> st =
          cli_detail::load_state_for_checkpoint(cam_ckpt, manifest.spec.canvas_h);
      NoGradGuard ng;
      std::vector<double> matched, mismatched;
      fs::create_directories(cam_out);
      for (int64_t i = 0; i < cam_n; ++i) {
        Scene scene =
            gen_scene(mix_seed(cam_seed, 0xca6d0000ull + static_cast<uint64_t>(i)), manifest.spec);
        Tensor<float> img_a = render_domain(scene.content, manifest.style_a);
        Tensor<float> img_b = render_domain(scene.content, manifest.style_b);
        auto batch1 = [&](const Tensor<float>& img) {
          return make_constant(img.reshaped({1, 3, img.dim(1), img.dim(2)}));
        };
        Tensor<float> heat_a = cam_heatmap(st.enc_a.forward(batch1(img_a))->value);
        Tensor<float> heat_b = cam_heatmap(st.enc_b.forward(batch1(img_b))->value);
        Tensor<float> heat_mis = cam_heatmap(st.enc_b.forward(batch1(img_a))->value);
        matched.push_back(ncc(heat_a, heat_b));
        mismatched.push_back(ncc(heat_a, heat_mis));
        if (i < 4) {
          const std::string stem = (fs::path(cam_out) / ("scene" + std::to_string(i))).string();
          write_image_png(stem + "_a.png", img_a);
          write_image_png(stem + "_b.png", img_b);
          write_heatmap_png(stem + "_cam_enc_a.png", heat_a);
          write_heatmap_png(stem + "_cam_enc_b.png", heat_b);
          write_heatmap_png(stem + "_cam_mismatched.png", heat_mis);
        }
      }
      nlohmann::json summary{{"matched_ncc", matched},
                             {"mismatched_ncc", mismatched},
                             {"matched_median", median(matched)},
                             {"mismatched_median", median(mismatched)}};
      std::ofstream sout((fs::path(cam_out) / "cam_summary.json").string());
      sout << summary.dump(2) << "\n";
      cli_detail::write_resolved_config(
          cam_out, "cam",
          nlohmann::json{{"checkpoint", cam_ckpt}, {"data", cam_data}, {"out", cam_out},
                         {"seed", cam_seed}, {"n", cam_n}});
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (demo->parsed()) {
      DatasetManifest manifest = load_manifest(de_data);
      TrainState<float> st =
          cli_detail::load_state_for_checkpoint(de_ckpt, manifest.spec.canvas_h);
      PermTransform t = parse_transform(de_transform);
      DomainData a_val = load_split(manifest, "A", "val");
      DomainData b_val = load_split(manifest, "B", "val");
      const int64_t n = std::min<int64_t>(de_n, std::min(a_val.count, b_val.count));
      std::vector<int64_t> idx;
      for (int64_t i = 0; i < n; ++i) idx.push_back(i);
      Tensor<float> imgs_a = gather_batch(a_val.images, idx);
      Tensor<float> masks_a = gather_batch(a_val.masks, idx);
      Tensor<float> imgs_b = gather_batch(b_val.images, idx);
      DegeneracyReport rep = degeneracy_demo(st.g_ab, st.g_ba, t, imgs_a, masks_a, imgs_b,
                                             manifest.style_b, manifest.spec);
      fs::create_directories(de_out);
      std::ofstream rout((fs::path(de_out) / "degeneracy_report.json").string());
      rout << degeneracy_report_to_json(rep).dump(2) << "\n";

      // side-by-side grid: input, G_AB, T∘G_AB, original and modified cycles
      NoGradGuard ng;
      Tensor<float> fake_b = st.g_ab.forward(make_constant(imgs_a))->value;
      Tensor<float> fake_b_mod = apply_transform(t, fake_b);
      Tensor<float> rec = st.g_ba.forward(make_constant(fake_b))->value;
      Tensor<float> rec_mod =
          st.g_ba.forward(make_constant(apply_inverse_transform(t, fake_b_mod)))->value;
      std::vector<Tensor<float>> tiles;
      const int64_t h = imgs_a.dim(2), w = imgs_a.dim(3);
      const int64_t rows = std::min<int64_t>(n, 4);
      for (int64_t i = 0; i < rows; ++i) {
        for (const Tensor<float>* pool : {&imgs_a, &fake_b, &fake_b_mod, &rec, &rec_mod}) {
          Tensor<float> img = Tensor<float>::uninitialized({3, h, w});
          std::copy(pool->data() + i * 3 * h * w, pool->data() + (i + 1) * 3 * h * w, img.data());
          tiles.push_back(std::move(img));
        }
      }
      write_grid_png((fs::path(de_out) / "degeneracy_grid.png").string(), tiles, 5);
      cli_detail::write_resolved_config(
          de_out, "demo-degeneracy",
          nlohmann::json{{"checkpoint", de_ckpt}, {"data", de_data}, {"out", de_out},
                         {"transform", de_transform}, {"n", de_n}});
      std::cout << degeneracy_report_to_json(rep).dump(2) << "\n";
      return 0;
    }

    if (emi->parsed()) {
      Rng rng(emi_seed);
      MlpCritic<float> critic(2, emi_hidden, rng);
      auto sampler = gaussian_pair_sampler<float>(emi_rho, rng);
      MIEstimate est = estimate_mi(sampler, critic, emi_steps, emi_lr, emi_batch);
      nlohmann::json result{{"rho", emi_rho},
                            {"estimate_nats", est.nats},
                            {"oracle_nats", gaussian_mi_oracle(emi_rho)},
                            {"diverged", est.diverged}};
      if (!emi_out.empty()) {
        fs::create_directories(emi_out);
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& [step, bound] : est.trace)
          trace.push_back(nlohmann::json{{"step", step}, {"bound_nats", bound}});
        std::ofstream tout((fs::path(emi_out) / "mi_trace.json").string());
        tout << trace.dump(2) << "\n";
        std::ofstream rout((fs::path(emi_out) / "mi_result.json").string());
        rout << result.dump(2) << "\n";
        cli_detail::write_resolved_config(
            emi_out, "estimate-mi",
            nlohmann::json{{"rho", emi_rho}, {"steps", emi_steps}, {"batch", emi_batch},
                           {"lr", emi_lr}, {"seed", emi_seed}, {"hidden", emi_hidden},
                           {"out", emi_out}});
      }
      std::cout << result.dump(2) << "\n";
      return 0;
    }
  } catch (const ValueError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace mi2gan

#endif
