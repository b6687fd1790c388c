#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "mi2gan/cli.hpp"

using namespace mi2gan;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("mi2gan_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json load_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  REQUIRE(run_cli({"--no-such-flag"}) == 1);
  REQUIRE(run_cli({"synth"}) == 1);                 // missing required --out
  REQUIRE(run_cli({"frobnicate", "--out", "x"}) == 1);
  REQUIRE(run_cli({}) == 1);
}

TEST_CASE("runtime failures exit with code 2") {
  const std::string out = temp_dir("rt");
  REQUIRE(run_cli({"train", "--config", "/nonexistent.cfg", "--data", "/nonexistent.json",
                   "--out", out}) == 2);
  fs::remove_all(out);
}

TEST_CASE("synth writes 2n samples, a manifest, and a resolved config") {
  const std::string out = temp_dir("synth");
  REQUIRE(run_cli({"synth", "--n", "6", "--seed", "11", "--out", out}) == 0);
  nlohmann::json manifest = load_json(out + "/manifest.json");
  REQUIRE(manifest.at("samples").size() == 12);
  REQUIRE(manifest.at("version").get<int>() == 1);
  nlohmann::json resolved = load_json(out + "/resolved_config.json");
  REQUIRE(resolved.at("subcommand") == "synth");
  REQUIRE(resolved.at("args").at("seed") == 11);

  // rerunnable: identical argv + seed produce identical manifests
  const std::string out2 = temp_dir("synth2");
  REQUIRE(run_cli({"synth", "--n", "6", "--seed", "11", "--out", out2}) == 0);
  REQUIRE(slurp(out + "/manifest.json") == slurp(out2 + "/manifest.json"));
  fs::remove_all(out);
  fs::remove_all(out2);
}

TEST_CASE("end-to-end train, ablation history, translate, eval, cam, demo") {
  const std::string base = temp_dir("e2e");
  const std::string data = base + "/data";
  REQUIRE(run_cli({"synth", "--n", "8", "--seed", "21", "--size", "32", "--out", data}) == 0);

  const std::string cfg_path = base + "/train.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "epochs = 1\nbatch_size = 2\nseed = 5\nimage_size = 32\n";
  }

  SECTION("ablated training zeroes the mi terms in every history record") {
    const std::string run = base + "/run_ablate";
    REQUIRE(run_cli({"train", "--config", cfg_path, "--data", data + "/manifest.json", "--out",
                     run, "--ablate-mi"}) == 0);
    std::ifstream hist(run + "/history.jsonl");
    std::string line;
    int64_t lines = 0;
    while (std::getline(hist, line)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line);
      REQUIRE(j.at("mi_ab").get<double>() == 0.0);
      REQUIRE(j.at("mi_ba").get<double>() == 0.0);
      ++lines;
    }
    REQUIRE(lines == 3);  // 6 train images per domain, batch 2
    nlohmann::json resolved = load_json(run + "/resolved_config.json");
    REQUIRE(resolved.at("args").at("config").at("ablate_mi").get<bool>());
  }

  SECTION("full pipeline on a tiny run") {
    const std::string run = base + "/run";
    REQUIRE(run_cli({"train", "--config", cfg_path, "--data", data + "/manifest.json", "--out",
                     run}) == 0);
    REQUIRE(fs::exists(run + "/checkpoint/manifest.json"));

    const std::string tr = base + "/translated";
    REQUIRE(run_cli({"translate", "--checkpoint", run + "/checkpoint", "--data",
                     data + "/manifest.json", "--out", tr}) == 0);
    REQUIRE(fs::exists(tr + "/translated_ba_0000.png"));
    REQUIRE(fs::exists(tr + "/resolved_config.json"));

    const std::string ev = base + "/eval";
    REQUIRE(run_cli({"eval", "--checkpoint", run + "/checkpoint", "--data",
                     data + "/manifest.json", "--out", ev, "--epochs", "1", "--seed", "2"}) == 0);
    nlohmann::json metrics = load_json(ev + "/metrics.json");
    for (const char* key : {"dice_val", "dice_direct", "dice_translated"}) {
      const double v = metrics.at(key).get<double>();
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }

    const std::string cam = base + "/cam";
    REQUIRE(run_cli({"cam", "--checkpoint", run + "/checkpoint", "--data",
                     data + "/manifest.json", "--out", cam, "--n", "4"}) == 0);
    nlohmann::json summary = load_json(cam + "/cam_summary.json");
    REQUIRE(summary.at("matched_ncc").size() == 4);

    const std::string demo = base + "/demo";
    REQUIRE(run_cli({"demo-degeneracy", "--checkpoint", run + "/checkpoint", "--data",
                     data + "/manifest.json", "--out", demo, "--transform", "hflip", "--n",
                     "2"}) == 0);
    nlohmann::json rep = load_json(demo + "/degeneracy_report.json");
    REQUIRE(rep.at("a_cycle_bitwise_equal").get<bool>());
    REQUIRE(fs::exists(demo + "/degeneracy_grid.png"));

    REQUIRE(run_cli({"demo-degeneracy", "--checkpoint", run + "/checkpoint", "--data",
                     data + "/manifest.json", "--out", demo, "--transform", "zoom"}) == 2);
  }

  fs::remove_all(base);
}

TEST_CASE("estimate-mi runs standalone and writes a trace when asked") {
  const std::string out = temp_dir("emi");
  REQUIRE(run_cli({"estimate-mi", "--rho", "0.5", "--steps", "60", "--batch", "64", "--out",
                   out}) == 0);
  nlohmann::json result = load_json(out + "/mi_result.json");
  REQUIRE(result.at("rho").get<double>() == 0.5);
  REQUIRE(result.contains("estimate_nats"));
  REQUIRE(result.at("oracle_nats").get<double>() ==
          Catch::Approx(-0.5 * std::log(0.75)).epsilon(1e-12));
  nlohmann::json trace = load_json(out + "/mi_trace.json");
  REQUIRE(trace.is_array());
  REQUIRE(trace.size() >= 1);
  REQUIRE(trace[0].contains("step"));
  REQUIRE(trace[0].contains("bound_nats"));
  fs::remove_all(out);
}
