#ifndef MI2GAN_TRAIN_CONFIG_HPP
#define MI2GAN_TRAIN_CONFIG_HPP

#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "mi2gan/core/common.hpp"

namespace mi2gan {

// Objective weights default to alpha = beta = 10 with the MI terms at
// weight 1.
struct TrainConfig {
  double alpha = 10.0;
  double beta = 10.0;
  double mi_weight = 1.0;
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  int64_t batch_size = 4;
  int64_t epochs = 30;
  int64_t image_size = 64;
  uint64_t seed = 1;
  bool ablate_mi = false;
  bool ablate_ae = false;
};

inline void validate_config(const TrainConfig& c) {
  check(c.lr_g > 0.0 && c.lr_d > 0.0, "config: learning rates must be > 0");
  check(c.batch_size > 0, "config: batch_size must be > 0");
  check(c.epochs >= 0, "config: epochs must be >= 0");
  check(c.image_size > 0 && c.image_size % 4 == 0,
        "config: image_size must be positive and divisible by 4");
  check(c.alpha >= 0.0 && c.beta >= 0.0 && c.mi_weight >= 0.0,
        "config: loss weights must be >= 0");
}

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValueError("config: boolean expected for " + key + ", got '" + v + "'");
}

inline std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat key = value file, '#' comments. Unknown keys are rejected.
inline TrainConfig parse_train_config_text(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    check(eq != std::string::npos,
          "config: expected key = value at line " + std::to_string(lineno));
    const std::string key = detail::strip(line.substr(0, eq));
    const std::string val = detail::strip(line.substr(eq + 1));
    try {
      if (key == "alpha") c.alpha = std::stod(val);
      else if (key == "beta") c.beta = std::stod(val);
      else if (key == "mi_weight") c.mi_weight = std::stod(val);
      else if (key == "lr_g") c.lr_g = std::stod(val);
      else if (key == "lr_d") c.lr_d = std::stod(val);
      else if (key == "batch_size") c.batch_size = std::stoll(val);
      else if (key == "epochs") c.epochs = std::stoll(val);
      else if (key == "image_size") c.image_size = std::stoll(val);
      else if (key == "seed") c.seed = std::stoull(val);
      else if (key == "ablate_mi") c.ablate_mi = detail::parse_bool(val, key);
      else if (key == "ablate_ae") c.ablate_ae = detail::parse_bool(val, key);
      else throw ValueError("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw ValueError("config: cannot parse value for '" + key + "': " + val);
    } catch (const std::out_of_range&) {
      throw ValueError("config: value out of range for '" + key + "': " + val);
    }
  }
  validate_config(c);
  return c;
}

inline TrainConfig parse_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_train_config_text(buf.str());
}

inline std::string config_to_key_values(const TrainConfig& c) {
  std::ostringstream os;
  os << "alpha = " << c.alpha << "\n";
  os << "beta = " << c.beta << "\n";
  os << "mi_weight = " << c.mi_weight << "\n";
  os << "lr_g = " << c.lr_g << "\n";
  os << "lr_d = " << c.lr_d << "\n";
  os << "batch_size = " << c.batch_size << "\n";
  os << "epochs = " << c.epochs << "\n";
  os << "image_size = " << c.image_size << "\n";
  os << "seed = " << c.seed << "\n";
  os << "ablate_mi = " << (c.ablate_mi ? "true" : "false") << "\n";
  os << "ablate_ae = " << (c.ablate_ae ? "true" : "false") << "\n";
  return os.str();
}

inline nlohmann::json config_to_json(const TrainConfig& c) {
  return nlohmann::json{{"alpha", c.alpha},
                        {"beta", c.beta},
                        {"mi_weight", c.mi_weight},
                        {"lr_g", c.lr_g},
                        {"lr_d", c.lr_d},
                        {"batch_size", c.batch_size},
                        {"epochs", c.epochs},
                        {"image_size", c.image_size},
                        {"seed", c.seed},
                        {"ablate_mi", c.ablate_mi},
                        {"ablate_ae", c.ablate_ae}};
}

// FNV-1a over the canonical JSON dump.
inline std::string config_hash(const TrainConfig& c) {
  const std::string dump = config_to_json(c).dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace mi2gan

#endif
