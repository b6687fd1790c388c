#ifndef MI2GAN_TRAIN_CHECKPOINT_HPP
#define MI2GAN_TRAIN_CHECKPOINT_HPP

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mi2gan/nn/module.hpp"

namespace mi2gan {

// Binary array blob: for each named array a record of
//   u32 name length, name bytes, u32 ndim, i64 dims..., raw element data.
// All integers and elements little-endian (written as host memory; the
// artifact targets little-endian platforms).

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
void write_blob(const std::string& path, const std::vector<NamedTensor<T>>& arrays) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open blob for writing: " + path);
  for (const auto& a : arrays) {
    const uint32_t name_len = static_cast<uint32_t>(a.name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(a.name.data(), static_cast<std::streamsize>(name_len));
    const uint32_t ndim = static_cast<uint32_t>(a.tensor.rank());
    out.write(reinterpret_cast<const char*>(&ndim), sizeof(ndim));
    for (int64_t i = 0; i < a.tensor.rank(); ++i) {
      const int64_t d = a.tensor.dim(i);
      out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    }
    out.write(reinterpret_cast<const char*>(a.tensor.data()),
              static_cast<std::streamsize>(a.tensor.numel() * static_cast<int64_t>(sizeof(T))));
  }
  if (!out.good()) throw IoError("failed writing blob: " + path);
}

template <typename T>
std::vector<NamedTensor<T>> read_blob(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open blob: " + path);
  std::vector<NamedTensor<T>> arrays;
  while (true) {
    uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (in.eof()) break;
    if (!in.good() || name_len > 4096) throw IoError("corrupt blob: " + path);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    uint32_t ndim = 0;
    in.read(reinterpret_cast<char*>(&ndim), sizeof(ndim));
    if (!in.good() || ndim > 8) throw IoError("corrupt blob: " + path);
    std::vector<int64_t> dims(ndim);
    for (auto& d : dims) in.read(reinterpret_cast<char*>(&d), sizeof(d));
    if (!in.good()) throw IoError("corrupt blob: " + path);
    Tensor<T> t = Tensor<T>::uninitialized(dims);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * static_cast<int64_t>(sizeof(T))));
    if (!in.good()) throw IoError("corrupt blob (truncated data): " + path);
    arrays.push_back({std::move(name), std::move(t)});
  }
  return arrays;
}

template <typename T>
void save_params_blob(const std::string& path, const ParamList<T>& params) {
  std::vector<NamedTensor<T>> arrays;
  arrays.reserve(params.size());
  for (const auto& p : params) arrays.push_back({p.name, p.var->value});
  write_blob(path, arrays);
}

// Loads parameter values in place; names and shapes must match exactly.
template <typename T>
void load_params_blob(const std::string& path, ParamList<T>& params) {
  auto arrays = read_blob<T>(path);
  check(arrays.size() == params.size(),
        "blob " + path + ": expected " + std::to_string(params.size()) + " arrays, found " +
            std::to_string(arrays.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    check(arrays[i].name == params[i].name,
          "blob " + path + ": array '" + arrays[i].name + "' where '" + params[i].name +
              "' expected");
    check(arrays[i].tensor.same_shape(params[i].var->value),
          "blob " + path + ": shape mismatch for " + params[i].name);
    std::copy(arrays[i].tensor.data(), arrays[i].tensor.data() + arrays[i].tensor.numel(),
              params[i].var->value.data());
  }
}

// Adam moments serialized next to the parameters they belong to.
template <typename T>
void save_adam_blob(const std::string& path, Adam<T>& opt) {
  std::vector<NamedTensor<T>> arrays;
  arrays.push_back({"adam.t", Tensor<T>::full({1}, static_cast<T>(opt.steps_taken()))});
  const auto& params = opt.params();
  for (size_t i = 0; i < params.size(); ++i) {
    arrays.push_back({params[i].name + ".m", opt.moments_m()[i]});
    arrays.push_back({params[i].name + ".v", opt.moments_v()[i]});
  }
  write_blob(path, arrays);
}

template <typename T>
void load_adam_blob(const std::string& path, Adam<T>& opt) {
  auto arrays = read_blob<T>(path);
  const auto& params = opt.params();
  check(arrays.size() == 1 + 2 * params.size(), "adam blob " + path + ": wrong array count");
  check(arrays[0].name == "adam.t", "adam blob " + path + ": missing step counter");
  opt.set_steps_taken(static_cast<int64_t>(arrays[0].tensor[0]));
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& m = arrays[1 + 2 * i];
    const auto& v = arrays[2 + 2 * i];
    check(m.name == params[i].name + ".m" && v.name == params[i].name + ".v",
          "adam blob " + path + ": name mismatch at " + params[i].name);
    check(m.tensor.same_shape(opt.moments_m()[i]) && v.tensor.same_shape(opt.moments_v()[i]),
          "adam blob " + path + ": moment shape mismatch at " + params[i].name);
    std::copy(m.tensor.data(), m.tensor.data() + m.tensor.numel(), opt.moments_m()[i].data());
    std::copy(v.tensor.data(), v.tensor.data() + v.tensor.numel(), opt.moments_v()[i].data());
  }
}

}  // namespace mi2gan

#endif
