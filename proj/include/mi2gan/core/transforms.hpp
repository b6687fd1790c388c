#ifndef MI2GAN_CORE_TRANSFORMS_HPP
#define MI2GAN_CORE_TRANSFORMS_HPP

#include <algorithm>
#include <cmath>

#include "mi2gan/core/tensor.hpp"

namespace mi2gan {

// Pixel-permutation transforms on NCHW tensors. All are exact bijections of
// the spatial grid, so values move without arithmetic.

template <typename T>
Tensor<T> hflip(const Tensor<T>& x) {
  check(x.rank() == 4, "hflip: rank-4 input required");
  Tensor<T> out = Tensor<T>::uninitialized(x.shape());
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  for (int64_t i = 0; i < n * c; ++i) {
    const T* xi = x.data() + i * h * w;
    T* oi = out.data() + i * h * w;
    for (int64_t y = 0; y < h; ++y)
      for (int64_t xc = 0; xc < w; ++xc) oi[y * w + xc] = xi[y * w + (w - 1 - xc)];
  }
  return out;
}

template <typename T>
Tensor<T> vflip(const Tensor<T>& x) {
  check(x.rank() == 4, "vflip: rank-4 input required");
  Tensor<T> out = Tensor<T>::uninitialized(x.shape());
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  for (int64_t i = 0; i < n * c; ++i) {
    const T* xi = x.data() + i * h * w;
    T* oi = out.data() + i * h * w;
    for (int64_t y = 0; y < h; ++y)
      std::copy(xi + (h - 1 - y) * w, xi + (h - y) * w, oi + y * w);
  }
  return out;
}

// Counter-clockwise quarter turn; requires a square spatial grid.
template <typename T>
Tensor<T> rot90(const Tensor<T>& x) {
  check(x.rank() == 4, "rot90: rank-4 input required");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  check(h == w, "rot90: square spatial grid required");
  Tensor<T> out = Tensor<T>::uninitialized(x.shape());
  for (int64_t i = 0; i < n * c; ++i) {
    const T* xi = x.data() + i * h * w;
    T* oi = out.data() + i * h * w;
    for (int64_t y = 0; y < h; ++y)
      for (int64_t xc = 0; xc < w; ++xc) oi[(w - 1 - xc) * h + y] = xi[y * w + xc];
  }
  return out;
}

// Clockwise quarter turn (inverse of rot90).
template <typename T>
Tensor<T> rot270(const Tensor<T>& x) {
  check(x.rank() == 4, "rot270: rank-4 input required");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  check(h == w, "rot270: square spatial grid required");
  Tensor<T> out = Tensor<T>::uninitialized(x.shape());
  for (int64_t i = 0; i < n * c; ++i) {
    const T* xi = x.data() + i * h * w;
    T* oi = out.data() + i * h * w;
    for (int64_t y = 0; y < h; ++y)
      for (int64_t xc = 0; xc < w; ++xc) oi[xc * h + (h - 1 - y)] = xi[y * w + xc];
  }
  return out;
}

// Wraparound shift by (dy, dx): out(y, x) = in((y - dy) mod h, (x - dx) mod w).
template <typename T>
Tensor<T> roll(const Tensor<T>& x, int64_t dy, int64_t dx) {
  check(x.rank() == 4, "roll: rank-4 input required");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor<T> out = Tensor<T>::uninitialized(x.shape());
  const auto mod = [](int64_t a, int64_t m) { return ((a % m) + m) % m; };
  for (int64_t i = 0; i < n * c; ++i) {
    const T* xi = x.data() + i * h * w;
    T* oi = out.data() + i * h * w;
    for (int64_t y = 0; y < h; ++y) {
      const int64_t sy = mod(y - dy, h);
      for (int64_t xc = 0; xc < w; ++xc) oi[y * w + xc] = xi[sy * w + mod(xc - dx, w)];
    }
  }
  return out;
}

// Bilinear resize of a single-channel (h, w) map, half-pixel centers.
template <typename T>
Tensor<T> bilinear_resize_map(const Tensor<T>& src, int64_t out_h, int64_t out_w) {
  check(src.rank() == 2, "bilinear_resize_map: rank-2 input required");
  const int64_t h = src.dim(0), w = src.dim(1);
  check(h > 0 && w > 0 && out_h > 0 && out_w > 0, "bilinear_resize_map: empty extent");
  Tensor<T> out = Tensor<T>::uninitialized({out_h, out_w});
  const double sy = static_cast<double>(h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(w) / static_cast<double>(out_w);
  for (int64_t y = 0; y < out_h; ++y) {
    double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const int64_t y0 = static_cast<int64_t>(std::floor(fy));
    const int64_t y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - static_cast<double>(y0);
    for (int64_t x = 0; x < out_w; ++x) {
      double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
      const int64_t x0 = static_cast<int64_t>(std::floor(fx));
      const int64_t x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - static_cast<double>(x0);
      const double v00 = static_cast<double>(src[y0 * w + x0]);
      const double v01 = static_cast<double>(src[y0 * w + x1]);
      const double v10 = static_cast<double>(src[y1 * w + x0]);
      const double v11 = static_cast<double>(src[y1 * w + x1]);
      out[y * out_w + x] = static_cast<T>((1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) +
                                          wy * ((1.0 - wx) * v10 + wx * v11));
    }
  }
  return out;
}

// Min-max normalization to [0, 1]; constant input maps to all zeros.
template <typename T>
Tensor<T> minmax01(const Tensor<T>& x) {
  Tensor<T> out(x.shape());
  if (x.numel() == 0) return out;
  T lo = x[0], hi = x[0];
  for (int64_t i = 1; i < x.numel(); ++i) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  if (range <= 0.0) return out;  // zero-range convention
  for (int64_t i = 0; i < x.numel(); ++i)
    out[i] = static_cast<T>((static_cast<double>(x[i]) - static_cast<double>(lo)) / range);
  return out;
}

}  // namespace mi2gan

#endif
