#ifndef MI2GAN_CORE_IMAGE_HPP
#define MI2GAN_CORE_IMAGE_HPP

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <string>

#include "mi2gan/core/tensor.hpp"

namespace mi2gan {

// Images cross the filesystem boundary as 8-bit PNGs; in memory they are
// (3, h, w) float tensors in [-1, 1], RGB channel order.

inline cv::Mat tensor_to_mat8(const Tensor<float>& img) {
  check(img.rank() == 3 && img.dim(0) == 3, "tensor_to_mat8: (3, h, w) tensor required");
  const int h = static_cast<int>(img.dim(1));
  const int w = static_cast<int>(img.dim(2));
  cv::Mat mat(h, w, CV_8UC3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto& px = mat.at<cv::Vec3b>(y, x);
      for (int c = 0; c < 3; ++c) {
        const float v = img[(c * h + y) * w + x];
        const float u = std::round((v + 1.0f) * 127.5f);
        // BGR on the cv side
        px[2 - c] = static_cast<unsigned char>(std::clamp(u, 0.0f, 255.0f));
      }
    }
  }
  return mat;
}

inline Tensor<float> mat8_to_tensor(const cv::Mat& mat) {
  check(mat.type() == CV_8UC3, "mat8_to_tensor: 8UC3 mat required");
  const int h = mat.rows, w = mat.cols;
  Tensor<float> img({3, h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto& px = mat.at<cv::Vec3b>(y, x);
      for (int c = 0; c < 3; ++c) {
        img[(c * h + y) * w + x] = static_cast<float>(px[2 - c]) / 127.5f - 1.0f;
      }
    }
  }
  return img;
}

inline void write_image_png(const std::string& path, const Tensor<float>& img) {
  if (!cv::imwrite(path, tensor_to_mat8(img))) {
    throw IoError("failed to write image: " + path);
  }
}

// Reads a PNG/JPEG as a (3, h, w) tensor in [-1, 1], optionally resized.
inline Tensor<float> read_image(const std::string& path, int64_t out_h = 0, int64_t out_w = 0) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_COLOR);
  if (mat.empty()) throw IoError("failed to decode image: " + path);
  if (out_h > 0 && out_w > 0 && (mat.rows != out_h || mat.cols != out_w)) {
    cv::Mat resized;
    cv::resize(mat, resized, cv::Size(static_cast<int>(out_w), static_cast<int>(out_h)), 0, 0,
               cv::INTER_AREA);
    mat = resized;
  }
  return mat8_to_tensor(mat);
}

// Binary masks are stored as 8-bit grayscale PNGs with values {0, 255}.
inline void write_mask_png(const std::string& path, const Tensor<float>& mask) {
  check(mask.rank() == 2, "write_mask_png: (h, w) mask required");
  const int h = static_cast<int>(mask.dim(0));
  const int w = static_cast<int>(mask.dim(1));
  cv::Mat mat(h, w, CV_8UC1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      mat.at<unsigned char>(y, x) = mask[y * w + x] > 0.5f ? 255 : 0;
  if (!cv::imwrite(path, mat)) throw IoError("failed to write mask: " + path);
}

inline Tensor<float> read_mask_png(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (mat.empty()) throw IoError("failed to decode mask: " + path);
  Tensor<float> mask({mat.rows, mat.cols});
  for (int y = 0; y < mat.rows; ++y)
    for (int x = 0; x < mat.cols; ++x)
      mask[y * mat.cols + x] = mat.at<unsigned char>(y, x) >= 128 ? 1.0f : 0.0f;
  return mask;
}

// Writes a [0, 1] heat map with a color map applied.
inline void write_heatmap_png(const std::string& path, const Tensor<float>& heat) {
  check(heat.rank() == 2, "write_heatmap_png: (h, w) map required");
  const int h = static_cast<int>(heat.dim(0));
  const int w = static_cast<int>(heat.dim(1));
  cv::Mat gray(h, w, CV_8UC1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      gray.at<unsigned char>(y, x) =
          static_cast<unsigned char>(std::clamp(heat[y * w + x] * 255.0f, 0.0f, 255.0f));
  cv::Mat colored;
  cv::applyColorMap(gray, colored, cv::COLORMAP_JET);
  if (!cv::imwrite(path, colored)) throw IoError("failed to write heat map: " + path);
}

// Side-by-side grid of equally sized (3, h, w) tensors.
inline void write_grid_png(const std::string& path, const std::vector<Tensor<float>>& tiles,
                           int64_t cols) {
  check(!tiles.empty() && cols > 0, "write_grid_png: need tiles and cols > 0");
  const int64_t h = tiles[0].dim(1), w = tiles[0].dim(2);
  const int64_t rows = (static_cast<int64_t>(tiles.size()) + cols - 1) / cols;
  const int pad = 2;
  cv::Mat canvas(static_cast<int>(rows * (h + pad) + pad), static_cast<int>(cols * (w + pad) + pad),
                 CV_8UC3, cv::Scalar(32, 32, 32));
  for (size_t i = 0; i < tiles.size(); ++i) {
    check(tiles[i].dim(1) == h && tiles[i].dim(2) == w, "write_grid_png: tile size mismatch");
    cv::Mat tile = tensor_to_mat8(tiles[i]);
    const int r = static_cast<int>(i) / static_cast<int>(cols);
    const int c = static_cast<int>(i) % static_cast<int>(cols);
    tile.copyTo(canvas(cv::Rect(c * static_cast<int>(w + pad) + pad,
                                r * static_cast<int>(h + pad) + pad, static_cast<int>(w),
                                static_cast<int>(h))));
  }
  if (!cv::imwrite(path, canvas)) throw IoError("failed to write grid: " + path);
}

// A (h, w) mask replicated to a displayable 3-channel tile.
inline Tensor<float> mask_to_tile(const Tensor<float>& mask) {
  check(mask.rank() == 2, "mask_to_tile: (h, w) mask required");
  const int64_t h = mask.dim(0), w = mask.dim(1);
  Tensor<float> tile({3, h, w});
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t i = 0; i < h * w; ++i) tile[c * h * w + i] = mask[i] * 2.0f - 1.0f;
  return tile;
}

}  // namespace mi2gan

#endif
