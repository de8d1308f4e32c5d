#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drt/tensor.hpp"

namespace drt::io {

// Binary netpbm: P6 for 3-channel images, P5 for 1-channel. Both are
// lossless 8-bit, so a written image reads back to the same pixel values.
Tensor read_image(const std::filesystem::path& path);

// Values must already lie on the 8-bit grid; anything else throws
// ShapeMismatch rather than silently rounding.
void write_image(const std::filesystem::path& path, const Tensor& image);

std::string encode_image(const Tensor& image);
Tensor decode_image(const std::string& bytes);

struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
};

GrayImage read_gray(const std::filesystem::path& path);
void write_gray(const std::filesystem::path& path, const GrayImage& image);

// Hex SHA-256 of the lossless encoding of an image.
std::string content_hash(const Tensor& image);
std::string sha256_hex(const std::string& bytes);

}  // namespace drt::io
