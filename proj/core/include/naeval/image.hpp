// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "naeval/types.hpp"

namespace naeval::imaging {

/// Interleaved 8-bit RGB image, row-major.
class PixelImage {
 public:
  PixelImage() = default;

  /// Zero-filled image. Throws ArgumentError unless width, height >= 1.
  PixelImage(std::int64_t width, std::int64_t height);

  /// Throws ArgumentError unless rgb.size() == width * height * 3.
  PixelImage(std::int64_t width, std::int64_t height, std::vector<std::uint8_t> rgb);

  std::int64_t width() const noexcept { return width_; }
  std::int64_t height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
  std::span<std::uint8_t> bytes() noexcept { return pixels_; }

  const std::uint8_t* pixel(std::int64_t x, std::int64_t y) const noexcept {
    return pixels_.data() + (y * width_ + x) * 3;
  }
  std::uint8_t* pixel(std::int64_t x, std::int64_t y) noexcept {
    return pixels_.data() + (y * width_ + x) * 3;
  }

  friend bool operator==(const PixelImage&, const PixelImage&) = default;

 private:
  std::int64_t width_ = 0;
  std::int64_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Bit-exact sub-image. Throws ArgumentError if `box` does not fit the image.
PixelImage crop(const PixelImage& image, const BBox& box);

/// Bilinear resampling with pixel-center alignment and edge clamping; each
/// channel is rounded to nearest. Resizing to the same size returns an exact
/// copy. Throws ArgumentError unless both targets are >= 1.
PixelImage resize(const PixelImage& image, std::int64_t target_w, std::int64_t target_h);

/// Decodes PNG or JPEG bytes. Throws Error on undecodable input.
PixelImage decode_image(std::string_view bytes, const std::string& what = "image");
PixelImage load_image(const std::filesystem::path& path);

/// Lossless PNG encoding.
std::string encode_png(const PixelImage& image);
void save_png(const std::filesystem::path& path, const PixelImage& image);

}  // namespace naeval::imaging
