// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "naeval/error.hpp"
#include "naeval/io.hpp"

namespace naeval::imaging {

PixelImage::PixelImage(std::int64_t width, std::int64_t height)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ArgumentError("image dimensions must be >= 1");
  pixels_.assign(static_cast<std::size_t>(width * height * 3), 0);
}

PixelImage::PixelImage(std::int64_t width, std::int64_t height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), pixels_(std::move(rgb)) {
  if (width < 1 || height < 1) throw ArgumentError("image dimensions must be >= 1");
  if (pixels_.size() != static_cast<std::size_t>(width * height * 3)) {
    throw ArgumentError("pixel buffer length " + std::to_string(pixels_.size()) +
                        " does not match " + std::to_string(width) + "x" + std::to_string(height) +
                        "x3");
  }
}

PixelImage crop(const PixelImage& image, const BBox& box) {
  if (!box.fits(image.width(), image.height())) {
    throw ArgumentError("crop box [" + std::to_string(box.x_min) + "," + std::to_string(box.y_min) +
                        "," + std::to_string(box.x_max) + "," + std::to_string(box.y_max) +
                        ") outside " + std::to_string(image.width()) + "x" +
                        std::to_string(image.height()) + " image");
  }
  PixelImage out(box.width(), box.height());
  const auto row_bytes = static_cast<std::size_t>(box.width() * 3);
  for (std::int64_t y = 0; y < box.height(); ++y) {
    std::memcpy(out.pixel(0, y), image.pixel(box.x_min, box.y_min + y), row_bytes);
  }
  return out;
}

namespace {

struct Tap {
  std::int64_t lo;
  std::int64_t hi;
  double frac;
};

std::vector<Tap> taps(std::int64_t src, std::int64_t dst) {
  std::vector<Tap> out(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::int64_t i = 0; i < dst; ++i) {
    double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const auto lo = static_cast<std::int64_t>(std::floor(s));
    out[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, src - 1), s - static_cast<double>(lo)};
  }
  return out;
}

}  // namespace

PixelImage resize(const PixelImage& image, std::int64_t target_w, std::int64_t target_h) {
  if (target_w < 1 || target_h < 1) throw ArgumentError("resize targets must be >= 1");
  if (target_w == image.width() && target_h == image.height()) return image;

  const auto xs = taps(image.width(), target_w);
  const auto ys = taps(image.height(), target_h);
  PixelImage out(target_w, target_h);
  for (std::int64_t y = 0; y < target_h; ++y) {
    const auto& ty = ys[static_cast<std::size_t>(y)];
    for (std::int64_t x = 0; x < target_w; ++x) {
      const auto& tx = xs[static_cast<std::size_t>(x)];
      const auto* p00 = image.pixel(tx.lo, ty.lo);
      const auto* p10 = image.pixel(tx.hi, ty.lo);
      const auto* p01 = image.pixel(tx.lo, ty.hi);
      const auto* p11 = image.pixel(tx.hi, ty.hi);
      auto* o = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + (p10[c] - p00[c]) * tx.frac;
        const double bottom = p01[c] + (p11[c] - p01[c]) * tx.frac;
        const double v = top + (bottom - top) * ty.frac;
        o[c] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
      }
    }
  }
  return out;
}

PixelImage decode_image(std::string_view bytes, const std::string& what) {
  if (bytes.empty()) throw Error("cannot decode " + what + ": empty input");
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<char*>(bytes.data()));
  cv::Mat bgr = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error("cannot decode " + what + " (expected PNG or JPEG)");
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(bgr.rows) * bgr.cols * 3);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<std::uint8_t>(y);
    auto* dst = rgb.data() + static_cast<std::size_t>(y) * bgr.cols * 3;
    for (int x = 0; x < bgr.cols; ++x) {
      dst[3 * x + 0] = row[3 * x + 2];
      dst[3 * x + 1] = row[3 * x + 1];
      dst[3 * x + 2] = row[3 * x + 0];
    }
  }
  return PixelImage(bgr.cols, bgr.rows, std::move(rgb));
}

PixelImage load_image(const std::filesystem::path& path) {
  return decode_image(read_file(path), path.string());
}

std::string encode_png(const PixelImage& image) {
  cv::Mat bgr(static_cast<int>(image.height()), static_cast<int>(image.width()), CV_8UC3);
  for (std::int64_t y = 0; y < image.height(); ++y) {
    auto* row = bgr.ptr<std::uint8_t>(static_cast<int>(y));
    for (std::int64_t x = 0; x < image.width(); ++x) {
      const auto* p = image.pixel(x, y);
      row[3 * x + 0] = p[2];
      row[3 * x + 1] = p[1];
      row[3 * x + 2] = p[0];
    }
  }
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", bgr, out)) throw Error("PNG encoding failed");
  return {out.begin(), out.end()};
}

void save_png(const std::filesystem::path& path, const PixelImage& image) {
  write_file(path, encode_png(image));
}

}  // namespace naeval::imaging
