// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <array>
#include <random>

#include "naeval/error.hpp"
#include "naeval/image.hpp"
#include "naeval/scale.hpp"
#include "support.hpp"

namespace naeval::imaging {
namespace {

using testing::make_labels;
using testing::record;

PixelImage random_image(std::mt19937_64& rng, std::int64_t w, std::int64_t h) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w * h * 3));
  for (auto& v : px) v = static_cast<std::uint8_t>(rng());
  return {w, h, std::move(px)};
}

BBox random_box(std::mt19937_64& rng, std::int64_t w, std::int64_t h) {
  const auto x0 = static_cast<std::int64_t>(rng() % w);
  const auto y0 = static_cast<std::int64_t>(rng() % h);
  return {x0, y0, x0 + 1 + static_cast<std::int64_t>(rng() % (w - x0)),
          y0 + 1 + static_cast<std::int64_t>(rng() % (h - y0))};
}

// Interval oracle: scan k = 0..4 and test 2^-(k+1) < r <= 2^-k with exact
// rationals (r = m / base, so compare m * 2^(k+1) against base).
int sf_oracle(std::int64_t m, std::int64_t base, bool& clamped) {
  clamped = false;
  for (int k = 0; k <= 4; ++k) {
    if (base < m * (std::int64_t{2} << k) && m * (std::int64_t{1} << k) <= base) return k;
  }
  clamped = true;
  return 4;
}

TEST(Crop, MatchesNaiveCopy) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::int64_t w = 1 + rng() % 40, h = 1 + rng() % 40;
    const auto img = random_image(rng, w, h);
    const auto box = random_box(rng, w, h);
    const auto out = crop(img, box);
    ASSERT_EQ(out.width(), box.width());
    ASSERT_EQ(out.height(), box.height());
    for (std::int64_t y = 0; y < out.height(); ++y) {
      for (std::int64_t x = 0; x < out.width(); ++x) {
        for (int c = 0; c < 3; ++c) ASSERT_EQ(out.pixel(x, y)[c], img.pixel(box.x_min + x, box.y_min + y)[c]);
      }
    }
  }
}

TEST(Crop, IdentityPointAndComposition) {
  std::mt19937_64 rng(2);
  const auto img = random_image(rng, 30, 20);
  EXPECT_EQ(crop(img, BBox::full(30, 20)), img);
  const auto px = crop(img, {7, 4, 8, 5});
  EXPECT_EQ(px.width(), 1);
  EXPECT_EQ(px.pixel(0, 0)[1], img.pixel(7, 4)[1]);
  for (int t = 0; t < 100; ++t) {
    const auto outer = random_box(rng, 30, 20);
    const auto inner = random_box(rng, outer.width(), outer.height());
    const BBox composed{outer.x_min + inner.x_min, outer.y_min + inner.y_min, outer.x_min + inner.x_max,
                        outer.y_min + inner.y_max};
    EXPECT_EQ(crop(crop(img, outer), inner), crop(img, composed));
  }
  EXPECT_THROW(crop(img, {0, 0, 31, 5}), ArgumentError);
}

TEST(Resize, IdentityAndConstant) {
  std::mt19937_64 rng(3);
  const auto img = random_image(rng, 13, 7);
  EXPECT_EQ(resize(img, 13, 7), img);
  PixelImage flat(2, 2, std::vector<std::uint8_t>(12, 77));
  const auto big = resize(flat, 9, 5);
  for (auto v : big.bytes()) EXPECT_EQ(v, 77);
  EXPECT_THROW(resize(img, 0, 3), ArgumentError);
}

TEST(Resize, HalvedGradientMatchesHandValues) {
  // value(x, y) = 10x + 40y; halving samples the centers (0.5, 0.5),
  // (2.5, 0.5), (0.5, 2.5), (2.5, 2.5) of the source grid.
  std::vector<std::uint8_t> px;
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int c = 0; c < 3; ++c) px.push_back(static_cast<std::uint8_t>(10 * x + 40 * y));
    }
  }
  const auto out = resize(PixelImage(4, 4, px), 2, 2);
  EXPECT_EQ(out.pixel(0, 0)[0], 25);
  EXPECT_EQ(out.pixel(1, 0)[0], 45);
  EXPECT_EQ(out.pixel(0, 1)[0], 105);
  EXPECT_EQ(out.pixel(1, 1)[2], 125);
}

TEST(Codec, PngRoundTripIsLossless) {
  std::mt19937_64 rng(4);
  const auto img = random_image(rng, 17, 9);
  EXPECT_EQ(decode_image(encode_png(img)), img);
  EXPECT_THROW(decode_image("not an image"), Error);
  EXPECT_THROW(decode_image(""), Error);
}

TEST(ScaleFactor, WorkedExample) {
  const auto sf = compute_sf(107, 73);
  EXPECT_EQ(sf.exponent(), 1);
  EXPECT_EQ(sf.label(), "1/2");
  EXPECT_EQ(bucket_input_size(sf, 224), 112);
  EXPECT_EQ(compute_sf(224, 1).exponent(), 0);
  EXPECT_EQ(bucket_input_size(ScaleFactor::from_exponent(0), 448), 448);
  EXPECT_EQ(bucket_input_size(ScaleFactor::from_exponent(4), 224), 14);
  EXPECT_THROW(compute_sf(0, 5), ArgumentError);
  EXPECT_THROW(compute_sf(225, 5), ArgumentError);
  EXPECT_THROW(bucket_input_size(sf, 100), ArgumentError);
}

TEST(ScaleFactor, ScaledDimsForWorkedExample) {
  // A 448x448 image whose object is 214x146 scales to 107x73.
  const auto d = scaled_object_dims(448, 448, {10, 10, 224, 156});
  EXPECT_EQ(d.w, 107.0);
  EXPECT_EQ(d.h, 73.0);
  const auto f = scaled_object_dims(333, 91, BBox::full(333, 91));
  EXPECT_EQ(f.w, 224.0);
  EXPECT_EQ(f.h, 224.0);
}

TEST(ScaleFactor, ExhaustiveScanMatchesIntervalOracle) {
  std::array<std::uint64_t, 5> counts{};
  std::uint64_t clamped = 0;
  for (std::int64_t w = 1; w <= 224; ++w) {
    for (std::int64_t h = 1; h <= 224; ++h) {
      bool oc = false;
      const int k = sf_oracle(std::max(w, h), 224, oc);
      const auto a = assign_sf(static_cast<double>(w), static_cast<double>(h));
      ASSERT_EQ(a.sf.exponent(), k) << w << "x" << h;
      ASSERT_EQ(a.clamped, oc);
      ++counts[static_cast<std::size_t>(k)];
      clamped += oc;
    }
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  EXPECT_EQ(total, 224u * 224u);
  // max(w,h) <= 7 is r <= 1/32: 7*7 cells are clamped.
  EXPECT_EQ(clamped, 49u);
}

TEST(Stratified, BucketsSumAndAllRowIsWeightedMean) {
  std::mt19937_64 rng(5);
  DatasetManifest m;
  m.label_space = make_labels(3);
  Predictions p;
  std::array<std::uint64_t, 5> expect_counts{};
  for (int i = 0; i < 500; ++i) {
    const auto id = "s" + std::to_string(i);
    const std::int64_t w = 20 + rng() % 600, h = 20 + rng() % 600;
    const auto box = random_box(rng, w, h);
    m.records.push_back(record(id, m.label_space, rng() % 3, w, h, box));
    // Oracle on exact rationals: r = max(bw/w, bh/h), compared via cross multiplication.
    const bool wider = box.width() * h >= box.height() * w;
    const std::int64_t num = wider ? box.width() : box.height();
    const std::int64_t den = wider ? w : h;
    int k = 4;
    for (int j = 0; j <= 4; ++j) {
      if (den < num * (std::int64_t{2} << j) && num * (std::int64_t{1} << j) <= den) {
        k = j;
        break;
      }
    }
    ++expect_counts[static_cast<std::size_t>(k)];
    p[id].slots = {{m.label_space.id_at(rng() % 3), Provenance::detected, 0.5}};
  }
  const auto rep = stratified_eval(m, p, 224);
  Ratio sum;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(rep.buckets[k].top1.total, expect_counts[k]) << "bucket " << k;
    sum += rep.buckets[k].top1;
  }
  EXPECT_EQ(rep.all.total, 500u);
  EXPECT_EQ(rep.all, sum);
  EXPECT_EQ(rep.buckets[1].input_size, 112);
  const auto text = format_stratified(rep);
  EXPECT_NE(text.find("all"), std::string::npos);
}

TEST(Stratified, FullFrameObjectsLandInTopBucket) {
  DatasetManifest m;
  m.label_space = make_labels(2);
  Predictions p;
  for (int i = 0; i < 10; ++i) {
    const auto id = "f" + std::to_string(i);
    m.records.push_back(record(id, m.label_space, 0, 50 + i, 90, BBox::full(50 + i, 90)));
    p[id].slots = {{m.label_space.id_at(0), Provenance::detected, 1.0}};
  }
  const auto rep = stratified_eval(m, p, 448);
  EXPECT_EQ(rep.buckets[0].top1, (Ratio{10, 10}));
  EXPECT_EQ(rep.buckets[0].input_size, 448);
  m.records.push_back(record("nobox", m.label_space, 0, 5, 5));
  p["nobox"] = p["f0"];
  try {
    stratified_eval(m, p, 224);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.subject(), "nobox");
  }
}

}  // namespace
}  // namespace naeval::imaging
