// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// Scale-factor bucketing of cropped objects.
//
// The whole image is resized (independently per axis) to base x base, which
// maps the object box to w x h. With r = max(w, h) / base the object falls in
// bucket SF = 2^-k for the unique k in [0, 4] with 2^-k-1 < r <= 2^-k. Objects
// with r <= 1/32 are clamped into the 1/16 bucket and counted as clamps.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "naeval/ratio.hpp"
#include "naeval/types.hpp"

namespace naeval::imaging {

inline constexpr std::int64_t kCanonicalBase = 224;

/// Dyadic bucket 2^-k, k in [0, 4], stored as the exponent.
class ScaleFactor {
 public:
  static constexpr int kMaxExponent = 4;
  static constexpr int kBucketCount = kMaxExponent + 1;

  constexpr ScaleFactor() = default;

  /// Throws ArgumentError unless 0 <= k <= 4.
  static ScaleFactor from_exponent(int k);

  constexpr int exponent() const noexcept { return exponent_; }
  constexpr std::int64_t denominator() const noexcept { return std::int64_t{1} << exponent_; }
  constexpr double value() const noexcept { return 1.0 / static_cast<double>(denominator()); }

  /// "1", "1/2", ..., "1/16".
  std::string label() const;

  friend constexpr auto operator<=>(const ScaleFactor&, const ScaleFactor&) = default;

 private:
  constexpr explicit ScaleFactor(int k) : exponent_(k) {}
  int exponent_ = 0;
};

struct ObjectDims {
  double w = 0.0;
  double h = 0.0;
};

struct SfAssignment {
  ScaleFactor sf;
  bool clamped = false;  // r <= 1/32, forced into the 1/16 bucket
};

/// Object size after resizing the whole image to base x base.
ObjectDims scaled_object_dims(std::int64_t image_w, std::int64_t image_h, const BBox& box,
                              std::int64_t base = kCanonicalBase);

/// Throws ArgumentError unless 0 < w <= base and 0 < h <= base.
SfAssignment assign_sf(double w, double h, std::int64_t base = kCanonicalBase);
ScaleFactor compute_sf(double w, double h, std::int64_t base = kCanonicalBase);

/// SF x base, the classifier input side for the bucket. `base` must be a
/// positive multiple of 16 (224 and 448 in practice).
std::int64_t bucket_input_size(ScaleFactor sf, std::int64_t base);

struct BucketRow {
  ScaleFactor sf;
  std::int64_t input_size = 0;
  Ratio top1;
};

struct StratifiedReport {
  std::int64_t base = kCanonicalBase;
  std::array<BucketRow, ScaleFactor::kBucketCount> buckets;  // SF = 1 first
  Ratio all;
  std::uint64_t clamped = 0;
};

/// Buckets every record by its object box (scaled with the canonical 224
/// base) and reports per-bucket top-1 accuracy; `base` only sets the reported
/// input size. Throws ValidationError naming a record without an object box or
/// without a prediction.
StratifiedReport stratified_eval(const DatasetManifest& manifest, const Predictions& predictions,
                                 std::int64_t base = kCanonicalBase);

/// Aligned text table: SF, Number, input size, Accuracy (%), then an "all" row.
std::string format_stratified(const StratifiedReport& report);

}  // namespace naeval::imaging
