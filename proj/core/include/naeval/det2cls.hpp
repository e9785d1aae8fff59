// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// Detection-to-classification conversion: keep the most confident detection
// per category, rank categories by confidence, emit the first k, and pad with
// random distinct categories when fewer than k were detected.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "naeval/types.hpp"

namespace naeval::det2cls {

/// Source of the random padding. Batches derive one stream per image from
/// (seed, image id) so results do not depend on iteration order.
struct PaddingSeed {
  std::uint64_t value = 0;

  static PaddingSeed for_image(PaddingSeed base, std::string_view image_id) noexcept;

  friend bool operator==(const PaddingSeed&, const PaddingSeed&) = default;
};

struct RankedCategory {
  CategoryId category;
  double confidence = 0.0;

  friend bool operator==(const RankedCategory&, const RankedCategory&) = default;
};

/// One survivor per category: the first detection holding that category's
/// maximum confidence. Survivors keep their relative input order.
std::vector<Detection> collapse_per_category(std::span<const Detection> detections);

/// Non-increasing confidence; equal confidences ordered by label index.
/// Expects collapsed input (one detection per category).
std::vector<RankedCategory> rank_categories(std::span<const Detection> detections);

/// Full conversion for one image. Throws ArgumentError if k == 0 or
/// k > labels.size().
TopKPrediction predict_topk(std::span<const Detection> detections, std::size_t k,
                            const LabelSpace& labels, PaddingSeed seed);

/// predict_topk over every id in `image_ids`, each with the seed
/// PaddingSeed::for_image(seed, id). Ids missing from `detections` are treated
/// as images with no detections. Detections whose category is not in `labels`
/// raise ValidationError naming the image id. `threads` > 1 fans out per image.
Predictions predict_batch(const DetectionsByImage& detections,
                          const std::vector<std::string>& image_ids, std::size_t k,
                          const LabelSpace& labels, PaddingSeed seed, std::size_t threads = 1);

}  // namespace naeval::det2cls
