// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// Proposal rerank pipeline: class-agnostic proposals are filtered, the most
// object-like ones are classified crop by crop, and the per-crop results are
// aggregated with the detection-to-classification conversion.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "naeval/classifier.hpp"
#include "naeval/det2cls.hpp"
#include "naeval/types.hpp"

namespace naeval::rerank {

struct Proposal {
  BBox bbox;
  double objectness = 0.0;  // in [0, 1]

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

using ProposalsByImage = std::map<std::string, std::vector<Proposal>>;

/// {image_id: [{bbox, objectness}]}
ProposalsByImage parse_proposals(std::string_view bytes);
std::string serialize_proposals(const ProposalsByImage& proposals);

struct RerankOptions {
  std::int64_t min_side = 10;
  std::int64_t margin = 2;
  std::size_t top_n = 20;
};

/// Drops proposals with min(width, height) < min_side, and proposals closer
/// than `margin` pixels to any image edge (x_min < margin, y_min < margin,
/// image_w - x_max < margin or image_h - y_max < margin). Order is preserved.
std::vector<Proposal> filter_proposals(std::span<const Proposal> proposals, std::int64_t image_w,
                                       std::int64_t image_h, std::int64_t min_side = 10,
                                       std::int64_t margin = 2);

/// The `n` highest-objectness proposals, non-increasing, ties by input index.
/// Throws ArgumentError if n == 0.
std::vector<Proposal> select_top(std::span<const Proposal> proposals, std::size_t n);

/// One detection per proposal: argmax category (ties by label index) with
/// its probability as confidence. Classifier failures become PipelineError
/// naming the proposal index; invalid outputs stay ValidationError.
std::vector<Detection> classify_proposals(std::string_view image_id,
                                          std::span<const Proposal> proposals,
                                          RegionClassifier& classifier, const LabelSpace& labels);

/// filter -> select_top -> classify -> det2cls::predict_topk, using `seed`
/// as given for the padding.
TopKPrediction rerank_classify(std::string_view image_id, std::int64_t image_w,
                               std::int64_t image_h, std::span<const Proposal> proposals,
                               RegionClassifier& classifier, const LabelSpace& labels,
                               std::size_t k, det2cls::PaddingSeed seed,
                               const RerankOptions& options = {});

/// rerank_classify for every manifest record, each padded with
/// PaddingSeed::for_image(seed, id). Records without proposals get none.
Predictions rerank_batch(const DatasetManifest& manifest, const ProposalsByImage& proposals,
                         RegionClassifier& classifier, std::size_t k, det2cls::PaddingSeed seed,
                         const RerankOptions& options = {});

}  // namespace naeval::rerank
