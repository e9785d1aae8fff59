// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/det2cls.hpp"

#include <algorithm>
#include <thread>
#include <unordered_map>

#include "naeval/error.hpp"
#include "naeval/random.hpp"

namespace naeval::det2cls {

PaddingSeed PaddingSeed::for_image(PaddingSeed base, std::string_view image_id) noexcept {
  return {derive_seed(base.value, image_id)};
}

std::vector<Detection> collapse_per_category(std::span<const Detection> detections) {
  // category index -> position of the current best detection
  std::unordered_map<std::size_t, std::size_t> best;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    auto [it, inserted] = best.try_emplace(detections[i].category.index, i);
    if (!inserted && detections[i].confidence > detections[it->second].confidence) it->second = i;
  }
  std::vector<Detection> out;
  out.reserve(best.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (best.at(detections[i].category.index) == i) out.push_back(detections[i]);
  }
  return out;
}

std::vector<RankedCategory> rank_categories(std::span<const Detection> detections) {
  std::vector<RankedCategory> ranked;
  ranked.reserve(detections.size());
  for (const auto& d : detections) ranked.push_back({d.category, d.confidence});
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedCategory& a, const RankedCategory& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.category.index < b.category.index;
  });
  return ranked;
}

TopKPrediction predict_topk(std::span<const Detection> detections, std::size_t k,
                            const LabelSpace& labels, PaddingSeed seed) {
  if (k == 0) throw ArgumentError("k must be positive");
  if (k > labels.size()) {
    throw ArgumentError("k = " + std::to_string(k) + " exceeds label space size " +
                        std::to_string(labels.size()));
  }

  const auto ranked = rank_categories(collapse_per_category(detections));
  TopKPrediction out;
  out.slots.reserve(k);
  std::vector<bool> chosen(labels.size(), false);
  for (std::size_t i = 0; i < ranked.size() && out.slots.size() < k; ++i) {
    out.slots.push_back({ranked[i].category, Provenance::detected, ranked[i].confidence});
    chosen[ranked[i].category.index] = true;
  }

  const std::size_t missing = k - out.slots.size();
  if (missing == 0) return out;

  std::vector<std::size_t> pool;
  pool.reserve(labels.size() - out.slots.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!chosen[i]) pool.push_back(i);
  }
  DeterministicRng rng(seed.value);
  rng.partial_shuffle(pool, missing);
  for (std::size_t i = 0; i < missing; ++i) {
    out.slots.push_back({labels.id_at(pool[i]), Provenance::padded, std::nullopt});
  }
  return out;
}

Predictions predict_batch(const DetectionsByImage& detections,
                          const std::vector<std::string>& image_ids, std::size_t k,
                          const LabelSpace& labels, PaddingSeed seed, std::size_t threads) {
  if (k == 0 || k > labels.size()) {
    throw ArgumentError("k must be in [1, " + std::to_string(labels.size()) + "]");
  }
  for (const auto& [id, dets] : detections) {
    for (const auto& d : dets) {
      if (!labels.contains(d.category)) {
        throw ValidationError(id, "synset", "category '" + d.category.synset + "' not in label space");
      }
    }
  }

  static const std::vector<Detection> kNone;
  std::vector<TopKPrediction> results(image_ids.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < image_ids.size(); i += step) {
      const auto& id = image_ids[i];
      auto it = detections.find(id);
      const auto& dets = it == detections.end() ? kNone : it->second;
      results[i] = predict_topk(dets, k, labels, PaddingSeed::for_image(seed, id));
    }
  };

  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, image_ids.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  Predictions out;
  for (std::size_t i = 0; i < image_ids.size(); ++i) {
    if (!out.emplace(image_ids[i], std::move(results[i])).second) {
      throw ValidationError(image_ids[i], "id", "duplicate image id in batch");
    }
  }
  return out;
}

}  // namespace naeval::det2cls
