// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/rerank.hpp"

#include <algorithm>
#include <numeric>

#include "json_util.hpp"
#include "naeval/error.hpp"

namespace naeval::rerank {

using detail::json;

ProposalsByImage parse_proposals(std::string_view bytes) {
  const json root = detail::parse_json(bytes, "proposals");
  if (!root.is_object()) throw ValidationError("proposals", "", "top level must be an object");
  ProposalsByImage out;
  for (const auto& [id, arr] : root.items()) {
    if (!arr.is_array()) throw ValidationError(id, "proposals", "expected an array");
    auto& list = out[id];
    for (const auto& p : arr) {
      list.push_back({detail::bbox_from_json(detail::field(p, "bbox", id), id),
                      detail::get_unit_real(detail::field(p, "objectness", id), "objectness", id)});
    }
  }
  return out;
}

std::string serialize_proposals(const ProposalsByImage& proposals) {
  json root = json::object();
  for (const auto& [id, list] : proposals) {
    json arr = json::array();
    for (const auto& p : list) {
      arr.push_back({{"bbox", detail::bbox_to_json(p.bbox)}, {"objectness", p.objectness}});
    }
    root[id] = std::move(arr);
  }
  return root.dump(2) + "\n";
}

std::vector<Proposal> filter_proposals(std::span<const Proposal> proposals, std::int64_t image_w,
                                       std::int64_t image_h, std::int64_t min_side,
                                       std::int64_t margin) {
  std::vector<Proposal> out;
  for (const auto& p : proposals) {
    const auto& b = p.bbox;
    if (std::min(b.width(), b.height()) < min_side) continue;
    if (b.x_min < margin || b.y_min < margin || image_w - b.x_max < margin ||
        image_h - b.y_max < margin) {
      continue;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<Proposal> select_top(std::span<const Proposal> proposals, std::size_t n) {
  if (n == 0) throw ArgumentError("top-n must be positive");
  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return proposals[a].objectness > proposals[b].objectness;
  });
  order.resize(std::min(n, order.size()));
  std::vector<Proposal> out;
  out.reserve(order.size());
  for (auto i : order) out.push_back(proposals[i]);
  return out;
}

std::vector<Detection> classify_proposals(std::string_view image_id,
                                          std::span<const Proposal> proposals,
                                          RegionClassifier& classifier, const LabelSpace& labels) {
  std::vector<Detection> out;
  out.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const std::string where = std::string(image_id) + " proposal " + std::to_string(i);
    ClassifierOutput result;
    try {
      result = classifier.classify_region(image_id, proposals[i].bbox);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(where + ": classifier failed: " + e.what());
    }
    if (result.probabilities().size() != labels.size()) {
      throw ValidationError(where, "probabilities", "output does not cover the label space");
    }
    const auto best = result.argmax_index();
    out.push_back({proposals[i].bbox, labels.id_at(best), result.probabilities()[best]});
  }
  return out;
}

TopKPrediction rerank_classify(std::string_view image_id, std::int64_t image_w,
                               std::int64_t image_h, std::span<const Proposal> proposals,
                               RegionClassifier& classifier, const LabelSpace& labels,
                               std::size_t k, det2cls::PaddingSeed seed,
                               const RerankOptions& options) {
  const auto kept =
      filter_proposals(proposals, image_w, image_h, options.min_side, options.margin);
  const auto top = select_top(kept, options.top_n);
  const auto detections = classify_proposals(image_id, top, classifier, labels);
  return det2cls::predict_topk(detections, k, labels, seed);
}

Predictions rerank_batch(const DatasetManifest& manifest, const ProposalsByImage& proposals,
                         RegionClassifier& classifier, std::size_t k, det2cls::PaddingSeed seed,
                         const RerankOptions& options) {
  static const std::vector<Proposal> kNone;
  Predictions out;
  for (const auto& r : manifest.records) {
    auto it = proposals.find(r.id);
    const auto& props = it == proposals.end() ? kNone : it->second;
    out.emplace(r.id, rerank_classify(r.id, r.width, r.height, props, classifier,
                                      manifest.label_space, k,
                                      det2cls::PaddingSeed::for_image(seed, r.id), options));
  }
  return out;
}

}  // namespace naeval::rerank
