// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/classifier.hpp"

#include <cmath>

#include "json_util.hpp"
#include "naeval/error.hpp"

namespace naeval {

using detail::json;

ClassifierOutput ClassifierOutput::validated(std::vector<double> probabilities,
                                             const LabelSpace& labels, const std::string& subject) {
  if (probabilities.size() != labels.size() || probabilities.empty()) {
    throw ValidationError(subject, "probabilities",
                          "expected " + std::to_string(labels.size()) + " values, got " +
                              std::to_string(probabilities.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError(subject, "probabilities", "value for '" + labels.at(i).synset +
                                                          "' outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw ValidationError(subject, "probabilities",
                          "not normalized (sum = " + std::to_string(sum) + ")");
  }
  ClassifierOutput out;
  out.probabilities_ = std::move(probabilities);
  return out;
}

ClassifierOutput ClassifierOutput::from_synsets(const std::map<std::string, double>& probabilities,
                                                const LabelSpace& labels,
                                                const std::string& subject) {
  std::vector<double> dense(labels.size(), 0.0);
  for (const auto& [synset, p] : probabilities) {
    dense[labels.require(synset, subject, "probabilities").index] = p;
  }
  return validated(std::move(dense), labels, subject);
}

std::size_t ClassifierOutput::argmax_index() const noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probabilities_.size(); ++i) {
    if (probabilities_[i] > probabilities_[best]) best = i;
  }
  return best;
}

ClassifierOutput CroppingRegionClassifier::classify_region(std::string_view image_id,
                                                           const BBox& box) {
  if (cached_image_.empty() || cached_id_ != image_id) {
    cached_image_ = source_(image_id);
    cached_id_ = std::string(image_id);
  }
  const auto side = classifier_.input_size();
  return classifier_.classify(imaging::resize(imaging::crop(cached_image_, box), side, side));
}

RecordedRegionClassifier RecordedRegionClassifier::parse(std::string_view bytes,
                                                         const LabelSpace& labels) {
  const json root = detail::parse_json(bytes, "classifier file");
  if (!root.is_object()) throw ValidationError("classifier file", "", "top level must be an object");
  RecordedRegionClassifier out;
  for (const auto& [id, arr] : root.items()) {
    if (!arr.is_array()) throw ValidationError(id, "", "expected an array of recorded outputs");
    for (const auto& e : arr) {
      const BBox box = detail::bbox_from_json(detail::field(e, "bbox", id), id);
      const auto& probs = detail::field(e, "probabilities", id);
      if (!probs.is_object()) throw ValidationError(id, "probabilities", "expected an object");
      std::map<std::string, double> sparse;
      for (const auto& [synset, p] : probs.items()) {
        if (!p.is_number()) throw ValidationError(id, "probabilities", "expected numbers");
        sparse[synset] = p.get<double>();
      }
      out.record(id, box, ClassifierOutput::from_synsets(sparse, labels, id));
    }
  }
  return out;
}

void RecordedRegionClassifier::record(const std::string& image_id, const BBox& box,
                                      ClassifierOutput output) {
  auto& list = entries_[image_id];
  for (auto& e : list) {
    if (e.box == box) {
      e.output = std::move(output);
      return;
    }
  }
  list.push_back({box, std::move(output)});
}

std::string RecordedRegionClassifier::serialize(const LabelSpace& labels) const {
  json root = json::object();
  for (const auto& [id, list] : entries_) {
    json arr = json::array();
    for (const auto& e : list) {
      json probs = json::object();
      const auto& p = e.output.probabilities();
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] != 0.0) probs[labels.at(i).synset] = p[i];
      }
      arr.push_back({{"bbox", detail::bbox_to_json(e.box)}, {"probabilities", std::move(probs)}});
    }
    root[id] = std::move(arr);
  }
  return root.dump(2) + "\n";
}

ClassifierOutput RecordedRegionClassifier::classify_region(std::string_view image_id,
                                                           const BBox& box) {
  auto it = entries_.find(image_id);
  if (it != entries_.end()) {
    for (const auto& e : it->second) {
      if (e.box == box) return e.output;
    }
  }
  throw Error("no recorded classifier output for image '" + std::string(image_id) + "' box [" +
              std::to_string(box.x_min) + "," + std::to_string(box.y_min) + "," +
              std::to_string(box.x_max) + "," + std::to_string(box.y_max) + ")");
}

}  // namespace naeval
