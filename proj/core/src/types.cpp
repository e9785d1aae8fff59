// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/types.hpp"

#include <algorithm>
#include <unordered_set>

#include "naeval/error.hpp"

namespace naeval {

LabelSpace::LabelSpace(std::vector<Category> categories) : categories_(std::move(categories)) {
  index_.reserve(categories_.size());
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    const auto& synset = categories_[i].synset;
    if (synset.empty()) {
      throw ValidationError("label_space[" + std::to_string(i) + "]", "synset", "empty synset");
    }
    if (!index_.emplace(synset, i).second) {
      throw ValidationError(synset, "label_space", "duplicate synset");
    }
  }
}

std::optional<CategoryId> LabelSpace::find(std::string_view synset) const {
  auto it = index_.find(std::string(synset));
  if (it == index_.end()) return std::nullopt;
  return CategoryId{it->first, it->second};
}

CategoryId LabelSpace::require(std::string_view synset, const std::string& subject,
                               const std::string& field) const {
  if (auto id = find(synset)) return *id;
  throw ValidationError(subject, field, "synset '" + std::string(synset) + "' not in label space");
}

bool LabelSpace::contains(const CategoryId& id) const noexcept {
  return id.index < categories_.size() && categories_[id.index].synset == id.synset;
}

const ImageRecord* DatasetManifest::find(std::string_view id) const noexcept {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

void DatasetManifest::validate() const {
  std::unordered_set<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) {
    if (r.id.empty()) throw ValidationError("<record>", "id", "empty id");
    if (!ids.insert(r.id).second) throw ValidationError(r.id, "id", "duplicate record id");
    if (r.width < 1 || r.height < 1) {
      throw ValidationError(r.id, "width/height", "image dimensions must be >= 1");
    }
    if (!label_space.contains(r.true_label)) {
      throw ValidationError(r.id, "label", "label '" + r.true_label.synset + "' not in label space");
    }
    if (r.object_box && !r.object_box->fits(r.width, r.height)) {
      throw ValidationError(r.id, "bbox", "box is degenerate or outside the image");
    }
  }
}

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::detected ? "detected" : "padded";
}

void TopKPrediction::validate(const std::string& subject) const {
  std::unordered_set<std::string> seen;
  bool in_padding = false;
  double last = 2.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    const std::string field = "slots[" + std::to_string(i) + "]";
    if (!seen.insert(s.category.synset).second) {
      throw ValidationError(subject, field, "duplicate category '" + s.category.synset + "'");
    }
    if (s.provenance == Provenance::padded) {
      in_padding = true;
      if (s.confidence) throw ValidationError(subject, field, "padded slot carries a confidence");
      continue;
    }
    if (in_padding) throw ValidationError(subject, field, "detected slot after padded slot");
    if (!s.confidence) throw ValidationError(subject, field, "detected slot without confidence");
    const double c = *s.confidence;
    if (!(c >= 0.0 && c <= 1.0)) throw ValidationError(subject, field, "confidence outside [0,1]");
    if (c > last) throw ValidationError(subject, field, "detected slots not in non-increasing order");
    last = c;
  }
}

bool TopKPrediction::hit_within(const CategoryId& label, std::size_t k) const noexcept {
  const std::size_t n = std::min(k, slots.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i].category.synset == label.synset) return true;
  }
  return false;
}

}  // namespace naeval
