// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace naeval {

/// Axis-aligned integer pixel box. `x_min`/`y_min` are inclusive and
/// `x_max`/`y_max` exclusive, so width() == x_max - x_min.
struct BBox {
  std::int64_t x_min = 0;
  std::int64_t y_min = 0;
  std::int64_t x_max = 0;
  std::int64_t y_max = 0;

  std::int64_t width() const noexcept { return x_max - x_min; }
  std::int64_t height() const noexcept { return y_max - y_min; }
  std::int64_t area() const noexcept { return width() * height(); }

  /// Non-negative coordinates and a non-empty extent.
  bool valid() const noexcept {
    return x_min >= 0 && y_min >= 0 && x_min < x_max && y_min < y_max;
  }

  /// valid() and inside an image of the given size. Border-touching boxes fit.
  bool fits(std::int64_t image_w, std::int64_t image_h) const noexcept {
    return valid() && x_max <= image_w && y_max <= image_h;
  }

  bool contains(const BBox& other) const noexcept {
    return x_min <= other.x_min && y_min <= other.y_min && x_max >= other.x_max &&
           y_max >= other.y_max;
  }

  static BBox full(std::int64_t image_w, std::int64_t image_h) noexcept {
    return {0, 0, image_w, image_h};
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// A category as a position in a LabelSpace. Equality compares both parts.
struct CategoryId {
  std::string synset;
  std::size_t index = 0;

  friend bool operator==(const CategoryId&, const CategoryId&) = default;
};

struct Category {
  std::string synset;
  std::string name;

  friend bool operator==(const Category&, const Category&) = default;
};

/// Ordered, duplicate-free list of categories. The order is the deterministic
/// tie-break order used throughout the toolkit.
class LabelSpace {
 public:
  LabelSpace() = default;

  /// Throws ValidationError on a duplicate or empty synset.
  explicit LabelSpace(std::vector<Category> categories);

  std::size_t size() const noexcept { return categories_.size(); }
  bool empty() const noexcept { return categories_.empty(); }

  const Category& at(std::size_t index) const { return categories_.at(index); }
  CategoryId id_at(std::size_t index) const { return {categories_.at(index).synset, index}; }

  std::optional<CategoryId> find(std::string_view synset) const;

  /// Like find(), but throws ValidationError naming `subject` when absent.
  CategoryId require(std::string_view synset, const std::string& subject,
                     const std::string& field = "label") const;

  /// True when `id` is exactly the category at `id.index`.
  bool contains(const CategoryId& id) const noexcept;

  const std::vector<Category>& categories() const noexcept { return categories_; }

  friend bool operator==(const LabelSpace& a, const LabelSpace& b) {
    return a.categories_ == b.categories_;
  }

 private:
  std::vector<Category> categories_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One detector output: box, category and confidence in [0, 1].
struct Detection {
  BBox bbox;
  CategoryId category;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Manual-curation removal reasons, kept as data so curation is non-destructive.
struct RecordFlags {
  bool multi_category = false;
  bool unrecognizable = false;

  bool any() const noexcept { return multi_category || unrecognizable; }

  friend bool operator==(const RecordFlags&, const RecordFlags&) = default;
};

struct ImageRecord {
  std::string id;
  std::string path;
  std::int64_t width = 0;
  std::int64_t height = 0;
  CategoryId true_label;
  std::optional<BBox> object_box;
  RecordFlags flags;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct DatasetManifest {
  LabelSpace label_space;
  std::vector<ImageRecord> records;
  std::string provenance;

  /// Linear lookup; returns nullptr when absent.
  const ImageRecord* find(std::string_view id) const noexcept;

  /// Enforces every record invariant. Throws ValidationError naming the record.
  void validate() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

enum class Provenance { detected, padded };

std::string_view to_string(Provenance p) noexcept;

struct PredictionSlot {
  CategoryId category;
  Provenance provenance = Provenance::detected;
  std::optional<double> confidence;

  friend bool operator==(const PredictionSlot&, const PredictionSlot&) = default;
};

/// Ordered top-k categories. Detected slots come first in non-increasing
/// confidence order, padded slots after; categories are pairwise distinct.
struct TopKPrediction {
  std::vector<PredictionSlot> slots;

  std::size_t size() const noexcept { return slots.size(); }

  /// Throws ValidationError naming `subject` if an invariant is broken.
  void validate(const std::string& subject) const;

  /// True when `label` appears within the first `k` slots.
  bool hit_within(const CategoryId& label, std::size_t k) const noexcept;

  friend bool operator==(const TopKPrediction&, const TopKPrediction&) = default;
};

using DetectionsByImage = std::map<std::string, std::vector<Detection>>;
using Predictions = std::map<std::string, TopKPrediction>;

}  // namespace naeval
