// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// Background-reduced dataset construction. Records pass, in order:
//   1. flag removal (multi_category / unrecognizable),
//   2. proportion filter: drop if box/image area < category mean / factor,
//   3. classifier filter: drop if the tight crop is recognized (top-1 hit),
//   4. background clipping toward the category's mean object proportion.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "naeval/classifier.hpp"
#include "naeval/image.hpp"
#include "naeval/types.hpp"

namespace naeval::curation {

/// Mean object proportion (box area / image area) per category.
class CategoryProportionTable {
 public:
  CategoryProportionTable() = default;

  /// Throws ValidationError unless means.size() == labels.size() and every
  /// mean is in (0, 1].
  CategoryProportionTable(LabelSpace labels, std::vector<double> means);

  const LabelSpace& labels() const noexcept { return labels_; }
  const std::vector<double>& means() const noexcept { return means_; }

  /// Throws ValidationError naming the synset when the category is unknown.
  double at(std::string_view synset) const;

 private:
  LabelSpace labels_;
  std::vector<double> means_;
};

/// Box area over image area. Throws ValidationError if the record has no box.
double object_proportion(const ImageRecord& record);

/// Per-category arithmetic mean over a reference manifest. Every record needs
/// a box and every category needs at least one record.
CategoryProportionTable avg_object_proportion(const DatasetManifest& reference);

/// Keep unless proportion < mean / factor (strict). factor must be > 0.
bool proportion_filter(const ImageRecord& record, const CategoryProportionTable& table,
                       double factor = 8.0);

/// Keep unless the classifier's top-1 category is the true label.
bool classifier_filter(const ClassifierOutput& output, const CategoryId& true_label);

/// Resizes `cropped` to the classifier's input size and applies the rule above.
bool classifier_filter(const imaging::PixelImage& cropped, const CategoryId& true_label,
                       Classifier& classifier);

struct ClipResult {
  BBox rect;
  double achieved = 0.0;    // box area / rect area
  bool edge_clamped = false;  // rect size was limited by the image
  double shortfall = 0.0;   // max(0, target - achieved)
};

/// Rectangle R with box ⊆ R ⊆ image whose object proportion is close to
/// `target`: the full image when that already reaches the target, otherwise
/// the box scaled about its center by 1/sqrt(target) (rounded down so the
/// target is met), clamped to the image size and shifted inside it.
/// Throws ArgumentError for target outside (0, 1] or a box outside the image.
ClipResult clip_background(std::int64_t image_w, std::int64_t image_h, const BBox& box,
                           double target);

enum class Verdict { kept, dropped_proportion, dropped_classifier, dropped_flag };

std::string_view to_string(Verdict v) noexcept;

struct CurationDecision {
  std::string record_id;
  Verdict verdict = Verdict::kept;
  std::optional<BBox> clip_rect;  // present iff kept
  std::optional<double> target;
  std::optional<double> achieved;

  friend bool operator==(const CurationDecision&, const CurationDecision&) = default;
};

struct CurationOptions {
  double factor = 8.0;
  /// Directory recorded in the output manifest's image paths.
  std::filesystem::path image_dir = "images";
};

struct CurationResult {
  /// Kept records only: clipped dimensions, box translated into the clip,
  /// path under options.image_dir, flags cleared.
  DatasetManifest manifest;
  std::vector<CurationDecision> decisions;  // one per input record, input order
};

/// Runs the four stages. The classifier sees each record's tight crop
/// (record id, object box). Errors carry the record id.
CurationResult build_plus_dataset(const DatasetManifest& manifest,
                                  const CategoryProportionTable& table,
                                  RegionClassifier& classifier, const CurationOptions& options = {});

/// File name used for a kept record's clipped image.
std::string clipped_file_name(std::string_view record_id);

/// Writes the clipped PNG of every kept record to `out_dir`. `load` fetches
/// the original pixels by record.
void export_clipped_images(
    const DatasetManifest& source, const CurationResult& result,
    const std::function<imaging::PixelImage(const ImageRecord&)>& load,
    const std::filesystem::path& out_dir);

/// [{id, verdict, clip_rect | null, target | null, achieved | null}]
std::string serialize_audit(const std::vector<CurationDecision>& decisions);

}  // namespace naeval::curation
