// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "naeval/types.hpp"

namespace naeval::annotation {

struct Point {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Extreme points of an object as clicked by an annotator.
struct MarginalPoints {
  Point top;
  Point bottom;
  Point left;
  Point right;

  friend bool operator==(const MarginalPoints&, const MarginalPoints&) = default;
};

/// (left.x, top.y, right.x + 1, bottom.y + 1). Throws ValidationError when
/// left.x > right.x, top.y > bottom.y or a coordinate is negative.
BBox points_to_bbox(const MarginalPoints& points);

/// Throws ValidationError naming `subject` when a point lies outside a
/// width x height image.
void check_within(const MarginalPoints& points, std::int64_t width, std::int64_t height,
                  const std::string& subject);

/// Smallest box containing all inputs. Throws ArgumentError on empty input.
BBox merge_boxes(std::span<const BBox> boxes);

/// One stored annotation change. Boxes from several objects of one image are
/// merged unless `replace` is set.
struct AnnotationEvent {
  std::string image_id;
  std::optional<BBox> bbox;
  std::optional<RecordFlags> flags;
  bool replace = false;
  std::int64_t timestamp_ms = 0;
};

struct ImageAnnotation {
  std::optional<BBox> bbox;
  RecordFlags flags;

  friend bool operator==(const ImageAnnotation&, const ImageAnnotation&) = default;
};

/// Fold of annotation events.
class AnnotationState {
 public:
  void apply(const AnnotationEvent& event);
  const std::map<std::string, ImageAnnotation>& images() const noexcept { return images_; }
  const ImageAnnotation* find(std::string_view image_id) const;

  /// `manifest` with stored boxes and flags applied to matching records.
  DatasetManifest annotated(const DatasetManifest& manifest) const;

 private:
  std::map<std::string, ImageAnnotation> images_;
};

std::string annotation_event_to_json(const AnnotationEvent& event);
AnnotationEvent annotation_event_from_json(std::string_view line);

}  // namespace naeval::annotation
