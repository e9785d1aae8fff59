// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/annotation.hpp"

#include <algorithm>

#include "json_util.hpp"
#include "naeval/error.hpp"

namespace naeval::annotation {

using detail::json;

BBox points_to_bbox(const MarginalPoints& p) {
  for (const auto& pt : {p.top, p.bottom, p.left, p.right}) {
    if (pt.x < 0 || pt.y < 0) throw ValidationError("points", "", "negative coordinate");
  }
  if (p.left.x > p.right.x) throw ValidationError("points", "left/right", "left.x > right.x");
  if (p.top.y > p.bottom.y) throw ValidationError("points", "top/bottom", "top.y > bottom.y");
  return {p.left.x, p.top.y, p.right.x + 1, p.bottom.y + 1};
}

void check_within(const MarginalPoints& p, std::int64_t width, std::int64_t height,
                  const std::string& subject) {
  for (const auto& pt : {p.top, p.bottom, p.left, p.right}) {
    if (pt.x < 0 || pt.y < 0 || pt.x >= width || pt.y >= height) {
      throw ValidationError(subject, "points",
                            "point (" + std::to_string(pt.x) + "," + std::to_string(pt.y) +
                                ") outside " + std::to_string(width) + "x" +
                                std::to_string(height) + " image");
    }
  }
}

BBox merge_boxes(std::span<const BBox> boxes) {
  if (boxes.empty()) throw ArgumentError("merge_boxes needs at least one box");
  BBox out = boxes.front();
  for (const auto& b : boxes.subspan(1)) {
    out.x_min = std::min(out.x_min, b.x_min);
    out.y_min = std::min(out.y_min, b.y_min);
    out.x_max = std::max(out.x_max, b.x_max);
    out.y_max = std::max(out.y_max, b.y_max);
  }
  return out;
}

void AnnotationState::apply(const AnnotationEvent& event) {
  auto& a = images_[event.image_id];
  if (event.bbox) {
    if (a.bbox && !event.replace) {
      const BBox both[] = {*a.bbox, *event.bbox};
      a.bbox = merge_boxes(both);
    } else {
      a.bbox = event.bbox;
    }
  }
  if (event.flags) a.flags = *event.flags;
}

const ImageAnnotation* AnnotationState::find(std::string_view image_id) const {
  auto it = images_.find(std::string(image_id));
  return it == images_.end() ? nullptr : &it->second;
}

DatasetManifest AnnotationState::annotated(const DatasetManifest& manifest) const {
  DatasetManifest out = manifest;
  for (auto& r : out.records) {
    if (const auto* a = find(r.id)) {
      if (a->bbox) r.object_box = a->bbox;
      r.flags = a->flags;
    }
  }
  return out;
}

std::string annotation_event_to_json(const AnnotationEvent& e) {
  json j = {{"image_id", e.image_id}, {"replace", e.replace}, {"timestamp_ms", e.timestamp_ms}};
  j["bbox"] = e.bbox ? detail::bbox_to_json(*e.bbox) : json(nullptr);
  j["flags"] = e.flags ? detail::flags_to_json(*e.flags) : json(nullptr);
  return j.dump();
}

AnnotationEvent annotation_event_from_json(std::string_view line) {
  const json j = detail::parse_json(line, "annotation event");
  AnnotationEvent e;
  e.image_id = detail::get_string(j, "image_id", "annotation event");
  e.timestamp_ms = detail::get_int(j, "timestamp_ms", e.image_id);
  const auto& replace = detail::field(j, "replace", e.image_id);
  if (!replace.is_boolean()) throw ValidationError(e.image_id, "replace", "expected a boolean");
  e.replace = replace.get<bool>();
  const auto& box = detail::field(j, "bbox", e.image_id);
  if (!box.is_null()) e.bbox = detail::bbox_from_json(box, e.image_id);
  const auto& flags = detail::field(j, "flags", e.image_id);
  if (!flags.is_null()) e.flags = detail::flags_from_json(flags, e.image_id);
  return e;
}

}  // namespace naeval::annotation
