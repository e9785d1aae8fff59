// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// Internal nlohmann::json helpers shared by the file and wire formats.

#pragma once

#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "naeval/error.hpp"
#include "naeval/types.hpp"

namespace naeval::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view bytes, const std::string& what) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ValidationError(what, "", std::string("malformed JSON: ") + e.what());
  }
}

inline const json& field(const json& obj, const char* key, const std::string& subject) {
  if (!obj.is_object()) throw ValidationError(subject, key, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(subject, key, "missing field");
  return *it;
}

inline std::string get_string(const json& obj, const char* key, const std::string& subject) {
  const auto& v = field(obj, key, subject);
  if (!v.is_string()) throw ValidationError(subject, key, "expected a string");
  return v.get<std::string>();
}

inline std::int64_t get_int(const json& obj, const char* key, const std::string& subject) {
  const auto& v = field(obj, key, subject);
  if (!v.is_number_integer()) throw ValidationError(subject, key, "expected an integer");
  return v.get<std::int64_t>();
}

inline double get_unit_real(const json& v, const char* key, const std::string& subject) {
  if (!v.is_number()) throw ValidationError(subject, key, "expected a number");
  const double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(subject, key, "value outside [0,1]");
  return x;
}

/// Reads [x_min, y_min, x_max, y_max] and checks BBox::valid().
inline BBox bbox_from_json(const json& v, const std::string& subject) {
  if (!v.is_array() || v.size() != 4) {
    throw ValidationError(subject, "bbox", "expected [x_min, y_min, x_max, y_max]");
  }
  std::int64_t c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number_integer()) throw ValidationError(subject, "bbox", "coordinates must be integers");
    c[i] = v[i].get<std::int64_t>();
  }
  BBox box{c[0], c[1], c[2], c[3]};
  if (!box.valid()) throw ValidationError(subject, "bbox", "degenerate or negative box");
  return box;
}

inline json bbox_to_json(const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

inline std::vector<Detection> detections_from_json(const json& arr, const LabelSpace& labels,
                                                   const std::string& subject) {
  if (!arr.is_array()) throw ValidationError(subject, "detections", "expected an array");
  std::vector<Detection> out;
  out.reserve(arr.size());
  for (const auto& d : arr) {
    Detection det;
    det.bbox = bbox_from_json(field(d, "bbox", subject), subject);
    det.category = labels.require(get_string(d, "synset", subject), subject, "synset");
    det.confidence = get_unit_real(field(d, "confidence", subject), "confidence", subject);
    out.push_back(std::move(det));
  }
  return out;
}

inline json detections_to_json(const std::vector<Detection>& dets) {
  json arr = json::array();
  for (const auto& d : dets) {
    arr.push_back({{"bbox", bbox_to_json(d.bbox)},
                   {"synset", d.category.synset},
                   {"confidence", d.confidence}});
  }
  return arr;
}

inline json prediction_to_json(const TopKPrediction& p) {
  json slots = json::array();
  for (const auto& s : p.slots) {
    json slot = {{"synset", s.category.synset}, {"provenance", std::string(to_string(s.provenance))}};
    slot["confidence"] = s.confidence ? json(*s.confidence) : json(nullptr);
    slots.push_back(std::move(slot));
  }
  return json{{"slots", std::move(slots)}};
}

inline constexpr const char* kMultiCategory = "multi_category";
inline constexpr const char* kUnrecognizable = "unrecognizable";

inline RecordFlags flags_from_json(const json& v, const std::string& subject) {
  if (!v.is_array()) throw ValidationError(subject, "flags", "expected an array");
  RecordFlags flags;
  for (const auto& f : v) {
    if (!f.is_string()) throw ValidationError(subject, "flags", "flag must be a string");
    const auto s = f.get<std::string>();
    if (s == kMultiCategory) {
      flags.multi_category = true;
    } else if (s == kUnrecognizable) {
      flags.unrecognizable = true;
    } else {
      throw ValidationError(subject, "flags", "unknown flag '" + s + "'");
    }
  }
  return flags;
}

inline json flags_to_json(const RecordFlags& flags) {
  json arr = json::array();
  if (flags.multi_category) arr.push_back(kMultiCategory);
  if (flags.unrecognizable) arr.push_back(kUnrecognizable);
  return arr;
}

}  // namespace naeval::detail
