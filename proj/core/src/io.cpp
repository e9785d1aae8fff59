// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace naeval {

using detail::json;

DatasetManifest load_manifest(std::string_view bytes) {
  const json root = detail::parse_json(bytes, "manifest");
  if (!root.is_object()) throw ValidationError("manifest", "", "top level must be an object");

  const auto& ls = detail::field(root, "label_space", "manifest");
  if (!ls.is_array()) throw ValidationError("manifest", "label_space", "expected an array");
  std::vector<Category> categories;
  categories.reserve(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const std::string subject = "label_space[" + std::to_string(i) + "]";
    categories.push_back({detail::get_string(ls[i], "synset", subject),
                          detail::get_string(ls[i], "name", subject)});
  }

  DatasetManifest m;
  m.label_space = LabelSpace(std::move(categories));
  m.provenance = detail::get_string(root, "provenance", "manifest");

  const auto& recs = detail::field(root, "records", "manifest");
  if (!recs.is_array()) throw ValidationError("manifest", "records", "expected an array");
  m.records.reserve(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    ImageRecord rec;
    rec.id = detail::get_string(r, "id", "records[" + std::to_string(i) + "]");
    const std::string& subject = rec.id;
    rec.path = detail::get_string(r, "path", subject);
    rec.width = detail::get_int(r, "width", subject);
    rec.height = detail::get_int(r, "height", subject);
    rec.true_label = m.label_space.require(detail::get_string(r, "label", subject), subject);
    const auto& box = detail::field(r, "bbox", subject);
    if (!box.is_null()) rec.object_box = detail::bbox_from_json(box, subject);
    rec.flags = detail::flags_from_json(detail::field(r, "flags", subject), subject);
    m.records.push_back(std::move(rec));
  }
  m.validate();
  return m;
}

std::string save_manifest(const DatasetManifest& manifest) {
  json ls = json::array();
  for (const auto& c : manifest.label_space.categories()) {
    ls.push_back({{"synset", c.synset}, {"name", c.name}});
  }
  json recs = json::array();
  for (const auto& r : manifest.records) {
    recs.push_back({{"id", r.id},
                    {"path", r.path},
                    {"width", r.width},
                    {"height", r.height},
                    {"label", r.true_label.synset},
                    {"bbox", r.object_box ? detail::bbox_to_json(*r.object_box) : json(nullptr)},
                    {"flags", detail::flags_to_json(r.flags)}});
  }
  json root = {{"label_space", std::move(ls)},
               {"records", std::move(recs)},
               {"provenance", manifest.provenance}};
  return root.dump(2) + "\n";
}

DatasetManifest load_manifest_file(const std::filesystem::path& path) {
  return load_manifest(read_file(path));
}

void save_manifest_file(const std::filesystem::path& path, const DatasetManifest& manifest) {
  write_file(path, save_manifest(manifest));
}

DetectionsByImage parse_detections(std::string_view bytes, const LabelSpace& labels) {
  const json root = detail::parse_json(bytes, "detections");
  if (!root.is_object()) throw ValidationError("detections", "", "top level must be an object");
  DetectionsByImage out;
  for (const auto& [id, arr] : root.items()) {
    out.emplace(id, detail::detections_from_json(arr, labels, id));
  }
  return out;
}

std::string serialize_detections(const DetectionsByImage& detections) {
  json root = json::object();
  for (const auto& [id, dets] : detections) root[id] = detail::detections_to_json(dets);
  return root.dump(2) + "\n";
}

Predictions parse_predictions(std::string_view bytes, const LabelSpace& labels) {
  const json root = detail::parse_json(bytes, "predictions");
  if (!root.is_object()) throw ValidationError("predictions", "", "top level must be an object");
  Predictions out;
  for (const auto& [id, pred] : root.items()) {
    const auto& slots = detail::field(pred, "slots", id);
    if (!slots.is_array()) throw ValidationError(id, "slots", "expected an array");
    TopKPrediction p;
    for (const auto& s : slots) {
      PredictionSlot slot;
      slot.category = labels.require(detail::get_string(s, "synset", id), id, "synset");
      const auto prov = detail::get_string(s, "provenance", id);
      if (prov == "detected") {
        slot.provenance = Provenance::detected;
      } else if (prov == "padded") {
        slot.provenance = Provenance::padded;
      } else {
        throw ValidationError(id, "provenance", "unknown provenance '" + prov + "'");
      }
      const auto& c = detail::field(s, "confidence", id);
      if (!c.is_null()) slot.confidence = detail::get_unit_real(c, "confidence", id);
      p.slots.push_back(std::move(slot));
    }
    p.validate(id);
    out.emplace(id, std::move(p));
  }
  return out;
}

std::string serialize_predictions(const Predictions& predictions) {
  json root = json::object();
  for (const auto& [id, p] : predictions) root[id] = detail::prediction_to_json(p);
  return root.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace naeval
