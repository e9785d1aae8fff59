// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// JSON file formats shared by every subcommand:
//
//   manifest     {label_space: [{synset, name}],
//                 records: [{id, path, width, height, label,
//                            bbox: [x_min, y_min, x_max, y_max] | null,
//                            flags: ["multi_category" | "unrecognizable"]}],
//                 provenance}
//   detections   {image_id: [{bbox, synset, confidence}]}
//   predictions  {image_id: {slots: [{synset, provenance, confidence | null}]}}
//
// Serialization is canonical: object keys are sorted and doubles are written
// with round-trip precision, so save(load(x)) is byte-stable.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "naeval/types.hpp"

namespace naeval {

/// Parses and fully validates a manifest. Throws ValidationError naming the
/// record and field on any violation; never returns a partial manifest.
DatasetManifest load_manifest(std::string_view bytes);
std::string save_manifest(const DatasetManifest& manifest);

DatasetManifest load_manifest_file(const std::filesystem::path& path);
void save_manifest_file(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Detections are resolved against `labels`; unknown synsets are errors
/// naming the image id.
DetectionsByImage parse_detections(std::string_view bytes, const LabelSpace& labels);
std::string serialize_detections(const DetectionsByImage& detections);

Predictions parse_predictions(std::string_view bytes, const LabelSpace& labels);
std::string serialize_predictions(const Predictions& predictions);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace naeval
