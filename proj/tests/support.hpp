// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// Fixtures and independent oracles shared by the unit and acceptance tests.
// Oracles here deliberately avoid the library's own algorithms.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "naeval/classifier.hpp"
#include "naeval/types.hpp"

namespace naeval::testing {

inline std::string synset_for(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "n%08zu", i);
  return buf;
}

/// n categories "n00000000".."n{n-1}", names "category i".
inline LabelSpace make_labels(std::size_t n) {
  std::vector<Category> cats;
  for (std::size_t i = 0; i < n; ++i) cats.push_back({synset_for(i), "category " + std::to_string(i)});
  return LabelSpace(std::move(cats));
}

inline LabelSpace named_labels(const std::vector<std::string>& names) {
  std::vector<Category> cats;
  for (const auto& n : names) cats.push_back({n, n});
  return LabelSpace(std::move(cats));
}

inline Detection det(const LabelSpace& labels, std::string_view synset, double conf,
                     BBox box = {0, 0, 10, 10}) {
  return {box, *labels.find(synset), conf};
}

/// Random detections: up to max_dets over the first max_cats categories,
/// confidences on a coarse grid so ties are common.
inline std::vector<Detection> random_detections(std::mt19937_64& rng, const LabelSpace& labels,
                                                std::size_t max_dets, std::size_t max_cats) {
  std::uniform_int_distribution<std::size_t> count(0, max_dets);
  std::uniform_int_distribution<std::size_t> cat(0, std::min(max_cats, labels.size()) - 1);
  std::uniform_int_distribution<int> grid(0, 20);
  std::vector<Detection> out(count(rng));
  for (auto& d : out) {
    d.category = labels.id_at(cat(rng));
    d.confidence = grid(rng) / 20.0;
    d.bbox = {0, 0, 1 + grid(rng), 1 + grid(rng)};
  }
  return out;
}

/// Brute force: per category maximum, then repeated selection of the
/// highest confidence, lowest label index among the remaining categories.
inline std::vector<std::pair<std::size_t, double>> oracle_ranked(const std::vector<Detection>& dets) {
  std::map<std::size_t, double> best;
  for (const auto& d : dets) {
    auto it = best.find(d.category.index);
    if (it == best.end() || d.confidence > it->second) best[d.category.index] = d.confidence;
  }
  std::vector<std::pair<std::size_t, double>> out;
  while (!best.empty()) {
    auto pick = best.begin();
    for (auto it = best.begin(); it != best.end(); ++it) {
      if (it->second > pick->second) pick = it;  // map order gives the lowest index on ties
    }
    out.push_back(*pick);
    best.erase(pick);
  }
  return out;
}

inline ImageRecord record(std::string id, const LabelSpace& labels, std::size_t label,
                          std::int64_t w, std::int64_t h, std::optional<BBox> box = std::nullopt) {
  ImageRecord r;
  r.id = std::move(id);
  r.path = "images/" + r.id + ".png";
  r.width = w;
  r.height = h;
  r.true_label = labels.id_at(label);
  r.object_box = box;
  return r;
}

/// One-hot-ish normalized output: `p` on `top`, the rest spread evenly.
inline ClassifierOutput peaked_output(const LabelSpace& labels, std::size_t top, double p = 0.9) {
  std::vector<double> v(labels.size(), labels.size() > 1 ? (1.0 - p) / double(labels.size() - 1) : 0.0);
  v[top] = labels.size() > 1 ? p : 1.0;
  return ClassifierOutput::validated(std::move(v), labels, "fixture");
}

/// Region classifier answering from a per-(image, box) table or a function.
class StubRegionClassifier final : public RegionClassifier {
 public:
  using Fn = std::function<ClassifierOutput(std::string_view, const BBox&)>;
  explicit StubRegionClassifier(Fn fn) : fn_(std::move(fn)) {}
  ClassifierOutput classify_region(std::string_view id, const BBox& box) override {
    ++calls;
    return fn_(id, box);
  }
  std::size_t calls = 0;

 private:
  Fn fn_;
};

/// Fresh temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("naeval-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace naeval::testing
