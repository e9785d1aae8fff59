// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "naeval/image.hpp"
#include "naeval/types.hpp"

namespace naeval {

/// Softmax probabilities over a label space, dense by label index.
class ClassifierOutput {
 public:
  static constexpr double kSumTolerance = 1e-6;

  /// Throws ValidationError naming `subject` unless every value is in [0, 1],
  /// the size matches `labels`, and the values sum to 1 within kSumTolerance.
  static ClassifierOutput validated(std::vector<double> probabilities, const LabelSpace& labels,
                                    const std::string& subject);

  /// Sparse form keyed by synset; absent categories get probability 0.
  /// Unknown synsets are validation errors.
  static ClassifierOutput from_synsets(const std::map<std::string, double>& probabilities,
                                       const LabelSpace& labels, const std::string& subject);

  const std::vector<double>& probabilities() const noexcept { return probabilities_; }
  double at(const CategoryId& id) const { return probabilities_.at(id.index); }

  /// Highest probability; ties go to the lowest label index.
  std::size_t argmax_index() const noexcept;
  double max_probability() const noexcept { return probabilities_[argmax_index()]; }

  friend bool operator==(const ClassifierOutput&, const ClassifierOutput&) = default;

 private:
  std::vector<double> probabilities_;
};

/// An external image classifier. Callers resize inputs to input_size().
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::int64_t input_size() const = 0;
  virtual ClassifierOutput classify(const imaging::PixelImage& image) = 0;
};

/// Classifies a region of a named image.
class RegionClassifier {
 public:
  virtual ~RegionClassifier() = default;
  virtual ClassifierOutput classify_region(std::string_view image_id, const BBox& box) = 0;
};

/// Crops the region from the source image, resizes it to the classifier's
/// declared square input size and dispatches it.
class CroppingRegionClassifier final : public RegionClassifier {
 public:
  using ImageSource = std::function<imaging::PixelImage(std::string_view image_id)>;

  CroppingRegionClassifier(Classifier& classifier, ImageSource source)
      : classifier_(classifier), source_(std::move(source)) {}

  ClassifierOutput classify_region(std::string_view image_id, const BBox& box) override;

 private:
  Classifier& classifier_;
  ImageSource source_;
  std::string cached_id_;
  imaging::PixelImage cached_image_;
};

/// Replays previously recorded classifier outputs. File format:
///   {image_id: [{bbox: [x_min, y_min, x_max, y_max], probabilities: {synset: p}}]}
class RecordedRegionClassifier final : public RegionClassifier {
 public:
  static RecordedRegionClassifier parse(std::string_view bytes, const LabelSpace& labels);

  void record(const std::string& image_id, const BBox& box, ClassifierOutput output);
  std::string serialize(const LabelSpace& labels) const;

  /// Throws Error when no output was recorded for (image_id, box).
  ClassifierOutput classify_region(std::string_view image_id, const BBox& box) override;

 private:
  struct Entry {
    BBox box;
    ClassifierOutput output;
  };
  std::map<std::string, std::vector<Entry>, std::less<>> entries_;
};

}  // namespace naeval
