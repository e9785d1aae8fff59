// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/curation.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "naeval/error.hpp"

namespace naeval::curation {

using detail::json;

CategoryProportionTable::CategoryProportionTable(LabelSpace labels, std::vector<double> means)
    : labels_(std::move(labels)), means_(std::move(means)) {
  if (means_.size() != labels_.size()) {
    throw ValidationError("proportion table", "", "one mean per category required");
  }
  for (std::size_t i = 0; i < means_.size(); ++i) {
    if (!(means_[i] > 0.0 && means_[i] <= 1.0)) {
      throw ValidationError(labels_.at(i).synset, "proportion", "mean outside (0, 1]");
    }
  }
}

double CategoryProportionTable::at(std::string_view synset) const {
  auto id = labels_.find(synset);
  if (!id) throw ValidationError(std::string(synset), "proportion", "category missing from table");
  return means_[id->index];
}

double object_proportion(const ImageRecord& record) {
  if (!record.object_box) throw ValidationError(record.id, "bbox", "record has no object box");
  return static_cast<double>(record.object_box->area()) /
         (static_cast<double>(record.width) * static_cast<double>(record.height));
}

CategoryProportionTable avg_object_proportion(const DatasetManifest& reference) {
  const auto& labels = reference.label_space;
  std::vector<double> sums(labels.size(), 0.0);
  std::vector<std::size_t> counts(labels.size(), 0);
  for (const auto& r : reference.records) {
    sums[r.true_label.index] += object_proportion(r);
    ++counts[r.true_label.index];
  }
  std::vector<double> means(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (counts[i] == 0) {
      throw ValidationError(labels.at(i).synset, "reference", "category has no boxed records");
    }
    means[i] = sums[i] / static_cast<double>(counts[i]);
  }
  return {labels, std::move(means)};
}

bool proportion_filter(const ImageRecord& record, const CategoryProportionTable& table,
                       double factor) {
  if (!(factor > 0.0)) throw ArgumentError("proportion factor must be positive");
  return !(object_proportion(record) < table.at(record.true_label.synset) / factor);
}

bool classifier_filter(const ClassifierOutput& output, const CategoryId& true_label) {
  return output.argmax_index() != true_label.index;
}

bool classifier_filter(const imaging::PixelImage& cropped, const CategoryId& true_label,
                       Classifier& classifier) {
  const auto side = classifier.input_size();
  return classifier_filter(classifier.classify(imaging::resize(cropped, side, side)), true_label);
}

namespace {

// Places a span of `size` around [lo, hi) centered, then shifts into [0, limit).
std::int64_t place(std::int64_t lo, std::int64_t hi, std::int64_t size, std::int64_t limit) {
  std::int64_t start = lo - (size - (hi - lo)) / 2;
  start = std::max<std::int64_t>(start, 0);
  if (start + size > limit) start = limit - size;
  return start;
}

}  // namespace

ClipResult clip_background(std::int64_t image_w, std::int64_t image_h, const BBox& box,
                           double target) {
  if (!(target > 0.0 && target <= 1.0)) throw ArgumentError("target proportion must be in (0, 1]");
  if (!box.fits(image_w, image_h)) throw ArgumentError("box outside image");

  const auto box_area = static_cast<double>(box.area());
  ClipResult out;
  if (box_area >= target * static_cast<double>(image_w) * static_cast<double>(image_h)) {
    out.rect = BBox::full(image_w, image_h);
  } else {
    const double scale = 1.0 / std::sqrt(target);
    std::int64_t w = std::max<std::int64_t>(
        box.width(), static_cast<std::int64_t>(std::floor(box.width() * scale + 1e-9)));
    std::int64_t h = std::max<std::int64_t>(
        box.height(), static_cast<std::int64_t>(std::floor(box.height() * scale + 1e-9)));
    // Rounding must never push the proportion below the target.
    while (box_area < target * static_cast<double>(w) * static_cast<double>(h)) {
      if (w - box.width() >= h - box.height() && w > box.width()) {
        --w;
      } else if (h > box.height()) {
        --h;
      } else {
        break;
      }
    }
    if (w > image_w || h > image_h) out.edge_clamped = true;
    w = std::min(w, image_w);
    h = std::min(h, image_h);
    const auto x = place(box.x_min, box.x_max, w, image_w);
    const auto y = place(box.y_min, box.y_max, h, image_h);
    out.rect = {x, y, x + w, y + h};
  }
  out.achieved = box_area / static_cast<double>(out.rect.area());
  out.shortfall = std::max(0.0, target - out.achieved);
  return out;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::kept: return "kept";
    case Verdict::dropped_proportion: return "dropped_proportion";
    case Verdict::dropped_classifier: return "dropped_classifier";
    case Verdict::dropped_flag: return "dropped_flag";
  }
  return "unknown";
}

std::string clipped_file_name(std::string_view record_id) {
  std::string name(record_id);
  std::replace_if(name.begin(), name.end(), [](char c) { return c == '/' || c == '\\'; }, '_');
  return name + ".png";
}

CurationResult build_plus_dataset(const DatasetManifest& manifest,
                                  const CategoryProportionTable& table,
                                  RegionClassifier& classifier, const CurationOptions& options) {
  CurationResult result;
  result.manifest.label_space = manifest.label_space;
  result.manifest.provenance = manifest.provenance.empty() ? "curated" : manifest.provenance + "+curated";
  result.decisions.reserve(manifest.records.size());

  for (const auto& r : manifest.records) {
    CurationDecision d{r.id, Verdict::kept, std::nullopt, std::nullopt, std::nullopt};
    if (r.flags.any()) {
      d.verdict = Verdict::dropped_flag;
      result.decisions.push_back(std::move(d));
      continue;
    }
    if (!r.object_box) {
      throw ValidationError(r.id, "bbox", "record is neither annotated nor flagged");
    }
    if (!proportion_filter(r, table, options.factor)) {
      d.verdict = Verdict::dropped_proportion;
      result.decisions.push_back(std::move(d));
      continue;
    }
    ClassifierOutput output;
    try {
      output = classifier.classify_region(r.id, *r.object_box);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(r.id + ": classifier failed: " + e.what());
    }
    if (output.probabilities().size() != manifest.label_space.size()) {
      throw ValidationError(r.id, "probabilities", "output does not cover the label space");
    }
    if (!classifier_filter(output, r.true_label)) {
      d.verdict = Verdict::dropped_classifier;
      result.decisions.push_back(std::move(d));
      continue;
    }

    const double target = table.at(r.true_label.synset);
    const auto clip = clip_background(r.width, r.height, *r.object_box, target);
    d.clip_rect = clip.rect;
    d.target = target;
    d.achieved = clip.achieved;
    result.decisions.push_back(std::move(d));

    ImageRecord kept;
    kept.id = r.id;
    kept.path = (options.image_dir / clipped_file_name(r.id)).generic_string();
    kept.width = clip.rect.width();
    kept.height = clip.rect.height();
    kept.true_label = r.true_label;
    const auto& b = *r.object_box;
    kept.object_box = BBox{b.x_min - clip.rect.x_min, b.y_min - clip.rect.y_min,
                           b.x_max - clip.rect.x_min, b.y_max - clip.rect.y_min};
    result.manifest.records.push_back(std::move(kept));
  }
  result.manifest.validate();
  return result;
}

void export_clipped_images(
    const DatasetManifest& source, const CurationResult& result,
    const std::function<imaging::PixelImage(const ImageRecord&)>& load,
    const std::filesystem::path& out_dir) {
  for (const auto& d : result.decisions) {
    if (d.verdict != Verdict::kept) continue;
    const auto* rec = source.find(d.record_id);
    if (rec == nullptr) throw ValidationError(d.record_id, "", "decision for unknown record");
    const auto image = load(*rec);
    if (image.width() != rec->width || image.height() != rec->height) {
      throw ValidationError(rec->id, "width/height", "image file size differs from manifest");
    }
    imaging::save_png(out_dir / clipped_file_name(rec->id), imaging::crop(image, *d.clip_rect));
  }
}

std::string serialize_audit(const std::vector<CurationDecision>& decisions) {
  json arr = json::array();
  for (const auto& d : decisions) {
    arr.push_back({{"id", d.record_id},
                   {"verdict", std::string(to_string(d.verdict))},
                   {"clip_rect", d.clip_rect ? detail::bbox_to_json(*d.clip_rect) : json(nullptr)},
                   {"target", d.target ? json(*d.target) : json(nullptr)},
                   {"achieved", d.achieved ? json(*d.achieved) : json(nullptr)}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace naeval::curation
