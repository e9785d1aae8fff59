// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/eval.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "json_util.hpp"
#include "naeval/error.hpp"

namespace naeval::eval {

using detail::json;

AccuracyReport topk_accuracy(const Predictions& predictions, const DatasetManifest& manifest,
                             const std::vector<std::size_t>& ks) {
  if (ks.empty()) throw ArgumentError("at least one k is required");
  if (std::find(ks.begin(), ks.end(), 0u) != ks.end()) throw ArgumentError("k must be positive");
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());

  AccuracyReport report;
  report.per_category_k = *std::min_element(ks.begin(), ks.end());
  for (auto k : ks) {
    report.top_k[k] = {};
    report.padded_hits[k] = 0;
  }
  for (const auto& c : manifest.label_space.categories()) report.per_category[c.synset] = {};

  for (const auto& r : manifest.records) {
    auto it = predictions.find(r.id);
    if (it == predictions.end()) throw ValidationError(r.id, "predictions", "no prediction");
    const auto& slots = it->second.slots;
    if (slots.size() < max_k) {
      throw ValidationError(r.id, "slots", "fewer than " + std::to_string(max_k) + " slots");
    }
    // Position of the true label, if any. Categories are distinct per prediction.
    std::size_t pos = slots.size();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i].category.synset == r.true_label.synset) {
        pos = i;
        break;
      }
    }
    for (auto& [k, ratio] : report.top_k) {
      const bool hit = pos < k;
      ratio += Ratio{hit ? 1u : 0u, 1};
      if (hit && slots[pos].provenance == Provenance::padded) ++report.padded_hits[k];
    }
    report.per_category[r.true_label.synset] += Ratio{pos < report.per_category_k ? 1u : 0u, 1};
  }
  return report;
}

std::set<std::string> SubsetPartition::exactly_one() const {
  std::set<std::string> out = first_only;
  out.insert(second_only.begin(), second_only.end());
  return out;
}

SubsetPartition subset_partition(const Predictions& responses_a1, const Predictions& responses_a2,
                                 const DatasetManifest& manifest) {
  auto correct = [](const Predictions& responses, const ImageRecord& r, const char* who) {
    auto it = responses.find(r.id);
    if (it == responses.end() || it->second.slots.empty()) {
      throw ValidationError(r.id, who, "annotator did not answer this image");
    }
    return it->second.hit_within(r.true_label, 1);
  };
  SubsetPartition p;
  for (const auto& r : manifest.records) {
    const bool a1 = correct(responses_a1, r, "a1");
    const bool a2 = correct(responses_a2, r, "a2");
    if (a1 && a2) {
      p.both.insert(r.id);
    } else if (a1) {
      p.first_only.insert(r.id);
    } else if (a2) {
      p.second_only.insert(r.id);
    } else {
      p.neither.insert(r.id);
    }
  }
  return p;
}

std::map<std::string, std::optional<Ratio>> subset_accuracy(const Predictions& predictions,
                                                            const SubsetPartition& partition,
                                                            const DatasetManifest& manifest) {
  auto score = [&](const std::set<std::string>& ids) -> std::optional<Ratio> {
    if (ids.empty()) return std::nullopt;
    Ratio r;
    for (const auto& id : ids) {
      const auto* rec = manifest.find(id);
      if (rec == nullptr) throw ValidationError(id, "manifest", "subset id not in manifest");
      auto it = predictions.find(id);
      if (it == predictions.end()) throw ValidationError(id, "predictions", "no prediction");
      r += Ratio{it->second.hit_within(rec->true_label, 1) ? 1u : 0u, 1};
    }
    return r;
  };
  return {{"A", score(partition.both)},
          {"B", score(partition.exactly_one())},
          {"C", score(partition.neither)}};
}

ComparisonTable comparison_table(const std::vector<std::pair<std::string, AccuracyReport>>& rows) {
  std::set<std::size_t> ks;
  for (const auto& [name, report] : rows) {
    for (const auto& [k, ratio] : report.top_k) ks.insert(k);
  }
  if (ks.empty()) ks.insert(1);

  std::vector<std::string> header{"Method Name"};
  for (auto k : ks) header.push_back("Top-" + std::to_string(k) + " Acc(%)");
  std::vector<std::vector<std::string>> cells{header};
  json jrows = json::array();
  for (const auto& [name, report] : rows) {
    std::vector<std::string> line{name};
    json jr = {{"name", name}};
    json acc = json::object();
    for (auto k : ks) {
      auto it = report.top_k.find(k);
      const std::string value = it == report.top_k.end() ? "-" : format_percent(it->second);
      line.push_back(value);
      acc["top" + std::to_string(k)] = value;
    }
    jr["accuracy"] = std::move(acc);
    jrows.push_back(std::move(jr));
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }
  std::ostringstream text;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) text << "  ";
      if (c == 0) {
        text << line[c] << std::string(widths[c] - line[c].size(), ' ');
      } else {
        text << std::string(widths[c] - line[c].size(), ' ') << line[c];
      }
    }
    text << "\n";
  }
  return {text.str(), jrows.dump(2) + "\n"};
}

std::pair<DatasetManifest, DatasetManifest> intersect_manifests(const DatasetManifest& a,
                                                                const DatasetManifest& b) {
  std::unordered_set<std::string> ids_a;
  for (const auto& r : a.records) ids_a.insert(r.id);
  std::unordered_set<std::string> common;
  for (const auto& r : b.records) {
    if (ids_a.count(r.id)) common.insert(r.id);
  }
  auto restrict = [&](const DatasetManifest& m) {
    DatasetManifest out{m.label_space, {}, m.provenance};
    for (const auto& r : m.records) {
      if (common.count(r.id)) out.records.push_back(r);
    }
    return out;
  };
  return {restrict(a), restrict(b)};
}

}  // namespace naeval::eval
