// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "naeval/ratio.hpp"
#include "naeval/types.hpp"

namespace naeval::eval {

struct AccuracyReport {
  std::map<std::size_t, Ratio> top_k;
  /// Correct images whose first matching slot within k was padding.
  std::map<std::size_t, std::uint64_t> padded_hits;
  /// Per-category (correct, total) at the smallest requested k.
  std::size_t per_category_k = 1;
  std::map<std::string, Ratio> per_category;
};

/// An image is correct at k iff its true label is in the first k slots.
/// Throws ValidationError naming an id that lacks a prediction or has fewer
/// than max(ks) slots, and ArgumentError for an empty or zero k list.
AccuracyReport topk_accuracy(const Predictions& predictions, const DatasetManifest& manifest,
                             const std::vector<std::size_t>& ks);

/// Test images split by two annotators' top-1 correctness.
struct SubsetPartition {
  std::set<std::string> both;        // A
  std::set<std::string> first_only;  // B, annotator 1 correct
  std::set<std::string> second_only; // B, annotator 2 correct
  std::set<std::string> neither;     // C

  std::set<std::string> exactly_one() const;
  std::size_t size() const noexcept {
    return both.size() + first_only.size() + second_only.size() + neither.size();
  }
};

/// Throws ValidationError naming an image either annotator did not answer.
SubsetPartition subset_partition(const Predictions& responses_a1, const Predictions& responses_a2,
                                 const DatasetManifest& manifest);

/// Top-1 accuracy within A, B and C (keys "A", "B", "C"). Empty subsets map
/// to std::nullopt. Throws ValidationError for an id without a prediction.
std::map<std::string, std::optional<Ratio>> subset_accuracy(const Predictions& predictions,
                                                            const SubsetPartition& partition,
                                                            const DatasetManifest& manifest);

struct ComparisonTable {
  std::string text;
  std::string json;
};

/// Rows in input order, percentages to 2 decimals (half-to-even). Columns are
/// the union of k values across reports, "Top-1" only when there are none.
ComparisonTable comparison_table(const std::vector<std::pair<std::string, AccuracyReport>>& rows);

/// Restricts two manifests to their common record ids (in each one's order).
std::pair<DatasetManifest, DatasetManifest> intersect_manifests(const DatasetManifest& a,
                                                                const DatasetManifest& b);

}  // namespace naeval::eval
