// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/scale.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "naeval/error.hpp"

namespace naeval::imaging {

ScaleFactor ScaleFactor::from_exponent(int k) {
  if (k < 0 || k > kMaxExponent) throw ArgumentError("scale factor exponent must be in [0, 4]");
  return ScaleFactor(k);
}

std::string ScaleFactor::label() const {
  return exponent_ == 0 ? "1" : "1/" + std::to_string(denominator());
}

ObjectDims scaled_object_dims(std::int64_t image_w, std::int64_t image_h, const BBox& box,
                              std::int64_t base) {
  const auto b = static_cast<double>(base);
  return {static_cast<double>(box.width()) * b / static_cast<double>(image_w),
          static_cast<double>(box.height()) * b / static_cast<double>(image_h)};
}

SfAssignment assign_sf(double w, double h, std::int64_t base) {
  const auto b = static_cast<double>(base);
  if (!(w > 0.0 && w <= b && h > 0.0 && h <= b)) {
    throw ArgumentError("object dims must lie in (0, base]");
  }
  // Multiplying by powers of two is exact, so the interval tests are exact.
  const double m = std::max(w, h);
  for (int k = 0; k <= ScaleFactor::kMaxExponent; ++k) {
    const double lo = m * static_cast<double>(std::int64_t{2} << k);  // m * 2^(k+1)
    const double hi = m * static_cast<double>(std::int64_t{1} << k);  // m * 2^k
    if (b < lo && hi <= b) return {ScaleFactor::from_exponent(k), false};
  }
  return {ScaleFactor::from_exponent(ScaleFactor::kMaxExponent), true};
}

ScaleFactor compute_sf(double w, double h, std::int64_t base) { return assign_sf(w, h, base).sf; }

std::int64_t bucket_input_size(ScaleFactor sf, std::int64_t base) {
  if (base <= 0 || base % 16 != 0) throw ArgumentError("base must be a positive multiple of 16");
  return base / sf.denominator();
}

StratifiedReport stratified_eval(const DatasetManifest& manifest, const Predictions& predictions,
                                 std::int64_t base) {
  StratifiedReport report;
  report.base = base;
  for (int k = 0; k < ScaleFactor::kBucketCount; ++k) {
    const auto sf = ScaleFactor::from_exponent(k);
    report.buckets[static_cast<std::size_t>(k)] = {sf, bucket_input_size(sf, base), {}};
  }
  for (const auto& r : manifest.records) {
    if (!r.object_box) throw ValidationError(r.id, "bbox", "record has no object box");
    auto it = predictions.find(r.id);
    if (it == predictions.end()) throw ValidationError(r.id, "predictions", "no prediction for record");
    const auto dims = scaled_object_dims(r.width, r.height, *r.object_box);
    const auto a = assign_sf(dims.w, dims.h);
    auto& row = report.buckets[static_cast<std::size_t>(a.sf.exponent())];
    const bool hit = it->second.hit_within(r.true_label, 1);
    row.top1 += Ratio{hit ? 1u : 0u, 1};
    if (a.clamped) ++report.clamped;
  }
  for (const auto& row : report.buckets) report.all += row.top1;
  return report;
}

std::string format_stratified(const StratifiedReport& report) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-6s %8s %12s %14s\n", "SF", "Number", "Input", "Accuracy(%)");
  out << line;
  for (const auto& row : report.buckets) {
    const auto input = std::to_string(row.input_size) + "x" + std::to_string(row.input_size);
    std::snprintf(line, sizeof line, "%-6s %8llu %12s %14s\n", row.sf.label().c_str(),
                  static_cast<unsigned long long>(row.top1.total), input.c_str(),
                  format_percent(row.top1).c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-6s %8llu %12s %14s\n", "all",
                static_cast<unsigned long long>(report.all.total), "",
                format_percent(report.all).c_str());
  out << line;
  if (report.clamped > 0) out << "clamped into 1/16: " << report.clamped << "\n";
  return out.str();
}

}  // namespace naeval::imaging
