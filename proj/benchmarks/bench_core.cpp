// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cstdio>
#include <random>

#include "naeval/curation.hpp"
#include "naeval/det2cls.hpp"
#include "naeval/image.hpp"
#include "naeval/ratio.hpp"
#include "naeval/scale.hpp"

namespace {

using namespace naeval;

LabelSpace labels(std::size_t n) {
  std::vector<Category> cats;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "n%08zu", i);
    cats.push_back({buf, buf});
  }
  return LabelSpace(std::move(cats));
}

DetectionsByImage random_detections(const LabelSpace& ls, std::size_t images, std::size_t per_image) {
  std::mt19937_64 rng(1);
  DetectionsByImage out;
  for (std::size_t i = 0; i < images; ++i) {
    auto& list = out["img" + std::to_string(i)];
    for (std::size_t d = 0; d < per_image; ++d) {
      list.push_back({BBox{0, 0, 10, 10}, ls.id_at(rng() % ls.size()), static_cast<double>(rng() % 1000) / 1000.0});
    }
  }
  return out;
}

void BM_PredictBatch(benchmark::State& state) {
  const auto ls = labels(200);
  const auto dets = random_detections(ls, 1000, 20);
  std::vector<std::string> ids;
  for (const auto& [id, _] : dets) ids.push_back(id);
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(det2cls::predict_batch(dets, ids, 5, ls, det2cls::PaddingSeed{17}, threads));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ids.size()));
}
BENCHMARK(BM_PredictBatch)->Arg(1)->Arg(4);

void BM_AssignSf(benchmark::State& state) {
  for (auto _ : state) {
    for (int w = 1; w <= 224; ++w) benchmark::DoNotOptimize(imaging::assign_sf(w, 224 - w / 2));
  }
  state.SetItemsProcessed(state.iterations() * 224);
}
BENCHMARK(BM_AssignSf);

void BM_Resize(benchmark::State& state) {
  const auto side = state.range(0);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(side * side * 3));
  std::mt19937 rng(2);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng());
  const imaging::PixelImage img(side, side, std::move(px));
  for (auto _ : state) benchmark::DoNotOptimize(imaging::resize(img, 224, 224));
}
BENCHMARK(BM_Resize)->Arg(112)->Arg(500);

void BM_ClipBackground(benchmark::State& state) {
  for (auto _ : state) {
    for (std::int64_t i = 1; i < 100; ++i) {
      benchmark::DoNotOptimize(curation::clip_background(400, 300, BBox{i, i, i + 50, i + 40}, 0.12));
    }
  }
}
BENCHMARK(BM_ClipBackground);

void BM_FormatPercent(benchmark::State& state) {
  std::uint64_t n = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(format_percent(Ratio{n % 7373, 7373}, 2));
    ++n;
  }
}
BENCHMARK(BM_FormatPercent);

}  // namespace

BENCHMARK_MAIN();
