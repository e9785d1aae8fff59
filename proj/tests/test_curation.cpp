// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <random>

#include <json.hpp>

#include "naeval/curation.hpp"
#include "naeval/error.hpp"
#include "naeval/image.hpp"
#include "naeval/io.hpp"
#include "support.hpp"

namespace naeval::curation {
namespace {

using testing::named_labels;
using testing::record;

const LabelSpace& two_labels() {
  static const LabelSpace ls = named_labels({"volleyball", "red fox"});
  return ls;
}

TEST(Proportion, ReferenceMeansReproduced) {
  DatasetManifest ref;
  ref.label_space = two_labels();
  // Volleyball: 0.10 and 0.14. Red fox: 0.60 and 0.76.
  ref.records = {record("v1", ref.label_space, 0, 100, 100, BBox{0, 0, 10, 100}),
                 record("v2", ref.label_space, 0, 100, 100, BBox{0, 0, 14, 100}),
                 record("f1", ref.label_space, 1, 100, 100, BBox{0, 0, 60, 100}),
                 record("f2", ref.label_space, 1, 200, 50, BBox{0, 0, 152, 50})};
  const auto t = avg_object_proportion(ref);
  EXPECT_NEAR(t.at("volleyball"), 0.12, 1e-12);
  EXPECT_NEAR(t.at("red fox"), 0.68, 1e-12);
  EXPECT_THROW(t.at("ant"), ValidationError);

  ref.records.pop_back();
  ref.records.pop_back();
  EXPECT_THROW(avg_object_proportion(ref), ValidationError);
}

TEST(Proportion, FullFrameIsOne) {
  const auto r = record("x", two_labels(), 0, 37, 91, BBox::full(37, 91));
  EXPECT_EQ(object_proportion(r), 1.0);
  EXPECT_THROW(object_proportion(record("y", two_labels(), 0, 3, 3)), ValidationError);
}

TEST(ProportionFilter, StrictBoundary) {
  const auto ls = named_labels({"a"});
  const CategoryProportionTable t(ls, {0.4});
  // 1000x1000 image: 49000 px is 0.049, 50000 px is 0.05 = 0.4 / 8.
  EXPECT_FALSE(proportion_filter(record("d", ls, 0, 1000, 1000, BBox{0, 0, 49, 1000}), t));
  EXPECT_TRUE(proportion_filter(record("k", ls, 0, 1000, 1000, BBox{0, 0, 50, 1000}), t));
  EXPECT_TRUE(proportion_filter(record("f", ls, 0, 9, 9, BBox::full(9, 9)), CategoryProportionTable(ls, {1.0})));
  EXPECT_THROW(proportion_filter(record("k", ls, 0, 10, 10, BBox{0, 0, 5, 5}), t, 0.0), ArgumentError);
  EXPECT_THROW(CategoryProportionTable(ls, {0.0}), ValidationError);
  EXPECT_THROW(CategoryProportionTable(ls, {0.2, 0.3}), ValidationError);
}

TEST(ClassifierFilter, DropsOnlyRecognized) {
  const auto& ls = two_labels();
  EXPECT_FALSE(classifier_filter(testing::peaked_output(ls, 1), ls.id_at(1)));
  EXPECT_TRUE(classifier_filter(testing::peaked_output(ls, 0), ls.id_at(1)));
  // A tie resolves to the lower index.
  const auto tie = ClassifierOutput::validated({0.5, 0.5}, ls, "tie");
  EXPECT_FALSE(classifier_filter(tie, ls.id_at(0)));
  EXPECT_TRUE(classifier_filter(tie, ls.id_at(1)));
}

TEST(Clip, TargetOneGivesTheBox) {
  const BBox box{13, 7, 41, 30};
  const auto c = clip_background(100, 60, box, 1.0);
  EXPECT_EQ(c.rect, box);
  EXPECT_EQ(c.achieved, 1.0);
}

TEST(Clip, CenteredQuarterDoublesEachSide) {
  const auto c = clip_background(100, 100, {45, 45, 55, 55}, 0.25);
  EXPECT_EQ(c.rect, (BBox{40, 40, 60, 60}));
  EXPECT_EQ(c.achieved, 0.25);
  EXPECT_FALSE(c.edge_clamped);
  EXPECT_EQ(c.shortfall, 0.0);
}

TEST(Clip, ShiftsInsideAtEdges) {
  const auto c = clip_background(100, 100, {0, 45, 10, 55}, 0.25);
  EXPECT_EQ(c.rect, (BBox{0, 40, 20, 60}));
  const auto r = clip_background(100, 100, {95, 95, 100, 100}, 0.25);
  EXPECT_EQ(r.rect, (BBox{90, 90, 100, 100}));
}

TEST(Clip, FullImageWhenItAlreadyMeetsTarget) {
  const auto c = clip_background(60, 30, {5, 5, 55, 25}, 0.12);
  EXPECT_EQ(c.rect, BBox::full(60, 30));
  EXPECT_THROW(clip_background(60, 30, {5, 5, 55, 25}, 0.0), ArgumentError);
  EXPECT_THROW(clip_background(60, 30, {5, 5, 55, 25}, 1.5), ArgumentError);
  EXPECT_THROW(clip_background(60, 30, {5, 5, 61, 25}, 0.5), ArgumentError);
}

TEST(Clip, RandomContainmentAndTarget) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> tdist(0.001, 1.0);
  for (int t = 0; t < 5000; ++t) {
    const std::int64_t w = 1 + rng() % 400, h = 1 + rng() % 400;
    const auto x0 = static_cast<std::int64_t>(rng() % w), y0 = static_cast<std::int64_t>(rng() % h);
    const BBox box{x0, y0, x0 + 1 + static_cast<std::int64_t>(rng() % (w - x0)),
                   y0 + 1 + static_cast<std::int64_t>(rng() % (h - y0))};
    const double target = tdist(rng);
    const auto c = clip_background(w, h, box, target);
    ASSERT_TRUE(c.rect.contains(box));
    ASSERT_TRUE(BBox::full(w, h).contains(c.rect));
    const double achieved = static_cast<double>(box.area()) / static_cast<double>(c.rect.area());
    ASSERT_EQ(c.achieved, achieved);
    const bool touches = c.rect.x_min == 0 || c.rect.y_min == 0 || c.rect.x_max == w || c.rect.y_max == h;
    ASSERT_TRUE(achieved >= target || touches) << w << "x" << h << " target " << target;
  }
}

// Hand-traced fixture over a 100x100 frame unless noted.
struct Traced {
  DatasetManifest manifest;
  CategoryProportionTable table;
  std::map<std::string, std::size_t> predicted;
};

Traced traced_fixture() {
  Traced f;
  auto& m = f.manifest;
  m.label_space = two_labels();
  m.provenance = "fixture";
  auto add = [&](std::string id, std::size_t label, std::int64_t w, std::int64_t h, std::optional<BBox> box,
                 std::size_t predicted) {
    m.records.push_back(record(id, m.label_space, label, w, h, box));
    f.predicted[id] = predicted;
  };
  add("r0", 0, 100, 100, BBox{10, 10, 90, 90}, 1);
  m.records.back().flags.multi_category = true;
  add("r1", 0, 100, 100, BBox{0, 0, 10, 10}, 1);      // 0.01 < 0.015
  add("r2", 0, 100, 100, BBox{0, 0, 15, 10}, 0);      // 0.015, recognized
  add("r3", 1, 100, 100, BBox{30, 30, 70, 70}, 0);    // kept
  add("r4", 1, 100, 100, std::nullopt, 1);
  m.records.back().flags.unrecognizable = true;
  add("r5", 1, 100, 100, BBox::full(100, 100), 0);    // kept, full frame
  add("r6", 1, 100, 100, BBox{20, 20, 80, 80}, 1);    // recognized
  add("r7", 0, 100, 100, BBox{0, 45, 20, 55}, 1);     // kept at the left edge
  add("r8", 1, 100, 100, BBox{0, 0, 29, 29}, 0);      // 0.0841 < 0.085
  add("r9", 0, 60, 30, BBox{5, 5, 55, 25}, 1);        // kept, full frame already dense
  f.table = CategoryProportionTable(m.label_space, {0.12, 0.68});
  return f;
}

TEST(BuildPlus, TenRecordHandTrace) {
  auto f = traced_fixture();
  testing::StubRegionClassifier clf([&](std::string_view id, const BBox&) {
    return testing::peaked_output(two_labels(), f.predicted.at(std::string(id)), 0.7);
  });
  const auto res = build_plus_dataset(f.manifest, f.table, clf);
  const std::vector<Verdict> expect{Verdict::dropped_flag,       Verdict::dropped_proportion,
                                    Verdict::dropped_classifier, Verdict::kept,
                                    Verdict::dropped_flag,       Verdict::kept,
                                    Verdict::dropped_classifier, Verdict::kept,
                                    Verdict::dropped_proportion, Verdict::kept};
  ASSERT_EQ(res.decisions.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(res.decisions[i].record_id, "r" + std::to_string(i));
    EXPECT_EQ(res.decisions[i].verdict, expect[i]) << i;
    EXPECT_EQ(res.decisions[i].clip_rect.has_value(), expect[i] == Verdict::kept);
  }
  EXPECT_EQ(clf.calls, 6u);

  // r3: 40 / sqrt(0.68) = 48.5 -> 48, centered at 50.
  EXPECT_EQ(*res.decisions[3].clip_rect, (BBox{26, 26, 74, 74}));
  EXPECT_EQ(*res.decisions[5].clip_rect, BBox::full(100, 100));
  // r7: 20 / sqrt(0.12) = 57.7 -> 57 and 10 / sqrt(0.12) = 28.9 -> 28.
  EXPECT_EQ(*res.decisions[7].clip_rect, (BBox{0, 36, 57, 64}));
  EXPECT_EQ(*res.decisions[9].clip_rect, BBox::full(60, 30));
  EXPECT_DOUBLE_EQ(*res.decisions[3].achieved, 1600.0 / 2304.0);

  ASSERT_EQ(res.manifest.records.size(), 4u);
  const auto& k3 = res.manifest.records[0];
  EXPECT_EQ(k3.id, "r3");
  EXPECT_EQ(k3.width, 48);
  EXPECT_EQ(*k3.object_box, (BBox{4, 4, 44, 44}));
  EXPECT_EQ(k3.path, "images/r3.png");
  EXPECT_EQ(*res.manifest.records[2].object_box, (BBox{0, 9, 20, 19}));
}

TEST(BuildPlus, DeterministicAndIdempotent) {
  auto f = traced_fixture();
  testing::StubRegionClassifier clf([&](std::string_view id, const BBox&) {
    const auto it = f.predicted.find(std::string(id));
    // Curated records keep their ids; default to a wrong answer.
    return testing::peaked_output(two_labels(), it == f.predicted.end() ? 0 : it->second, 0.7);
  });
  const auto a = build_plus_dataset(f.manifest, f.table, clf);
  const auto b = build_plus_dataset(f.manifest, f.table, clf);
  EXPECT_EQ(a.decisions, b.decisions);
  EXPECT_EQ(a.manifest, b.manifest);

  const auto again = build_plus_dataset(a.manifest, f.table, clf);
  for (const auto& d : again.decisions) EXPECT_EQ(d.verdict, Verdict::kept) << d.record_id;
  for (std::size_t i = 0; i < a.manifest.records.size(); ++i) {
    const auto& r = a.manifest.records[i];
    EXPECT_EQ(*again.decisions[i].clip_rect, BBox::full(r.width, r.height));
    EXPECT_EQ(again.manifest.records[i].object_box, r.object_box);
  }
}

TEST(BuildPlus, FullFrameAlwaysWrongKeepsEverything) {
  DatasetManifest m;
  m.label_space = two_labels();
  for (int i = 0; i < 8; ++i) {
    m.records.push_back(record("f" + std::to_string(i), m.label_space, i % 2, 30 + i, 20, BBox::full(30 + i, 20)));
  }
  testing::StubRegionClassifier clf([&](std::string_view id, const BBox&) {
    const auto* r = m.find(id);
    return testing::peaked_output(two_labels(), 1 - r->true_label.index, 0.8);
  });
  const auto res = build_plus_dataset(m, CategoryProportionTable(m.label_space, {0.12, 0.68}), clf);
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    EXPECT_EQ(res.decisions[i].verdict, Verdict::kept);
    EXPECT_EQ(*res.decisions[i].clip_rect, BBox::full(m.records[i].width, 20));
  }
}

TEST(BuildPlus, ErrorsCarryRecordId) {
  DatasetManifest m;
  m.label_space = two_labels();
  m.records = {record("nobox", m.label_space, 0, 10, 10)};
  testing::StubRegionClassifier ok([](std::string_view, const BBox&) { return testing::peaked_output(two_labels(), 1); });
  const CategoryProportionTable t(m.label_space, {0.12, 0.68});
  try {
    build_plus_dataset(m, t, ok);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.subject(), "nobox");
  }
  m.records = {record("boom", m.label_space, 0, 10, 10, BBox{0, 0, 9, 9})};
  testing::StubRegionClassifier bad([](std::string_view, const BBox&) -> ClassifierOutput {
    throw std::runtime_error("timeout");
  });
  try {
    build_plus_dataset(m, t, bad);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(BuildPlus, ExportWritesClippedPixelsAndAudit) {
  auto f = traced_fixture();
  testing::StubRegionClassifier clf([&](std::string_view id, const BBox&) {
    return testing::peaked_output(two_labels(), f.predicted.at(std::string(id)), 0.7);
  });
  const auto res = build_plus_dataset(f.manifest, f.table, clf);
  auto make = [](const ImageRecord& r) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(r.width * r.height * 3));
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 31 + r.id.size());
    return imaging::PixelImage(r.width, r.height, std::move(px));
  };
  testing::TempDir dir;
  export_clipped_images(f.manifest, res, make, dir.path());
  const auto got = imaging::load_image(dir.path() / clipped_file_name("r7"));
  EXPECT_EQ(got, imaging::crop(make(*f.manifest.find("r7")), BBox{0, 36, 57, 64}));
  EXPECT_FALSE(std::filesystem::exists(dir.path() / clipped_file_name("r6")));
  EXPECT_EQ(clipped_file_name("a/b"), "a_b.png");

  const auto audit = nlohmann::json::parse(serialize_audit(res.decisions));
  ASSERT_EQ(audit.size(), 10u);
  EXPECT_EQ(audit[1]["verdict"], "dropped_proportion");
  EXPECT_TRUE(audit[1]["clip_rect"].is_null());
  EXPECT_EQ(audit[3]["clip_rect"], nlohmann::json({26, 26, 74, 74}));
}

}  // namespace
}  // namespace naeval::curation
