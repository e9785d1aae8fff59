// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// naeval command line. Every subcommand reads JSON artifacts, runs one
// pipeline stage and writes JSON (to --out, or stdout).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "naeval/classifier.hpp"
#include "naeval/curation.hpp"
#include "naeval/det2cls.hpp"
#include "naeval/error.hpp"
#include "naeval/eval.hpp"
#include "naeval/image.hpp"
#include "naeval/inference.hpp"
#include "naeval/io.hpp"
#include "naeval/rerank.hpp"
#include "naeval/scale.hpp"
#include "naeval/service.hpp"

namespace fs = std::filesystem;
using namespace naeval;

namespace {

struct LoadedManifest {
  DatasetManifest manifest;
  fs::path root;  // directory of the manifest file
};

LoadedManifest load(const std::string& path) {
  return {load_manifest_file(path), fs::absolute(path).parent_path()};
}

fs::path image_path(const LoadedManifest& m, const ImageRecord& r) {
  fs::path p = r.path;
  return p.is_relative() ? m.root / p : p;
}

void emit(const std::optional<std::string>& out, const std::string& bytes) {
  if (out) {
    write_file(*out, bytes);
  } else {
    std::cout << bytes;
  }
}

std::vector<std::string> ids_of(const DatasetManifest& m) {
  std::vector<std::string> ids;
  ids.reserve(m.records.size());
  for (const auto& r : m.records) ids.push_back(r.id);
  return ids;
}

/// Region classifier from either a recorded file or a live endpoint.
struct RegionClassifierChoice {
  std::optional<RecordedRegionClassifier> recorded;
  std::unique_ptr<inference::HttpClassifier> http;
  std::unique_ptr<CroppingRegionClassifier> cropping;

  RegionClassifier& get() {
    if (recorded) return *recorded;
    return *cropping;
  }
};

void make_region_classifier(RegionClassifierChoice& out, inference::InferenceGateway& gateway,
                            const LoadedManifest& m, const std::optional<std::string>& endpoint,
                            const std::optional<std::string>& file, std::int64_t input_size) {
  if (file) {
    out.recorded = RecordedRegionClassifier::parse(read_file(*file), m.manifest.label_space);
    return;
  }
  if (!endpoint) throw ArgumentError("one of --classifier-endpoint or --classifier-file is required");
  out.http = std::make_unique<inference::HttpClassifier>(
      gateway, inference::ModelEndpoint::make(inference::ModelKind::classifier, *endpoint,
                                              m.manifest.label_space, input_size));
  out.cropping = std::make_unique<CroppingRegionClassifier>(*out.http, [&m](std::string_view id) {
    const auto* r = m.manifest.find(id);
    if (r == nullptr) throw ValidationError(std::string(id), "", "not in manifest");
    return imaging::load_image(image_path(m, *r));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"naeval: detector-to-classifier evaluation toolkit"};
  app.require_subcommand(1);

  inference::GatewayOptions gateway_options;
  std::string cache_dir;
  app.add_option("--cache-dir", cache_dir, "Response cache for remote models (else NAEVAL_CACHE_DIR)");

  // det2cls
  auto* det = app.add_subcommand("det2cls", "Top-k classification from detector output");
  std::string det_manifest, det_detections;
  std::size_t det_k = 5;
  std::uint64_t det_seed = 0;
  std::size_t det_threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::string> det_out;
  det->add_option("--manifest", det_manifest)->required();
  det->add_option("--detections", det_detections, "Detections JSON file or detector URL")->required();
  det->add_option("-k", det_k)->check(CLI::PositiveNumber);
  det->add_option("--seed", det_seed);
  det->add_option("--threads", det_threads)->check(CLI::PositiveNumber);
  det->add_option("--out", det_out);

  // rerank
  auto* rr = app.add_subcommand("rerank", "Classify region proposals and rank by confidence");
  std::string rr_manifest, rr_proposals;
  std::optional<std::string> rr_endpoint, rr_file, rr_out;
  std::int64_t rr_input = 224;
  std::size_t rr_k = 5;
  std::uint64_t rr_seed = 0;
  rerank::RerankOptions rr_opts;
  rr->add_option("--manifest", rr_manifest)->required();
  rr->add_option("--proposals", rr_proposals, "Proposals JSON file or proposer URL")->required();
  auto* rr_ep = rr->add_option("--classifier-endpoint", rr_endpoint);
  auto* rr_cf = rr->add_option("--classifier-file", rr_file, "Recorded classifier outputs per box");
  rr_ep->excludes(rr_cf);
  rr->add_option("--classifier-input-size", rr_input)->check(CLI::PositiveNumber);
  rr->add_option("-k", rr_k)->check(CLI::PositiveNumber);
  rr->add_option("--min-side", rr_opts.min_side)->check(CLI::NonNegativeNumber);
  rr->add_option("--margin", rr_opts.margin)->check(CLI::NonNegativeNumber);
  rr->add_option("--top-n", rr_opts.top_n)->check(CLI::PositiveNumber);
  rr->add_option("--seed", rr_seed);
  rr->add_option("--out", rr_out);

  // crop
  auto* cr = app.add_subcommand("crop", "Crop annotated objects into a derived dataset");
  std::string cr_manifest, cr_out;
  cr->add_option("--manifest", cr_manifest)->required();
  cr->add_option("--out-dir", cr_out)->required();

  // stratify
  auto* st = app.add_subcommand("stratify", "Accuracy per object scale factor");
  std::string st_manifest, st_predictions;
  std::int64_t st_base = imaging::kCanonicalBase;
  st->add_option("--manifest", st_manifest)->required();
  st->add_option("--predictions", st_predictions)->required();
  st->add_option("--base", st_base)->check(CLI::IsMember({224, 448}));

  // curate
  auto* cu = app.add_subcommand("curate", "Filter and background-clip a dataset");
  std::string cu_manifest, cu_reference, cu_out;
  std::optional<std::string> cu_endpoint, cu_file, cu_audit;
  std::int64_t cu_input = 224;
  curation::CurationOptions cu_opts;
  cu->add_option("--manifest", cu_manifest)->required();
  cu->add_option("--reference", cu_reference, "Manifest supplying per-category mean proportions")->required();
  auto* cu_ep = cu->add_option("--classifier-endpoint", cu_endpoint);
  auto* cu_cf = cu->add_option("--classifier-file", cu_file);
  cu_ep->excludes(cu_cf);
  cu->add_option("--classifier-input-size", cu_input)->check(CLI::PositiveNumber);
  cu->add_option("--factor", cu_opts.factor)->check(CLI::PositiveNumber);
  cu->add_option("--out-dir", cu_out)->required();
  cu->add_option("--audit", cu_audit);

  // eval
  auto* ev = app.add_subcommand("eval", "Top-k accuracy");
  std::string ev_manifest;
  std::vector<std::string> ev_predictions;
  std::vector<std::size_t> ev_ks{1, 5};
  ev->add_option("--manifest", ev_manifest)->required();
  ev->add_option("--predictions", ev_predictions, "One or more prediction files")->required();
  ev->add_option("-k", ev_ks)->delimiter(',')->check(CLI::PositiveNumber);

  // subsets
  auto* sb = app.add_subcommand("subsets", "Accuracy on subsets split by two annotators");
  std::string sb_a1, sb_a2, sb_pred, sb_manifest;
  sb->add_option("--a1", sb_a1)->required();
  sb->add_option("--a2", sb_a2)->required();
  sb->add_option("--predictions", sb_pred)->required();
  sb->add_option("--manifest", sb_manifest, "Manifest with the true labels")->required();

  // serve
  auto* sv = app.add_subcommand("serve", "Annotation and human-test HTTP service");
  std::string sv_manifest, sv_train, sv_val, sv_store = "store", sv_host = "127.0.0.1";
  std::optional<std::string> sv_ui;
  int sv_port = 8080;
  sv->add_option("--manifest", sv_manifest)->required();
  sv->add_option("--corpus-train", sv_train)->required();
  sv->add_option("--corpus-val", sv_val)->required();
  sv->add_option("--port", sv_port)->check(CLI::Range(0, 65535));
  sv->add_option("--host", sv_host);
  sv->add_option("--store", sv_store, "Event store (NAEVAL_STORE overrides)");
  sv->add_option("--ui-dir", sv_ui, "Static UI assets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!cache_dir.empty()) gateway_options.cache_dir = cache_dir;
    inference::InferenceGateway gateway(inference::with_env_defaults(gateway_options));

    if (*det) {
      const auto m = load(det_manifest);
      const auto& labels = m.manifest.label_space;
      const auto ids = ids_of(m.manifest);
      const auto dets = gateway.fetch_detections(
          inference::ModelEndpoint::make(inference::ModelKind::detector, det_detections, labels), ids);
      const auto preds =
          det2cls::predict_batch(dets, ids, det_k, labels, det2cls::PaddingSeed{det_seed}, det_threads);
      emit(det_out, serialize_predictions(preds));
    } else if (*rr) {
      const auto m = load(rr_manifest);
      const auto& labels = m.manifest.label_space;
      const auto props = gateway.fetch_proposals(
          inference::ModelEndpoint::make(inference::ModelKind::proposer, rr_proposals, labels),
          ids_of(m.manifest));
      RegionClassifierChoice clf;
      make_region_classifier(clf, gateway, m, rr_endpoint, rr_file, rr_input);
      const auto preds =
          rerank::rerank_batch(m.manifest, props, clf.get(), rr_k, det2cls::PaddingSeed{rr_seed}, rr_opts);
      emit(rr_out, serialize_predictions(preds));
    } else if (*cr) {
      const auto m = load(cr_manifest);
      const fs::path out_dir = cr_out;
      DatasetManifest derived{m.manifest.label_space, {}, m.manifest.provenance + "+cropped"};
      for (const auto& r : m.manifest.records) {
        if (!r.object_box) throw ValidationError(r.id, "bbox", "record has no object box to crop");
        const auto image = imaging::crop(imaging::load_image(image_path(m, r)), *r.object_box);
        const auto rel = fs::path("images") / curation::clipped_file_name(r.id);
        imaging::save_png(out_dir / rel, image);
        ImageRecord c = r;
        c.path = rel.generic_string();
        c.width = image.width();
        c.height = image.height();
        c.object_box = BBox::full(image.width(), image.height());
        derived.records.push_back(std::move(c));
      }
      save_manifest_file(out_dir / "manifest.json", derived);
      std::cout << "cropped " << derived.records.size() << " images into " << out_dir.string() << "\n";
    } else if (*st) {
      const auto m = load(st_manifest);
      const auto preds = parse_predictions(read_file(st_predictions), m.manifest.label_space);
      std::cout << imaging::format_stratified(imaging::stratified_eval(m.manifest, preds, st_base));
    } else if (*cu) {
      const auto m = load(cu_manifest);
      const auto table = curation::avg_object_proportion(load_manifest_file(cu_reference));
      RegionClassifierChoice clf;
      make_region_classifier(clf, gateway, m, cu_endpoint, cu_file, cu_input);
      const auto result = curation::build_plus_dataset(m.manifest, table, clf.get(), cu_opts);
      const fs::path out_dir = cu_out;
      curation::export_clipped_images(
          m.manifest, result, [&m](const ImageRecord& r) { return imaging::load_image(image_path(m, r)); },
          out_dir / cu_opts.image_dir);
      save_manifest_file(out_dir / "manifest.json", result.manifest);
      if (cu_audit) write_file(*cu_audit, curation::serialize_audit(result.decisions));
      std::cout << "kept " << result.manifest.records.size() << " of " << m.manifest.records.size()
                << " records\n";
    } else if (*ev) {
      const auto m = load(ev_manifest);
      std::vector<std::pair<std::string, eval::AccuracyReport>> rows;
      for (const auto& p : ev_predictions) {
        const auto preds = parse_predictions(read_file(p), m.manifest.label_space);
        rows.emplace_back(fs::path(p).stem().string(), eval::topk_accuracy(preds, m.manifest, ev_ks));
      }
      std::cout << eval::comparison_table(rows).text;
      for (const auto& [name, report] : rows) {
        for (const auto& [k, hits] : report.padded_hits) {
          if (hits > 0) std::cout << name << ": " << hits << " top-" << k << " hits from padded slots\n";
        }
      }
    } else if (*sb) {
      const auto m = load(sb_manifest);
      const auto& labels = m.manifest.label_space;
      const auto part = eval::subset_partition(parse_predictions(read_file(sb_a1), labels),
                                               parse_predictions(read_file(sb_a2), labels), m.manifest);
      const auto acc = eval::subset_accuracy(parse_predictions(read_file(sb_pred), labels), part, m.manifest);
      const std::pair<const char*, std::size_t> sizes[] = {
          {"A", part.both.size()}, {"B", part.exactly_one().size()}, {"C", part.neither.size()}};
      for (const auto& [name, n] : sizes) {
        const auto& r = acc.at(name);
        std::cout << name << "\t" << n << "\t" << (r ? format_percent(*r) : std::string("-")) << "\n";
      }
    } else if (*sv) {
      if (const char* env = std::getenv("NAEVAL_STORE"); env != nullptr && *env != '\0') sv_store = env;
      const auto test = load(sv_manifest);
      const auto train = load(sv_train);
      const auto val = load(sv_val);
      service::ServiceConfig config;
      config.test = {test.manifest, test.root};
      config.training = {train.manifest, train.root};
      config.validation = {val.manifest, val.root};
      config.store = sv_store;
      if (sv_ui) config.ui_dir = *sv_ui;
      service::AnnotationService server(std::move(config));
      const int port = server.bind(sv_host, sv_port);
      std::cout << "listening on http://" << sv_host << ":" << port << std::endl;
      server.listen();
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
