// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// HTTP JSON API for annotation and the human recognition test.
//
//   GET  /api/images/{id}                     image bytes
//   GET  /api/manifest                        manifest with stored annotations applied
//   POST /api/annotations                     {image_id, points?, flags?, replace?} -> stored state
//   POST /api/sessions                        {annotator, seed} -> session state
//   GET  /api/sessions/{id}/next              session state (next image to answer)
//   POST /api/sessions/{id}/training-complete
//   POST /api/sessions/{id}/responses         {image_id, synset}
//   POST /api/sessions/{id}/browse            {image_id}
//   GET  /api/sessions/{id}/report
//
// Points are {"x": int, "y": int}. Errors are {"error": message} with 400
// (bad input), 404 (unknown id) or 409 (protocol violation).
//
// Persistence: <store>/annotations.jsonl and <store>/sessions/<id>.jsonl,
// both append-only and replayed on construction.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "naeval/session.hpp"
#include "naeval/types.hpp"

namespace naeval::service {

struct Corpus {
  DatasetManifest manifest;
  std::filesystem::path image_root;  // relative record paths resolve here
};

struct ServiceConfig {
  Corpus test;  // the annotated manifest and the test-phase corpus
  Corpus training;
  Corpus validation;
  std::filesystem::path store;
  std::optional<std::filesystem::path> ui_dir;  // static assets mounted at /
  session::SessionConfig session;
  std::function<std::int64_t()> clock;  // ms since epoch; system clock when empty
};

class AnnotationService {
 public:
  explicit AnnotationService(ServiceConfig config);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Binds to `host`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);

  /// Serves until stop(). Requires bind().
  void listen();

  /// listen() on a background thread; returns once the server accepts.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace naeval::service
