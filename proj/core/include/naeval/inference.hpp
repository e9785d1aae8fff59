// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// Uniform access to external model services. Model outputs are validated
// here, before any other module sees them.
//
// HTTP wire protocol:
//   detector    GET  {url}/{image_id}  -> {"detections": [{bbox, synset, confidence}]}
//   proposer    GET  {url}/{image_id}  -> {"proposals": [{bbox, objectness}]}
//   classifier  POST {url}, body = PNG bytes (image/png)
//                                      -> {"probabilities": {synset: p}}
// A 404 from a detector or proposer means "nothing found" (empty list).
// File transport reads the detections / proposals JSON files directly.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "naeval/classifier.hpp"
#include "naeval/rerank.hpp"
#include "naeval/types.hpp"

namespace naeval::inference {

enum class ModelKind { detector, proposer, classifier };
enum class Transport { file, http };

struct ModelEndpoint {
  ModelKind kind = ModelKind::detector;
  Transport transport = Transport::file;
  std::string location;           // file path or base URL
  std::int64_t input_size = 0;    // classifiers only, >= 1
  const LabelSpace* labels = nullptr;

  /// Transport is http for "http://" / "https://" locations, file otherwise.
  /// Throws ArgumentError for a classifier without a positive input size.
  static ModelEndpoint make(ModelKind kind, std::string location, const LabelSpace& labels,
                            std::int64_t input_size = 0);
};

struct GatewayOptions {
  /// On-disk response cache; NAEVAL_CACHE_DIR when unset and present.
  std::optional<std::filesystem::path> cache_dir;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::size_t max_parallel = 4;
  std::chrono::seconds timeout{30};
};

/// `options` with cache_dir filled from NAEVAL_CACHE_DIR if it was unset.
GatewayOptions with_env_defaults(GatewayOptions options);

struct GatewayStats {
  std::size_t network_requests = 0;  // attempts actually sent
  std::size_t cache_hits = 0;
};

/// Thread-safe. Concurrent identical requests are coalesced into one.
class InferenceGateway {
 public:
  explicit InferenceGateway(GatewayOptions options = {});
  ~InferenceGateway();
  InferenceGateway(const InferenceGateway&) = delete;
  InferenceGateway& operator=(const InferenceGateway&) = delete;

  /// Ids absent from the source map to empty lists. Throws TransportError
  /// (after retries) or ValidationError naming the image.
  DetectionsByImage fetch_detections(const ModelEndpoint& endpoint,
                                     const std::vector<std::string>& image_ids);

  rerank::ProposalsByImage fetch_proposals(const ModelEndpoint& endpoint,
                                           const std::vector<std::string>& image_ids);

  /// Throws ArgumentError unless the image is input_size x input_size, and
  /// ValidationError for a response that is not a normalized distribution.
  ClassifierOutput classify_crop(const ModelEndpoint& endpoint, const imaging::PixelImage& image);

  GatewayStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Classifier backed by an HTTP classifier endpoint.
class HttpClassifier final : public Classifier {
 public:
  HttpClassifier(InferenceGateway& gateway, ModelEndpoint endpoint);

  std::int64_t input_size() const override { return endpoint_.input_size; }
  ClassifierOutput classify(const imaging::PixelImage& image) override;

 private:
  InferenceGateway& gateway_;
  ModelEndpoint endpoint_;
};

/// Hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

}  // namespace naeval::inference
