// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/inference.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <cstdlib>
#include <future>
#include <httplib.h>
#include <map>
#include <mutex>
#include <semaphore>
#include <thread>

#include "json_util.hpp"
#include "naeval/error.hpp"
#include "naeval/io.hpp"

namespace naeval::inference {

using detail::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

ModelEndpoint ModelEndpoint::make(ModelKind kind, std::string location, const LabelSpace& labels,
                                  std::int64_t input_size) {
  ModelEndpoint e;
  e.kind = kind;
  e.transport = location.rfind("http://", 0) == 0 || location.rfind("https://", 0) == 0
                    ? Transport::http
                    : Transport::file;
  e.location = std::move(location);
  e.labels = &labels;
  e.input_size = input_size;
  if (kind == ModelKind::classifier && input_size < 1) {
    throw ArgumentError("classifier endpoint must declare an input size >= 1");
  }
  return e;
}

GatewayOptions with_env_defaults(GatewayOptions options) {
  if (!options.cache_dir) {
    if (const char* dir = std::getenv("NAEVAL_CACHE_DIR"); dir != nullptr && *dir != '\0') {
      options.cache_dir = dir;
    }
  }
  return options;
}

namespace {

struct HttpResponse {
  int status = 0;
  std::string body;
};

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ArgumentError("not a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Url out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::detector: return "detector";
    case ModelKind::proposer: return "proposer";
    case ModelKind::classifier: return "classifier";
  }
  return "model";
}

}  // namespace

struct InferenceGateway::Impl {
  explicit Impl(GatewayOptions opts)
      : options(std::move(opts)),
        permits(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options.max_parallel))) {
    if (options.cache_dir) std::filesystem::create_directories(*options.cache_dir);
  }

  GatewayOptions options;
  std::counting_semaphore<1024> permits;

  std::mutex mutex;
  std::map<std::string, HttpResponse> memory;
  std::map<std::string, std::shared_future<HttpResponse>> in_flight;
  std::map<std::string, std::shared_ptr<const json>> files;
  std::atomic<std::size_t> network_requests{0};
  std::atomic<std::size_t> cache_hits{0};

  std::optional<HttpResponse> load_disk(const std::string& key) {
    if (!options.cache_dir) return std::nullopt;
    const auto path = *options.cache_dir / (key + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
      const json j = json::parse(read_file(path));
      return HttpResponse{j.at("status").get<int>(), j.at("body").get<std::string>()};
    } catch (const std::exception&) {
      return std::nullopt;  // unreadable entries are refetched
    }
  }

  void store_disk(const std::string& key, const HttpResponse& r) {
    if (!options.cache_dir) return;
    const auto path = *options.cache_dir / (key + ".json");
    const auto tmp = path.string() + ".tmp";
    write_file(tmp, json{{"status", r.status}, {"body", r.body}}.dump());
    std::filesystem::rename(tmp, path);
  }

  void evict(const std::string& key) {
    std::lock_guard lock(mutex);
    memory.erase(key);
    if (options.cache_dir) std::filesystem::remove(*options.cache_dir / (key + ".json"));
  }

  HttpResponse send(const std::string& endpoint, const std::string& method, const std::string& url,
                    const std::string& body, const std::string& content_type) {
    const auto u = split_url(url);
    auto backoff = options.initial_backoff;
    for (int attempt = 1;; ++attempt) {
      std::string failure;
      {
        permits.acquire();
        httplib::Client client(u.origin);
        client.set_connection_timeout(options.timeout);
        client.set_read_timeout(options.timeout);
        client.set_write_timeout(options.timeout);
        const std::string path = u.path.empty() ? "/" : u.path;
        auto result = method == "GET" ? client.Get(path)
                                      : client.Post(path, body, content_type);
        permits.release();
        ++network_requests;
        if (!result) {
          failure = "request failed: " + httplib::to_string(result.error());
        } else if (result->status >= 500 || result->status == 429) {
          failure = "server returned HTTP " + std::to_string(result->status);
        } else if (result->status == 200 || result->status == 404) {
          return {result->status, result->body};
        } else {
          throw TransportError(endpoint, "server rejected request with HTTP " +
                                             std::to_string(result->status));
        }
      }
      if (attempt >= options.max_attempts) {
        throw TransportError(endpoint, failure + " (after " + std::to_string(attempt) + " attempts)");
      }
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }

  /// Cached, coalesced request. Key covers kind, method, URL and body.
  HttpResponse request(const ModelEndpoint& ep, const std::string& method, const std::string& url,
                       const std::string& body, const std::string& content_type,
                       std::string* key_out) {
    std::string material = std::string(kind_name(ep.kind)) + "\n" + method + "\n" + url + "\n";
    material += body;
    const auto key = sha256_hex(material);
    if (key_out != nullptr) *key_out = key;

    std::promise<HttpResponse> promise;
    {
      std::unique_lock lock(mutex);
      if (auto it = memory.find(key); it != memory.end()) {
        ++cache_hits;
        return it->second;
      }
      if (auto disk = load_disk(key)) {
        ++cache_hits;
        memory.emplace(key, *disk);
        return *disk;
      }
      if (auto it = in_flight.find(key); it != in_flight.end()) {
        auto pending = it->second;
        lock.unlock();
        ++cache_hits;
        return pending.get();
      }
      in_flight.emplace(key, promise.get_future().share());
    }

    try {
      auto response = send(ep.location, method, url, body, content_type);
      std::lock_guard lock(mutex);
      memory.emplace(key, response);
      store_disk(key, response);
      in_flight.erase(key);
      promise.set_value(response);
      return response;
    } catch (...) {
      std::lock_guard lock(mutex);
      in_flight.erase(key);
      promise.set_exception(std::current_exception());
      throw;
    }
  }

  std::shared_ptr<const json> file_json(const ModelEndpoint& ep) {
    std::lock_guard lock(mutex);
    if (auto it = files.find(ep.location); it != files.end()) {
      ++cache_hits;
      return it->second;
    }
    auto parsed = std::make_shared<const json>(detail::parse_json(read_file(ep.location), ep.location));
    if (!parsed->is_object()) throw ValidationError(ep.location, "", "top level must be an object");
    files.emplace(ep.location, parsed);
    return parsed;
  }

  /// Fetches the per-image JSON array for detectors/proposers.
  template <typename Parse>
  auto fetch_lists(const ModelEndpoint& ep, ModelKind expected, const char* field,
                   const std::vector<std::string>& ids, Parse parse) {
    using Item = decltype(parse(json::array(), std::string()));
    std::map<std::string, Item> out;
    if (ep.kind != expected) throw ArgumentError(ep.location + " is not a " + kind_name(expected));

    if (ep.transport == Transport::file) {
      const auto root = file_json(ep);
      for (const auto& id : ids) {
        auto it = root->find(id);
        out[id] = it == root->end() ? Item{} : parse(*it, id);
      }
      return out;
    }

    std::vector<std::optional<Item>> results(ids.size());
    std::vector<std::exception_ptr> errors(ids.size());
    auto one = [&](std::size_t i) {
      try {
        const auto url = ep.location + (ep.location.back() == '/' ? "" : "/") + percent_encode(ids[i]);
        std::string key;
        const auto r = request(ep, "GET", url, "", "", &key);
        if (r.status == 404) {
          results[i] = Item{};
          return;
        }
        try {
          const json body = detail::parse_json(r.body, ids[i]);
          results[i] = parse(detail::field(body, field, ids[i]), ids[i]);
        } catch (const ValidationError&) {
          evict(key);
          throw;
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    };
    const std::size_t workers = std::min(ids.size(), std::max<std::size_t>(1, options.max_parallel));
    std::atomic<std::size_t> next{0};
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < ids.size(); i = next++) one(i);
        });
      }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      out[ids[i]] = std::move(*results[i]);
    }
    return out;
  }
};

InferenceGateway::InferenceGateway(GatewayOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

InferenceGateway::~InferenceGateway() = default;

DetectionsByImage InferenceGateway::fetch_detections(const ModelEndpoint& endpoint,
                                                     const std::vector<std::string>& image_ids) {
  if (endpoint.labels == nullptr) throw ArgumentError("detector endpoint needs a label space");
  const auto& labels = *endpoint.labels;
  return impl_->fetch_lists(endpoint, ModelKind::detector, "detections", image_ids,
                            [&](const json& arr, const std::string& id) {
                              return detail::detections_from_json(arr, labels, id);
                            });
}

rerank::ProposalsByImage InferenceGateway::fetch_proposals(const ModelEndpoint& endpoint,
                                                           const std::vector<std::string>& image_ids) {
  return impl_->fetch_lists(
      endpoint, ModelKind::proposer, "proposals", image_ids,
      [](const json& arr, const std::string& id) {
        if (!arr.is_array()) throw ValidationError(id, "proposals", "expected an array");
        std::vector<rerank::Proposal> list;
        for (const auto& p : arr) {
          list.push_back({detail::bbox_from_json(detail::field(p, "bbox", id), id),
                          detail::get_unit_real(detail::field(p, "objectness", id), "objectness", id)});
        }
        return list;
      });
}

ClassifierOutput InferenceGateway::classify_crop(const ModelEndpoint& endpoint,
                                                 const imaging::PixelImage& image) {
  if (endpoint.kind != ModelKind::classifier) {
    throw ArgumentError(endpoint.location + " is not a classifier");
  }
  if (endpoint.transport != Transport::http) {
    throw ArgumentError("file classifiers are replayed per region; use RecordedRegionClassifier");
  }
  if (endpoint.labels == nullptr) throw ArgumentError("classifier endpoint needs a label space");
  if (image.width() != endpoint.input_size || image.height() != endpoint.input_size) {
    throw ArgumentError("classifier expects " + std::to_string(endpoint.input_size) + "x" +
                        std::to_string(endpoint.input_size) + " input, got " +
                        std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
  std::string key;
  const auto r = impl_->request(endpoint, "POST", endpoint.location, imaging::encode_png(image),
                                "image/png", &key);
  try {
    if (r.status != 200) throw ValidationError(endpoint.location, "", "classifier returned HTTP 404");
    const json body = detail::parse_json(r.body, endpoint.location);
    const auto& probs = detail::field(body, "probabilities", endpoint.location);
    if (!probs.is_object()) throw ValidationError(endpoint.location, "probabilities", "expected an object");
    std::map<std::string, double> sparse;
    for (const auto& [synset, p] : probs.items()) {
      if (!p.is_number()) throw ValidationError(endpoint.location, "probabilities", "expected numbers");
      sparse[synset] = p.get<double>();
    }
    return ClassifierOutput::from_synsets(sparse, *endpoint.labels, endpoint.location);
  } catch (const ValidationError&) {
    impl_->evict(key);
    throw;
  }
}

GatewayStats InferenceGateway::stats() const {
  return {impl_->network_requests.load(), impl_->cache_hits.load()};
}

HttpClassifier::HttpClassifier(InferenceGateway& gateway, ModelEndpoint endpoint)
    : gateway_(gateway), endpoint_(std::move(endpoint)) {
  if (endpoint_.kind != ModelKind::classifier) throw ArgumentError("not a classifier endpoint");
}

ClassifierOutput HttpClassifier::classify(const imaging::PixelImage& image) {
  return gateway_.classify_crop(endpoint_, image);
}

}  // namespace naeval::inference
