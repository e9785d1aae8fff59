// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/service.hpp"

#include <chrono>
#include <fstream>
#include <httplib.h>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include "json_util.hpp"
#include "naeval/annotation.hpp"
#include "naeval/error.hpp"
#include "naeval/io.hpp"

namespace naeval::service {

namespace fs = std::filesystem;
using detail::json;

namespace {

class NotFound : public Error {
 public:
  using Error::Error;
};

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw Error("cannot append to " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

std::string sanitize(std::string_view s) {
  std::string out;
  for (char c : s) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  }
  return out.empty() ? "anon" : out;
}

std::string content_type_for(const fs::path& p) {
  auto ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

annotation::Point point_from_json(const json& j, const char* name, const std::string& subject) {
  const auto& p = detail::field(j, name, subject);
  return {detail::get_int(p, "x", subject), detail::get_int(p, "y", subject)};
}

}  // namespace

struct AnnotationService::Impl {
  struct SessionSlot {
    std::mutex mutex;
    session::HumanSession session;
    fs::path log;
  };

  explicit Impl(ServiceConfig c) : config(std::move(c)) {
    if (!config.clock) {
      config.clock = [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
      };
    }
    fs::create_directories(config.store / "sessions");
    for (const auto& line : read_lines(annotations_log())) {
      annotations.apply(annotation::annotation_event_from_json(line));
    }
    for (const auto& entry : fs::directory_iterator(config.store / "sessions")) {
      if (entry.path().extension() != ".jsonl") continue;
      std::vector<session::SessionEvent> events;
      for (const auto& line : read_lines(entry.path())) events.push_back(session::event_from_json(line));
      auto s = session::HumanSession::replay(events);
      const auto id = s.id();
      sessions.emplace(id, std::unique_ptr<SessionSlot>(new SessionSlot{{}, std::move(s), entry.path()}));
    }
    for (const Corpus* c : {&config.test, &config.training, &config.validation}) {
      for (const auto& r : c->manifest.records) images.emplace(r.id, std::pair{c, &r});
    }
    routes();
  }

  ServiceConfig config;
  httplib::Server server;
  int port = -1;
  std::thread worker;

  // Every id served by GET /api/images; the first corpus listing an id wins.
  std::map<std::string, std::pair<const Corpus*, const ImageRecord*>> images;

  std::mutex annotations_mutex;
  annotation::AnnotationState annotations;

  std::shared_mutex sessions_mutex;
  std::map<std::string, std::unique_ptr<SessionSlot>> sessions;

  fs::path annotations_log() const { return config.store / "annotations.jsonl"; }

  SessionSlot& slot(const std::string& id) {
    std::shared_lock lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw NotFound("unknown session '" + id + "'");
    return *it->second;
  }

  static json parse_body(const httplib::Request& req) {
    return detail::parse_json(req.body, "request body");
  }

  static json image_list(const std::vector<session::Assignment>& list, bool with_truth) {
    json arr = json::array();
    for (const auto& a : list) {
      arr.push_back(with_truth ? json{{"image_id", a.image_id}, {"synset", a.truth}}
                               : json{{"image_id", a.image_id}});
    }
    return arr;
  }

  static json session_state(const session::HumanSession& s) {
    using session::Phase;
    const auto phase = s.phase();
    json j = {{"session_id", s.id()},
              {"annotator", s.annotator()},
              {"phase", std::string(session::to_string(phase))},
              {"browse_count", s.browse_events().size()}};
    const auto next = s.next_image();
    j["next"] = next ? json(*next) : json(nullptr);
    if (phase == Phase::validation || phase == Phase::test) {
      const auto& assigned = s.assignments(phase);
      const auto answered = s.score(phase).total;
      j["answered"] = answered;
      j["remaining"] = assigned.size() - answered;
    }
    if (phase == Phase::training || phase == Phase::test) {
      j["training"] = image_list(s.assignments(Phase::training), true);
    }
    json labels = json::array();
    for (const auto& c : s.labels().categories()) labels.push_back({{"synset", c.synset}, {"name", c.name}});
    j["labels"] = std::move(labels);
    return j;
  }

  void get_image(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto it = images.find(id);
    if (it == images.end()) throw NotFound("unknown image '" + id + "'");
    const auto& [corpus, record] = it->second;
    fs::path path = record->path;
    if (path.is_relative()) path = corpus->image_root / path;
    if (!fs::exists(path)) throw NotFound("image file missing for '" + id + "'");
    res.set_content(read_file(path), content_type_for(path));
  }

  void get_manifest(httplib::Response& res) {
    DatasetManifest out;
    {
      std::lock_guard lock(annotations_mutex);
      out = annotations.annotated(config.test.manifest);
    }
    res.set_content(save_manifest(out), "application/json");
  }

  void post_annotation(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    annotation::AnnotationEvent event;
    event.image_id = detail::get_string(body, "image_id", "annotation");
    const ImageRecord* record = config.test.manifest.find(event.image_id);
    if (record == nullptr) throw NotFound("unknown image '" + event.image_id + "'");
    if (auto it = body.find("points"); it != body.end() && !it->is_null()) {
      annotation::MarginalPoints p{point_from_json(*it, "top", event.image_id),
                                   point_from_json(*it, "bottom", event.image_id),
                                   point_from_json(*it, "left", event.image_id),
                                   point_from_json(*it, "right", event.image_id)};
      annotation::check_within(p, record->width, record->height, event.image_id);
      event.bbox = annotation::points_to_bbox(p);
    }
    if (auto it = body.find("flags"); it != body.end() && !it->is_null()) {
      event.flags = detail::flags_from_json(*it, event.image_id);
    }
    if (!event.bbox && !event.flags) {
      throw ValidationError(event.image_id, "", "annotation needs points or flags");
    }
    if (auto it = body.find("replace"); it != body.end()) {
      if (!it->is_boolean()) throw ValidationError(event.image_id, "replace", "expected a boolean");
      event.replace = it->get<bool>();
    }
    event.timestamp_ms = config.clock();

    std::lock_guard lock(annotations_mutex);
    append_line(annotations_log(), annotation::annotation_event_to_json(event));
    annotations.apply(event);
    const auto* stored = annotations.find(event.image_id);
    json out = {{"image_id", event.image_id}, {"flags", detail::flags_to_json(stored->flags)}};
    out["bbox"] = stored->bbox ? detail::bbox_to_json(*stored->bbox) : json(nullptr);
    res.set_content(out.dump(), "application/json");
  }

  void post_session(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto annotator = detail::get_string(body, "annotator", "session");
    const auto& seed = detail::field(body, "seed", "session");
    if (!seed.is_number_unsigned()) throw ValidationError("session", "seed", "expected a non-negative integer");

    std::unique_lock lock(sessions_mutex);
    std::string id;
    for (std::size_t n = sessions.size() + 1;; ++n) {
      id = sanitize(annotator) + "-" + std::to_string(n);
      if (!sessions.contains(id)) break;
    }
    auto plan = session::plan_session(id, annotator, seed.get<std::uint64_t>(), config.training.manifest,
                                      config.validation.manifest, config.test.manifest, config.session);
    auto s = session::HumanSession::start(std::move(plan), config.clock());
    const auto log = config.store / "sessions" / (id + ".jsonl");
    std::string lines;
    for (const auto& e : s.events()) lines += session::event_to_json(e) + "\n";
    write_file(log, lines);
    const json state = session_state(s);
    sessions.emplace(id, std::unique_ptr<SessionSlot>(new SessionSlot{{}, std::move(s), log}));
    res.status = 201;
    res.set_content(state.dump(), "application/json");
  }

  /// Runs `mutate` under the session's writer lock and persists the event it appended.
  template <typename F>
  void mutate_session(const httplib::Request& req, httplib::Response& res, F mutate) {
    auto& s = slot(req.matches[1]);
    std::lock_guard lock(s.mutex);
    const auto before = s.session.events().size();
    mutate(s.session);
    for (auto i = before; i < s.session.events().size(); ++i) {
      append_line(s.log, session::event_to_json(s.session.events()[i]));
    }
    res.set_content(session_state(s.session).dump(), "application/json");
  }

  void routes() {
    auto json_error = [](httplib::Response& res, int status, const std::string& msg) {
      res.status = status;
      res.set_content(json{{"error", msg}}.dump(), "application/json");
    };
    server.set_exception_handler([json_error](const httplib::Request&, httplib::Response& res,
                                              std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const NotFound& e) {
        json_error(res, 404, e.what());
      } catch (const ValidationError& e) {
        json_error(res, 400, e.what());
      } catch (const ArgumentError& e) {
        json_error(res, 400, e.what());
      } catch (const StateError& e) {
        json_error(res, 409, e.what());
      } catch (const std::exception& e) {
        json_error(res, 500, e.what());
      }
    });

    server.Get(R"(/api/images/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) { get_image(req, res); });
    server.Get("/api/manifest",
               [this](const httplib::Request&, httplib::Response& res) { get_manifest(res); });
    server.Post("/api/annotations",
                [this](const httplib::Request& req, httplib::Response& res) { post_annotation(req, res); });
    server.Post("/api/sessions",
                [this](const httplib::Request& req, httplib::Response& res) { post_session(req, res); });
    server.Get(R"(/api/sessions/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
      auto& s = slot(req.matches[1]);
      std::lock_guard lock(s.mutex);
      res.set_content(session_state(s.session).dump(), "application/json");
    });
    server.Post(R"(/api/sessions/([^/]+)/training-complete)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  const auto ts = config.clock();
                  mutate_session(req, res, [&](session::HumanSession& s) { s.complete_training(ts); });
                });
    server.Post(R"(/api/sessions/([^/]+)/responses)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  const auto image = detail::get_string(body, "image_id", "response");
                  const auto synset = detail::get_string(body, "synset", image);
                  const auto ts = config.clock();
                  mutate_session(req, res,
                                 [&](session::HumanSession& s) { s.submit_response(image, synset, ts); });
                });
    server.Post(R"(/api/sessions/([^/]+)/browse)", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto image = detail::get_string(body, "image_id", "browse");
      const auto ts = config.clock();
      mutate_session(req, res, [&](session::HumanSession& s) { s.record_browse(image, ts); });
    });
    server.Get(R"(/api/sessions/([^/]+)/report)", [this](const httplib::Request& req, httplib::Response& res) {
      auto& s = slot(req.matches[1]);
      std::lock_guard lock(s.mutex);
      res.set_content(session::report_to_json(session::score_session(s.session)), "application/json");
    });

    if (config.ui_dir && !server.set_mount_point("/", config.ui_dir->string())) {
      throw ArgumentError("UI directory not found: " + config.ui_dir->string());
    }
  }
};

AnnotationService::AnnotationService(ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::bind(const std::string& host, int port) {
  impl_->port = port == 0 ? impl_->server.bind_to_any_port(host) : port;
  if (port != 0 && !impl_->server.bind_to_port(host, port)) impl_->port = -1;
  if (impl_->port < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return impl_->port;
}

void AnnotationService::listen() {
  if (impl_->port < 0) throw StateError("bind() must precede listen()");
  impl_->server.listen_after_bind();
}

void AnnotationService::start() {
  if (impl_->port < 0) throw StateError("bind() must precede start()");
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void AnnotationService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace naeval::service
