// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/session.hpp"

#include <algorithm>
#include <numeric>

#include "json_util.hpp"
#include "naeval/error.hpp"
#include "naeval/random.hpp"

namespace naeval::session {

using detail::json;

std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::training: return "training";
    case Phase::validation: return "validation";
    case Phase::test: return "test";
    case Phase::failed: return "failed";
    case Phase::done: return "done";
  }
  return "unknown";
}

namespace {

std::vector<Assignment> draw(const std::vector<const ImageRecord*>& pool, std::size_t count,
                             DeterministicRng& rng) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  rng.partial_shuffle(order, count);
  std::vector<Assignment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* r = pool[order[i]];
    out.push_back({r->id, r->true_label.synset});
  }
  return out;
}

std::vector<const ImageRecord*> all_records(const DatasetManifest& m) {
  std::vector<const ImageRecord*> out;
  out.reserve(m.records.size());
  for (const auto& r : m.records) out.push_back(&r);
  return out;
}

}  // namespace

SessionStarted plan_session(std::string session_id, std::string annotator, std::uint64_t seed,
                            const DatasetManifest& training, const DatasetManifest& validation,
                            const DatasetManifest& test, const SessionConfig& config) {
  if (config.pass_threshold.total == 0 ||
      config.pass_threshold.correct > config.pass_threshold.total) {
    throw ArgumentError("pass threshold must be a ratio in [0, 1]");
  }
  if (config.validation_count == 0 || config.test_count == 0) {
    throw ArgumentError("validation and test assignments must be non-empty");
  }
  SessionStarted plan;
  plan.session_id = std::move(session_id);
  plan.annotator = std::move(annotator);
  plan.seed = seed;
  plan.config = config;
  plan.labels = test.label_space.categories();

  std::map<std::string, std::vector<const ImageRecord*>> by_category;
  for (const auto& r : training.records) by_category[r.true_label.synset].push_back(&r);
  DeterministicRng train_rng(derive_seed(seed, "training"));
  for (const auto& c : plan.labels) {
    const auto& pool = by_category[c.synset];
    if (pool.size() < config.training_per_category) {
      throw ValidationError(c.synset, "training corpus",
                            "has " + std::to_string(pool.size()) + " images, needs " +
                                std::to_string(config.training_per_category) + " (deficit " +
                                std::to_string(config.training_per_category - pool.size()) + ")");
    }
    auto picked = draw(pool, config.training_per_category, train_rng);
    plan.training.insert(plan.training.end(), picked.begin(), picked.end());
  }

  auto sample = [&](const DatasetManifest& corpus, std::size_t count, const char* name) {
    if (corpus.records.size() < count) {
      throw ValidationError(name, "corpus",
                            "has " + std::to_string(corpus.records.size()) + " images, needs " +
                                std::to_string(count) + " (deficit " +
                                std::to_string(count - corpus.records.size()) + ")");
    }
    for (const auto& r : corpus.records) {
      if (!test.label_space.find(r.true_label.synset)) {
        throw ValidationError(r.id, "label", "category not in the test label space");
      }
    }
    DeterministicRng rng(derive_seed(seed, name));
    return draw(all_records(corpus), count, rng);
  };
  plan.validation = sample(validation, config.validation_count, "validation");
  plan.test = sample(test, config.test_count, "test");

  std::set<std::string> scored;
  for (const auto* list : {&plan.validation, &plan.test}) {
    for (const auto& a : *list) {
      if (!scored.insert(a.image_id).second) {
        throw ValidationError(a.image_id, "id", "image assigned to both validation and test");
      }
    }
  }
  return plan;
}

HumanSession HumanSession::start(SessionStarted plan, std::int64_t timestamp_ms) {
  HumanSession s;
  SessionEvent e{timestamp_ms, std::move(plan)};
  s.apply(e);
  s.events_.push_back(std::move(e));
  return s;
}

HumanSession HumanSession::replay(std::span<const SessionEvent> events) {
  if (events.empty() || !std::holds_alternative<SessionStarted>(events.front().payload)) {
    throw ValidationError("session log", "", "log must begin with a start event");
  }
  HumanSession s;
  for (const auto& e : events) {
    s.apply(e);
    s.events_.push_back(e);
  }
  return s;
}

const SessionStarted& HumanSession::plan() const noexcept {
  return *plan_;
}

void HumanSession::complete_training(std::int64_t timestamp_ms) {
  SessionEvent e{timestamp_ms, TrainingCompleted{}};
  apply(e);
  events_.push_back(std::move(e));
}

void HumanSession::submit_response(std::string_view image_id, std::string_view synset,
                                   std::int64_t timestamp_ms) {
  SessionEvent e{timestamp_ms, ResponseSubmitted{std::string(image_id), std::string(synset)}};
  apply(e);
  events_.push_back(std::move(e));
}

void HumanSession::record_browse(std::string_view image_id, std::int64_t timestamp_ms) {
  SessionEvent e{timestamp_ms, TrainingBrowsed{std::string(image_id)}};
  apply(e);
  events_.push_back(std::move(e));
}

void HumanSession::apply(const SessionEvent& event) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SessionStarted>) {
          if (!events_.empty()) throw StateError("session already started");
          LabelSpace labels(p.labels);
          std::map<std::string, Phase> phase_of;
          std::map<std::string, std::string> truth;
          for (const auto& [list, ph] : {std::pair{&p.validation, Phase::validation},
                                         std::pair{&p.test, Phase::test}}) {
            for (const auto& a : *list) {
              labels.require(a.truth, a.image_id);
              if (!phase_of.emplace(a.image_id, ph).second) {
                throw ValidationError(a.image_id, "id", "image assigned twice");
              }
              truth[a.image_id] = a.truth;
            }
          }
          plan_ = std::make_shared<const SessionStarted>(p);
          labels_ = std::move(labels);
          phase_of_ = std::move(phase_of);
          truth_ = std::move(truth);
          for (const auto& a : p.training) training_ids_.insert(a.image_id);
          phase_ = Phase::training;
        } else if constexpr (std::is_same_v<T, TrainingCompleted>) {
          if (events_.empty()) throw StateError("session not started");
          if (phase_ != Phase::training) {
            throw StateError("training already completed (phase is " +
                             std::string(to_string(phase_)) + ")");
          }
          phase_ = Phase::validation;
        } else if constexpr (std::is_same_v<T, ResponseSubmitted>) {
          apply_response(p, event.timestamp_ms);
        } else {
          apply_browse(p, event.timestamp_ms);
        }
      },
      event.payload);
}

void HumanSession::apply_response(const ResponseSubmitted& r, std::int64_t ts) {
  if (events_.empty()) throw StateError("session not started");
  auto it = phase_of_.find(r.image_id);
  if (it == phase_of_.end()) {
    throw ValidationError(r.image_id, "image_id", "image not assigned to this session");
  }
  if (phase_ != Phase::validation && phase_ != Phase::test) {
    throw StateError("responses not accepted in phase " + std::string(to_string(phase_)));
  }
  if (it->second != phase_) {
    throw StateError("image " + r.image_id + " belongs to the " +
                     std::string(to_string(it->second)) + " phase, current phase is " +
                     std::string(to_string(phase_)));
  }
  if (responses_.count(r.image_id)) {
    throw StateError("image " + r.image_id + " already answered");
  }
  labels_.require(r.synset, r.image_id, "synset");
  responses_.emplace(r.image_id, Response{r.synset, ts});

  const auto& list = assignments(phase_);
  const bool exhausted = std::all_of(list.begin(), list.end(), [&](const Assignment& a) {
    return responses_.count(a.image_id) > 0;
  });
  if (!exhausted) return;
  if (phase_ == Phase::validation) {
    const Ratio s = score(Phase::validation);
    const auto& t = plan().config.pass_threshold;
    // s >= t, cross-multiplied
    const bool pass = static_cast<unsigned __int128>(s.correct) * t.total >=
                      static_cast<unsigned __int128>(t.correct) * s.total;
    phase_ = pass ? Phase::test : Phase::failed;
  } else {
    phase_ = Phase::done;
  }
}

void HumanSession::apply_browse(const TrainingBrowsed& b, std::int64_t ts) {
  if (events_.empty()) throw StateError("session not started");
  if (phase_ != Phase::test) {
    throw StateError("browsing is only allowed during the test phase (phase is " +
                     std::string(to_string(phase_)) + ")");
  }
  if (!training_ids_.count(b.image_id)) {
    throw ValidationError(b.image_id, "image_id", "not a training image of this session");
  }
  browses_.push_back({ts, b.image_id});
}

const std::vector<Assignment>& HumanSession::assignments(Phase p) const noexcept {
  static const std::vector<Assignment> kNone;
  if (events_.empty()) return kNone;
  if (p == Phase::validation) return plan().validation;
  if (p == Phase::test) return plan().test;
  if (p == Phase::training) return plan().training;
  return kNone;
}

std::optional<std::string> HumanSession::next_image() const {
  if (phase_ != Phase::validation && phase_ != Phase::test) return std::nullopt;
  for (const auto& a : assignments(phase_)) {
    if (!responses_.count(a.image_id)) return a.image_id;
  }
  return std::nullopt;
}

Ratio HumanSession::score(Phase p) const {
  Ratio r;
  if (p != Phase::validation && p != Phase::test) return r;
  for (const auto& a : assignments(p)) {
    auto it = responses_.find(a.image_id);
    if (it == responses_.end()) continue;
    r += Ratio{it->second.synset == a.truth ? 1u : 0u, 1};
  }
  return r;
}

bool operator==(const HumanSession& a, const HumanSession& b) {
  if (a.events_.size() != b.events_.size()) return false;
  for (std::size_t i = 0; i < a.events_.size(); ++i) {
    if (event_to_json(a.events_[i]) != event_to_json(b.events_[i])) return false;
  }
  return a.phase_ == b.phase_ && a.responses_ == b.responses_ && a.browses_ == b.browses_ &&
         a.labels_ == b.labels_ && a.phase_of_ == b.phase_of_ && a.truth_ == b.truth_ &&
         a.training_ids_ == b.training_ids_;
}

// ---- event log encoding ----

namespace {

json assignments_to_json(const std::vector<Assignment>& list) {
  json arr = json::array();
  for (const auto& a : list) arr.push_back({{"image_id", a.image_id}, {"truth", a.truth}});
  return arr;
}

std::vector<Assignment> assignments_from_json(const json& arr, const char* what) {
  if (!arr.is_array()) throw ValidationError("session event", what, "expected an array");
  std::vector<Assignment> out;
  out.reserve(arr.size());
  for (const auto& a : arr) {
    out.push_back({detail::get_string(a, "image_id", what), detail::get_string(a, "truth", what)});
  }
  return out;
}

}  // namespace

std::string event_to_json(const SessionEvent& event) {
  json j = {{"timestamp_ms", event.timestamp_ms}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SessionStarted>) {
          j["type"] = "started";
          j["session_id"] = p.session_id;
          j["annotator"] = p.annotator;
          j["seed"] = p.seed;
          j["config"] = {{"training_per_category", p.config.training_per_category},
                         {"validation_count", p.config.validation_count},
                         {"test_count", p.config.test_count},
                         {"pass_threshold",
                          {p.config.pass_threshold.correct, p.config.pass_threshold.total}}};
          json labels = json::array();
          for (const auto& c : p.labels) labels.push_back({{"synset", c.synset}, {"name", c.name}});
          j["labels"] = std::move(labels);
          j["training"] = assignments_to_json(p.training);
          j["validation"] = assignments_to_json(p.validation);
          j["test"] = assignments_to_json(p.test);
        } else if constexpr (std::is_same_v<T, TrainingCompleted>) {
          j["type"] = "training_completed";
        } else if constexpr (std::is_same_v<T, ResponseSubmitted>) {
          j["type"] = "response";
          j["image_id"] = p.image_id;
          j["synset"] = p.synset;
        } else {
          j["type"] = "browse";
          j["image_id"] = p.image_id;
        }
      },
      event.payload);
  return j.dump();
}

SessionEvent event_from_json(std::string_view line) {
  const json j = detail::parse_json(line, "session event");
  const std::string subject = "session event";
  SessionEvent e;
  e.timestamp_ms = detail::get_int(j, "timestamp_ms", subject);
  const auto type = detail::get_string(j, "type", subject);
  if (type == "started") {
    SessionStarted s;
    s.session_id = detail::get_string(j, "session_id", subject);
    s.annotator = detail::get_string(j, "annotator", subject);
    const auto& seed = detail::field(j, "seed", subject);
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      throw ValidationError(subject, "seed", "expected an integer");
    }
    s.seed = seed.get<std::uint64_t>();
    const auto& cfg = detail::field(j, "config", subject);
    s.config.training_per_category =
        static_cast<std::size_t>(detail::get_int(cfg, "training_per_category", subject));
    s.config.validation_count = static_cast<std::size_t>(detail::get_int(cfg, "validation_count", subject));
    s.config.test_count = static_cast<std::size_t>(detail::get_int(cfg, "test_count", subject));
    const auto& thr = detail::field(cfg, "pass_threshold", subject);
    if (!thr.is_array() || thr.size() != 2) {
      throw ValidationError(subject, "pass_threshold", "expected [correct, total]");
    }
    s.config.pass_threshold = {thr[0].get<std::uint64_t>(), thr[1].get<std::uint64_t>()};
    const auto& labels = detail::field(j, "labels", subject);
    if (!labels.is_array()) throw ValidationError(subject, "labels", "expected an array");
    for (const auto& c : labels) {
      s.labels.push_back({detail::get_string(c, "synset", subject), detail::get_string(c, "name", subject)});
    }
    s.training = assignments_from_json(detail::field(j, "training", subject), "training");
    s.validation = assignments_from_json(detail::field(j, "validation", subject), "validation");
    s.test = assignments_from_json(detail::field(j, "test", subject), "test");
    e.payload = std::move(s);
  } else if (type == "training_completed") {
    e.payload = TrainingCompleted{};
  } else if (type == "response") {
    e.payload = ResponseSubmitted{detail::get_string(j, "image_id", subject),
                                  detail::get_string(j, "synset", subject)};
  } else if (type == "browse") {
    e.payload = TrainingBrowsed{detail::get_string(j, "image_id", subject)};
  } else {
    throw ValidationError(subject, "type", "unknown event type '" + type + "'");
  }
  return e;
}

SessionReport score_session(const HumanSession& session) {
  if (session.phase() != Phase::done && session.phase() != Phase::failed) {
    throw StateError("session " + session.id() + " is incomplete (phase " +
                     std::string(to_string(session.phase())) + ")");
  }
  SessionReport report;
  report.session_id = session.id();
  report.annotator = session.annotator();
  report.phase = session.phase();
  report.validation = session.score(Phase::validation);
  report.browse_count = session.browse_events().size();
  if (session.phase() == Phase::done) {
    report.test = session.score(Phase::test);
    for (const auto& a : session.assignments(Phase::test)) {
      const auto& resp = session.responses().at(a.image_id);
      TopKPrediction p;
      p.slots.push_back({session.labels().require(resp.synset, a.image_id), Provenance::detected, 1.0});
      report.test_responses.emplace(a.image_id, std::move(p));
    }
  }
  return report;
}

std::string report_to_json(const SessionReport& report) {
  auto ratio = [](const Ratio& r) {
    return json{{"correct", r.correct},
                {"total", r.total},
                {"percent", format_percent(r, 2)},
                {"percent_1dp", format_percent(r, 1)}};
  };
  json responses = json::object();
  for (const auto& [id, p] : report.test_responses) responses[id] = detail::prediction_to_json(p);
  json j = {{"session_id", report.session_id},
            {"annotator", report.annotator},
            {"phase", std::string(to_string(report.phase))},
            {"validation", ratio(report.validation)},
            {"browse_count", report.browse_count},
            {"test_responses", std::move(responses)}};
  j["test"] = report.test ? ratio(*report.test) : json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace naeval::session
