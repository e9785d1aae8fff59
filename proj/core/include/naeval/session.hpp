// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

// Human recognition test. A session walks
//
//   training --(explicit completion)--> validation --+--> test --> done
//                                                    +--> failed
//
// Training is study-only. Validation passes when accuracy >= 90% over its
// assignment; the test phase allows browsing the training images. Every
// mutation is an event; the session is the fold of its event log, so
// replaying a log reproduces the state exactly.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "naeval/ratio.hpp"
#include "naeval/types.hpp"

namespace naeval::session {

enum class Phase { training, validation, test, failed, done };

std::string_view to_string(Phase p) noexcept;

struct SessionConfig {
  std::size_t training_per_category = 3;
  std::size_t validation_count = 200;
  std::size_t test_count = 600;
  Ratio pass_threshold{9, 10};  // inclusive
};

struct Assignment {
  std::string image_id;
  std::string truth;  // synset

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct SessionStarted {
  std::string session_id;
  std::string annotator;
  std::uint64_t seed = 0;
  SessionConfig config;
  std::vector<Category> labels;
  std::vector<Assignment> training;
  std::vector<Assignment> validation;
  std::vector<Assignment> test;
};

struct TrainingCompleted {};

struct ResponseSubmitted {
  std::string image_id;
  std::string synset;
};

struct TrainingBrowsed {
  std::string image_id;
};

struct SessionEvent {
  std::int64_t timestamp_ms = 0;
  std::variant<SessionStarted, TrainingCompleted, ResponseSubmitted, TrainingBrowsed> payload;
};

std::string event_to_json(const SessionEvent& event);
SessionEvent event_from_json(std::string_view line);

struct Response {
  std::string synset;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const Response&, const Response&) = default;
};

struct BrowseEvent {
  std::int64_t timestamp_ms = 0;
  std::string image_id;

  friend bool operator==(const BrowseEvent&, const BrowseEvent&) = default;
};

/// Builds the start event: `training_per_category` images per category of
/// the test label space, `validation_count` and `test_count` random images,
/// each drawn without replacement from a stream derived from `seed`. Throws
/// ValidationError stating the deficit when a corpus is too small.
SessionStarted plan_session(std::string session_id, std::string annotator, std::uint64_t seed,
                            const DatasetManifest& training, const DatasetManifest& validation,
                            const DatasetManifest& test, const SessionConfig& config = {});

class HumanSession {
 public:
  static HumanSession start(SessionStarted plan, std::int64_t timestamp_ms);

  /// Folds a full event log. The first event must be SessionStarted.
  static HumanSession replay(std::span<const SessionEvent> events);

  /// Each mutation validates, applies and appends one event; on error the
  /// session is unchanged. Errors: StateError for phase violations and
  /// duplicates, ValidationError for unknown images or categories.
  void complete_training(std::int64_t timestamp_ms);
  void submit_response(std::string_view image_id, std::string_view synset,
                       std::int64_t timestamp_ms);
  void record_browse(std::string_view image_id, std::int64_t timestamp_ms);

  const std::string& id() const noexcept { return plan().session_id; }
  const std::string& annotator() const noexcept { return plan().annotator; }
  Phase phase() const noexcept { return phase_; }
  const SessionStarted& plan() const noexcept;
  const LabelSpace& labels() const noexcept { return labels_; }
  const std::vector<SessionEvent>& events() const noexcept { return events_; }
  const std::map<std::string, Response>& responses() const noexcept { return responses_; }
  const std::vector<BrowseEvent>& browse_events() const noexcept { return browses_; }

  /// Images assigned to a phase; empty for failed and done.
  const std::vector<Assignment>& assignments(Phase p) const noexcept;

  /// First unanswered image of the current phase, in assignment order.
  std::optional<std::string> next_image() const;

  /// Counts over answered images of the phase so far.
  Ratio score(Phase p) const;

  /// Both the state and the logs must match.
  friend bool operator==(const HumanSession& a, const HumanSession& b);

 private:
  HumanSession() = default;
  void apply(const SessionEvent& event);
  void apply_response(const ResponseSubmitted& r, std::int64_t ts);
  void apply_browse(const TrainingBrowsed& b, std::int64_t ts);

  std::vector<SessionEvent> events_;
  std::shared_ptr<const SessionStarted> plan_;  // stable while events_ grows
  LabelSpace labels_;
  Phase phase_ = Phase::training;
  std::map<std::string, Response> responses_;
  std::vector<BrowseEvent> browses_;
  std::map<std::string, Phase> phase_of_;
  std::map<std::string, std::string> truth_;
  std::set<std::string> training_ids_;
};

struct SessionReport {
  std::string session_id;
  std::string annotator;
  Phase phase = Phase::failed;
  Ratio validation;
  std::optional<Ratio> test;  // absent when validation failed
  std::size_t browse_count = 0;
  Predictions test_responses;  // one detected slot per answered test image
};

/// Throws StateError unless the session is done or failed.
SessionReport score_session(const HumanSession& session);

std::string report_to_json(const SessionReport& report);

}  // namespace naeval::session
