// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace naeval {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violated a schema or a domain invariant.
///
/// `subject` names the offending entity (record id, image id, category) and
/// `field` the offending field, when known. Both are part of what().
class ValidationError : public Error {
 public:
  ValidationError(std::string subject, std::string field, const std::string& message)
      : Error(compose(subject, field, message)),
        subject_(std::move(subject)),
        field_(std::move(field)) {}

  explicit ValidationError(const std::string& message) : Error(message) {}

  const std::string& subject() const noexcept { return subject_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string compose(const std::string& subject, const std::string& field,
                             const std::string& message) {
    std::string out;
    if (!subject.empty()) out += "[" + subject + "] ";
    if (!field.empty()) out += field + ": ";
    return out + message;
  }

  std::string subject_;
  std::string field_;
};

/// A caller passed an argument outside the operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A multi-stage pipeline failed; what() names the stage input that failed.
class PipelineError : public Error {
 public:
  using Error::Error;
};

/// An external model service could not be reached or answered with a
/// transport-level failure. These are the only errors that are retried.
class TransportError : public Error {
 public:
  TransportError(std::string endpoint, const std::string& message)
      : Error(endpoint + ": " + message), endpoint_(std::move(endpoint)) {}

  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
};

/// A state-machine operation was not allowed in the current state.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace naeval
