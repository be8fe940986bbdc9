#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mogplan {

enum class ErrorKind {
  OutOfBounds,
  UnknownApp,
  UnknownEvaluator,
  NoMatch,
  PhraseNotFound,
  OrderViolation,
  BadAddress,
  UnknownSheet,
  ParseError,
  EmptyPlan,
  BackendError,
  NoRule,
  TransportError,
  RateLimited,
  MismatchedTask,
  InvalidTask,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

// Grounding failures are the errors an expert raises when it cannot resolve a target.
bool is_grounding_error(ErrorKind kind);

// Errors that originate in a model backend (scripted or remote).
bool is_backend_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  // Text without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

/// Raised by the action-call and plan parsers. `position` is a byte offset into the
/// parsed text, or npos when the failure is not tied to a location.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& reason);

  std::size_t position() const noexcept { return position_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t position_;
  std::string reason_;
};

enum class PhraseEnd { Start, End };

class PhraseNotFound : public Error {
 public:
  PhraseNotFound(PhraseEnd which, const std::string& phrase);

  PhraseEnd which() const noexcept { return which_; }

 private:
  PhraseEnd which_;
};

}  // namespace mogplan
