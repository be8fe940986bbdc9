#include "mogplan/core/error.hpp"

namespace mogplan {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::UnknownApp: return "UnknownApp";
    case ErrorKind::UnknownEvaluator: return "UnknownEvaluator";
    case ErrorKind::NoMatch: return "NoMatch";
    case ErrorKind::PhraseNotFound: return "PhraseNotFound";
    case ErrorKind::OrderViolation: return "OrderViolation";
    case ErrorKind::BadAddress: return "BadAddress";
    case ErrorKind::UnknownSheet: return "UnknownSheet";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyPlan: return "EmptyPlan";
    case ErrorKind::BackendError: return "BackendError";
    case ErrorKind::NoRule: return "NoRule";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::MismatchedTask: return "MismatchedTask";
    case ErrorKind::InvalidTask: return "InvalidTask";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

bool is_grounding_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoMatch:
    case ErrorKind::PhraseNotFound:
    case ErrorKind::OrderViolation:
    case ErrorKind::BadAddress:
    case ErrorKind::UnknownSheet:
      return true;
    default:
      return false;
  }
}

bool is_backend_error(ErrorKind kind) {
  return kind == ErrorKind::BackendError || kind == ErrorKind::NoRule ||
         kind == ErrorKind::TransportError || kind == ErrorKind::RateLimited;
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

ParseError::ParseError(std::size_t position, const std::string& reason)
    : Error(ErrorKind::ParseError,
            position == std::string::npos ? reason
                                          : reason + " (at offset " + std::to_string(position) + ")"),
      position_(position),
      reason_(reason) {}

PhraseNotFound::PhraseNotFound(PhraseEnd which, const std::string& phrase)
    : Error(ErrorKind::PhraseNotFound,
            std::string(which == PhraseEnd::Start ? "start" : "end") + " phrase \"" + phrase +
                "\" not found"),
      which_(which) {}

}  // namespace mogplan
