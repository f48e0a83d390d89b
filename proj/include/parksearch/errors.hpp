#pragma once

#include <stdexcept>
#include <string>

namespace parksearch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input document (graph, trace, config, results).
struct ParseError : Error {
  using Error::Error;
};

/// Well-formed input that violates a structural invariant.
struct ValidationError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// No resource can be reached from the agent's position.
struct NoPathError : Error {
  using Error::Error;
};

struct TraceError : Error {
  using Error::Error;
};

struct UnknownRecordError : Error {
  using Error::Error;
};

struct DegenerateTargetError : Error {
  using Error::Error;
};

}  // namespace parksearch
