#pragma once

#include <stdexcept>
#include <string>

namespace rfd {

// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input errors.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnknownNode : public Error {
 public:
  explicit UnknownNode(const std::string& id) : Error("unknown node '" + id + "'") {}
};

class InfeasibleParams : public Error {
 public:
  using Error::Error;
};

// Search outcomes.
class Unreachable : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class NoDescent : public Error {
 public:
  using Error::Error;
};

// Raised when a sediment deposit is requested at a node that still has a
// downhill or level neighbor. Always a solver logic bug.
class NotBlocked : public Error {
 public:
  using Error::Error;
};

class InfeasibleCycle : public Error {
 public:
  using Error::Error;
};

class MalformedRecord : public Error {
 public:
  using Error::Error;
};

// A simulator invariant (vehicle conservation, unit capacity, chi range) or the
// telemetry pipeline-correctness check broke. Always a bug.
class InvariantBreach : public Error {
 public:
  using Error::Error;
};

}  // namespace rfd
