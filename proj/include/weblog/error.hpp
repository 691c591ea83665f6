#pragma once

#include <stdexcept>
#include <string>

namespace weblog {

// Base for every error the toolkit raises. The CLI maps the subclasses to
// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// No well-formed line in a file's detection sample.
class FormatDetectionError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (unsorted input, empty session).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A pipeline-level consistency check failed after processing.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace weblog
