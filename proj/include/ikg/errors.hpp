#pragma once

#include <stdexcept>
#include <string>

namespace ikg {

// Base of every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: dimension mismatch, non-finite coordinates, non-positive
// noise or cost, index out of range.
class InputError : public Error {
 public:
  using Error::Error;
};

// Floating point breakdown: failed factorization, non-finite gradient.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Configuration rejected by validation. `key` is the dotted path to the
// offending entry, e.g. "problem.kernel.alpha".
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Every alternative has log-IKG of -inf, so no ranking is possible.
class DegenerateStateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ikg
