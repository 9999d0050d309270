#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace iat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input; the message names the first offending field.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& field, const std::string& what)
      : Error("parse error at '" + field + "': " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Well-formed input that breaks a session invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid session:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }

  std::vector<std::string> violations_;
};

/// A session whose latencies cannot produce a D-score.
class UnscorableError : public Error {
 public:
  using Error::Error;
};

/// Too few observations for a statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Bad training / evaluation input (single class, non-finite values, arity).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace iat
