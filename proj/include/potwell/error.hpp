#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace potwell {

/// Base class for every failure raised by the library. Callers that only
/// need a message can catch this; the subclasses carry the failure kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& what = "no usable observations")
      : Error(what) {}
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The Gaussian propagator is undefined: zero price, vanishing variance, or
/// a series with no variation at all. `index` is the offending transition
/// when one is known.
class DegenerateState : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit DegenerateState(const std::string& what, std::size_t index = npos)
      : Error(index == npos ? what
                            : what + " (transition " + std::to_string(index) + ")"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class TooManyRejections : public Error {
 public:
  using Error::Error;
};

class OptimizerFailure : public Error {
 public:
  using Error::Error;
};

class SelectionFailure : public Error {
 public:
  using Error::Error;
};

class ChainStuck : public Error {
 public:
  using Error::Error;
};

class OrderOutOfRange : public Error {
 public:
  explicit OrderOutOfRange(int q)
      : Error("polynomial order " + std::to_string(q) + " outside 1..4") {}
};

}  // namespace potwell
