#pragma once

#include <stdexcept>
#include <string>

namespace webqa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A record refers to an id that does not exist.
class DanglingIdError : public Error {
 public:
  using Error::Error;
};

class TypeError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration refused because the choose budget was exceeded.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace webqa
