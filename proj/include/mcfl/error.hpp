// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mcfl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax and static-semantics errors, positioned in the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

// A counterexample that does not fit the program it is replayed against.
class TraceMismatch : public Error {
 public:
  using Error::Error;
};

// A schedule the order-array numbering cannot express (a thread with ten or
// more segments).
class UnsupportedSchedule : public Error {
 public:
  using Error::Error;
};

// A statement form the transformation rules do not cover.
class RuleGap : public Error {
 public:
  using Error::Error;
};

// A context-switch point that could not be located in the transformed body.
class GuardPlacementError : public Error {
 public:
  using Error::Error;
};

class NothingToInstrument : public Error {
 public:
  using Error::Error;
};

}  // namespace mcfl
