#pragma once

#include <stdexcept>
#include <string>

namespace cgap {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by the text-format parsers; carries a 1-based source position.
struct ParseError : Error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& msg, int line_, int column_)
      : Error("parse error at " + std::to_string(line_) + ":" +
              std::to_string(column_) + ": " + msg),
        line(line_),
        column(column_) {}
};

// Structurally well-formed input that violates a model-level requirement
// (annotation out of range, missing vertex-choice rule, arity clash, ...).
struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A configured resource cap was hit (enumeration size, grounding size,
// solver branches).
struct CapExceededError : Error {
  explicit CapExceededError(const std::string& msg) : Error(msg) {}
};

// Fixpoint iteration or horizon search failed to stabilize within its cap.
struct NonConvergenceError : Error {
  explicit NonConvergenceError(const std::string& msg) : Error(msg) {}
};

// A coherence/equilibrium check was asked about an interpretation that is
// not even a model of the program.
struct NotAModelError : Error {
  explicit NotAModelError(const std::string& msg) : Error(msg) {}
};

}  // namespace cgap
