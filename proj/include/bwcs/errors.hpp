#pragma once

#include <stdexcept>
#include <string>

namespace bwcs {

/// Structural errors raised while building or combining models.
class ModelError : public std::runtime_error {
 public:
  enum class Kind {
    BlockingState,
    NonPositiveWeight,
    DanglingEdge,
    DuplicateState,
    UnknownState,
    UnknownEdge,
    MissingRow,
    ProbabilityNotOne,
    UndefinedAction,
    NotAWec,
    InvalidQuery,
    CalibrationBudgetExceeded,
    Overflow,
    Internal,
  };

  ModelError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// 1-based position of a token inside an input file.
struct SourceSpan {
  int line = 0;
  int col_begin = 0;
  int col_end = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceSpan span, const std::string& what)
      : std::runtime_error("line " + std::to_string(span.line) + ":" +
                           std::to_string(span.col_begin) + ": " + what),
        span_(span) {}

  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

}  // namespace bwcs
