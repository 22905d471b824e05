#pragma once

#include <stdexcept>
#include <string>

namespace ccsp {

enum class Errc {
  Syntax,
  UnknownKeyword,
  UndeclaredVariable,
  DuplicateName,
  Arity,
  UnknownFunction,
  NotWellBehaved,
  DegenerateDirection,
  ShapeError,
  SignatureError,
  NearSquaringTooLoose,
  DeltaTooLarge,
  CurvatureSignError,
  NotCertified,
  NotEvaluable,
  MissingVariable,
  BudgetExceeded,
  MotionCountMismatch,
  InvalidPolygon,
  InvalidMotion,
  InvalidArgument,
  Io,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Carries the 1-based source position of the offending token.
class ParseError : public Error {
 public:
  ParseError(Errc code, const std::string& message, int line, int col)
      : Error(code, "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + message),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

}  // namespace ccsp
