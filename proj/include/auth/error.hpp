#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace auth {

enum class ErrorCode {
  // trace / profile io
  FileNotFound,
  MalformedRow,
  EmptyTrace,
  NonMonotonicTime,
  SerializationError,
  SchemaVersionMismatch,
  // preprocess
  EmptyAfterFilter,
  // features
  TooFewSamples,
  EmptySequence,
  LengthMismatch,
  DegenerateLabels,
  // context
  TooFewVectors,
  InsufficientImpostors,
  // classifiers
  SingleClassDataset,
  DimensionMismatch,
  // eval
  EmptyScores,
  EnrollmentFailure,
  NoTestSamples,
  // stats
  EmptySample,
  DegenerateMatrix,
  AllZeroDifferences,
  // synthgen / cli
  InvalidSpec,
  ConfigError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::size_t line = 0)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        line_(line) {}

  ErrorCode code() const { return code_; }
  // 1-based file line for parse errors, 0 otherwise.
  std::size_t line() const { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace auth
