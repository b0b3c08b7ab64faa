#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hole {

enum class ErrorCode {
  DimensionMismatch,
  NonFinite,
  IndexOutOfRange,
  ShapeMismatch,
  ExhaustedRetries,
  EmptySplit,
  MalformedLine,
  ConstraintUnsatisfiable,
  InvalidCountries,
  EmptyTable,
  ObjectMismatch,
  NoPositives,
  UnknownEntity,
  UnknownRelation,
  Checkpoint,
  VocabularyMismatch,
  Io,
  Config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ExhaustedRetries: return "ExhaustedRetries";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::ConstraintUnsatisfiable: return "ConstraintUnsatisfiable";
    case ErrorCode::InvalidCountries: return "InvalidCountries";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::ObjectMismatch: return "ObjectMismatch";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::Checkpoint: return "Checkpoint";
    case ErrorCode::VocabularyMismatch: return "VocabularyMismatch";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MalformedLineError : public Error {
 public:
  MalformedLineError(std::size_t line_no, const std::string& detail)
      : Error(ErrorCode::MalformedLine,
              "line " + std::to_string(line_no) + ": " + detail),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace hole
