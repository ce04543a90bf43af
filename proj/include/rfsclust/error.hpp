#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfsclust {

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteCoordinate,
  LabelLengthMismatch,
  EmptyDataset,
  ParseError,
  IoError,
  NonSquare,
  NegativeCost,
  EmptyCostMatrix,
  InvalidOrder,
  InvalidCutoff,
  InvalidConfig,
  AllInfinite,
  NoExemplar,
  ZeroDensity,
  DegenerateComponent,
  InitFailure,
  InvalidModel,
  LengthMismatch,
  TooFew,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorCode::LabelLengthMismatch: return "LabelLengthMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NegativeCost: return "NegativeCost";
    case ErrorCode::EmptyCostMatrix: return "EmptyCostMatrix";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::InvalidCutoff: return "InvalidCutoff";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::AllInfinite: return "AllInfinite";
    case ErrorCode::NoExemplar: return "NoExemplar";
    case ErrorCode::ZeroDensity: return "ZeroDensity";
    case ErrorCode::DegenerateComponent: return "DegenerateComponent";
    case ErrorCode::InitFailure: return "InitFailure";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFew: return "TooFew";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rfsclust
