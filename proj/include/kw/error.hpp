#ifndef KW_ERROR_HPP
#define KW_ERROR_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace kw {

enum class ErrorCode {
  // input / validation
  InvalidInput,
  DuplicateVertex,
  UnknownVertex,
  SelfLoop,
  NonPositiveWeight,
  NonPositiveMeasure,
  SymmetryViolation,
  Disconnected,
  DimensionMismatch,
  NonFiniteValue,
  ZeroH,
  InvalidArgument,
  GraphTooLarge,
  // linear algebra
  NotMeanZero,
  NonPositiveShift,
  NumericalFailure,
  SingularJacobian,
  // solvability / solvers
  NotSolvable,
  MeanNotNegative,
  NoConvergence,
  MultiplierSignError,
  MultiplierValueError,
  ConstructionFailed,
  MonotonicityViolated,
  NoSuccessfulProbe,
  // oracle
  BoxTooSmall,
  TooManyVertices,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DuplicateVertex: return "DuplicateVertex";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NonPositiveMeasure: return "NonPositiveMeasure";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ZeroH: return "ZeroH";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GraphTooLarge: return "GraphTooLarge";
    case ErrorCode::NotMeanZero: return "NotMeanZero";
    case ErrorCode::NonPositiveShift: return "NonPositiveShift";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::NotSolvable: return "NotSolvable";
    case ErrorCode::MeanNotNegative: return "MeanNotNegative";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MultiplierSignError: return "MultiplierSignError";
    case ErrorCode::MultiplierValueError: return "MultiplierValueError";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::MonotonicityViolated: return "MonotonicityViolated";
    case ErrorCode::NoSuccessfulProbe: return "NoSuccessfulProbe";
    case ErrorCode::BoxTooSmall: return "BoxTooSmall";
    case ErrorCode::TooManyVertices: return "TooManyVertices";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code plus free-form key/value context.
class Error : public std::runtime_error {
 public:
  using Context = std::map<std::string, std::string>;

  Error(ErrorCode code, const std::string& message, Context context = {})
      : std::runtime_error(message), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const Context& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  Context context_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message, Error::Context context = {}) {
  throw Error(code, message, std::move(context));
}

}  // namespace kw

#endif  // KW_ERROR_HPP
