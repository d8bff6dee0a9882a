#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hardylab {

enum class ErrorKind {
  OnAxis,
  StencilCrossesAxis,
  QuadratureNotConverged,
  NonFiniteSample,
  OutOfDomain,
  NonPositiveProfile,
  NonPositiveF,
  GateClosed,
  IterationBudgetExceeded,
  NoRealRoot,
  SolverDiverged,
  BoundaryMassExceeded,
  WeightExceedsDecay,
  InvalidArgument,
  UnknownPreset,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OnAxis: return "OnAxis";
    case ErrorKind::StencilCrossesAxis: return "StencilCrossesAxis";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::NonFiniteSample: return "NonFiniteSample";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NonPositiveProfile: return "NonPositiveProfile";
    case ErrorKind::NonPositiveF: return "NonPositiveF";
    case ErrorKind::GateClosed: return "GateClosed";
    case ErrorKind::IterationBudgetExceeded: return "IterationBudgetExceeded";
    case ErrorKind::NoRealRoot: return "NoRealRoot";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::BoundaryMassExceeded: return "BoundaryMassExceeded";
    case ErrorKind::WeightExceedsDecay: return "WeightExceedsDecay";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace hardylab
