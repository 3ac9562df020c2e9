#include "common/error.hpp"

namespace stochsym {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::UnknownVariable: return "unknown-variable";
    case ErrorCode::Domain: return "domain-error";
    case ErrorCode::Dimension: return "dimension-error";
    case ErrorCode::Invariant: return "invariant-violation";
    case ErrorCode::ZeroCoefficient: return "phi-zero";
    case ErrorCode::Monotonicity: return "monotonicity-violation";
    case ErrorCode::Inversion: return "inversion-failure";
    case ErrorCode::SingularJacobian: return "singular-jacobian";
    case ErrorCode::CompatibilityFailed: return "compatibility-failed";
    case ErrorCode::NonIntegrable: return "non-integrable-result";
    case ErrorCode::CovMismatch: return "cov-mismatch";
    case ErrorCode::StageFailure: return "stage-failure";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::DegenerateSampling: return "degenerate-sampling";
    case ErrorCode::TooFewPaths: return "too-few-paths";
    case ErrorCode::IncrementMismatch: return "increment-mismatch";
    case ErrorCode::BetaYDependence: return "beta-y-dependence";
    case ErrorCode::Io: return "io-error";
    case ErrorCode::Usage: return "usage-error";
    case ErrorCode::Internal: return "internal-error";
  }
  return "unknown";
}

}  // namespace stochsym
