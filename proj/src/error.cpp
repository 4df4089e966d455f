#include "obsblock/error.hpp"

namespace obsblock {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::OrderMismatch: return "order-mismatch";
    case ErrorKind::ModelAssembly: return "model-assembly";
    case ErrorKind::Controllability: return "controllability-violation";
    case ErrorKind::InsufficientActuation: return "insufficient-actuation";
    case ErrorKind::Defective: return "defective-eigenvalue";
    case ErrorKind::NoEligibleEigenvalue: return "no-eligible-eigenvalue";
    case ErrorKind::ConditionFailure: return "condition-failure";
    case ErrorKind::DegenerateCandidate: return "degenerate-candidate";
    case ErrorKind::RepairFailure: return "repair-failure";
    case ErrorKind::IllConditioned: return "ill-conditioned-design";
    case ErrorKind::Verification: return "verification-failure";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::OrderMismatch:
    case ErrorKind::ModelAssembly:
    case ErrorKind::Controllability:
    case ErrorKind::InsufficientActuation:
    case ErrorKind::Defective:
    case ErrorKind::NoEligibleEigenvalue:
    case ErrorKind::ConditionFailure:
      return 2;
    case ErrorKind::DegenerateCandidate:
    case ErrorKind::RepairFailure:
    case ErrorKind::IllConditioned:
    case ErrorKind::Verification:
      return 3;
    case ErrorKind::Parse:
    case ErrorKind::Io:
      return 4;
  }
  return 3;
}

}  // namespace obsblock
