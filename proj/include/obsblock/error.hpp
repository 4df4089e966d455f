#pragma once

#include <stdexcept>
#include <string>

namespace obsblock {

enum class ErrorKind {
  InvalidInput,
  OrderMismatch,
  ModelAssembly,
  Controllability,
  InsufficientActuation,
  Defective,
  NoEligibleEigenvalue,
  ConditionFailure,
  DegenerateCandidate,
  RepairFailure,
  IllConditioned,
  Verification,
  Parse,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// CLI exit code for an error kind: 2 precondition, 3 numerical, 4 I/O.
int exit_code(ErrorKind kind);

}  // namespace obsblock
