#pragma once

#include <stdexcept>
#include <string>

namespace pglfree {

enum class ErrorKind {
  SingularMatrix,
  ModulusMismatch,
  NotPrime,
  TooLarge,
  EmptyWord,
  NotReduced,
  IndexOutOfRange,
  BudgetExceeded,
  SearchExhausted,
  TooFewGenerators,
  CoveringViolation,
  TargetMissed,
  GenerationFailure,
  InconsistentCovering,
  MissingCertificate,
  InvalidArgument,
  Format,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` drives exit codes in the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pglfree
