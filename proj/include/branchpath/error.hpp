#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace branchpath {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NonFinite,
  AtomOnBoundary,
  AtomOnSkeleton,
  MassMismatch,
  NonGenericRadius,
  NoRadiusFound,
  NotAcyclic,
  EndpointOnSkeleton,
  SnapError,
  TooManyTerminals,
  InstanceInvalid,
  BudgetExceeded,
  CostFlagViolation,
  Infeasible,
  Parse,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (tests, CLI) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace branchpath
