#include "branchpath/error.hpp"

namespace branchpath {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::AtomOnBoundary: return "AtomOnBoundary";
    case ErrorKind::AtomOnSkeleton: return "AtomOnSkeleton";
    case ErrorKind::MassMismatch: return "MassMismatch";
    case ErrorKind::NonGenericRadius: return "NonGenericRadius";
    case ErrorKind::NoRadiusFound: return "NoRadiusFound";
    case ErrorKind::NotAcyclic: return "NotAcyclic";
    case ErrorKind::EndpointOnSkeleton: return "EndpointOnSkeleton";
    case ErrorKind::SnapError: return "SnapError";
    case ErrorKind::TooManyTerminals: return "TooManyTerminals";
    case ErrorKind::InstanceInvalid: return "InstanceInvalid";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::CostFlagViolation: return "CostFlagViolation";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace branchpath
