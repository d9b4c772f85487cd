#include "klee/error.hpp"

namespace klee {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptySection: return "EmptySection";
    case ErrorKind::RootBracketFailure: return "RootBracketFailure";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NonMonotone: return "NonMonotone";
    case ErrorKind::DegenerateDirections: return "DegenerateDirections";
    case ErrorKind::OrderTooHigh: return "OrderTooHigh";
    case ErrorKind::EndpointSingular: return "EndpointSingular";
    case ErrorKind::NoContraction: return "NoContraction";
    case ErrorKind::DomainEscape: return "DomainEscape";
    case ErrorKind::KernelDomainViolation: return "KernelDomainViolation";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::ExtensionMismatch: return "ExtensionMismatch";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::SingularRHS: return "SingularRHS";
    case ErrorKind::SearchExhausted: return "SearchExhausted";
    case ErrorKind::CapMismatch: return "CapMismatch";
    case ErrorKind::ConvexityFailure: return "ConvexityFailure";
    case ErrorKind::ChainCheckFailure: return "ChainCheckFailure";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace klee
