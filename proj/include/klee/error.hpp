#pragma once

#include <stdexcept>
#include <string>

namespace klee {

/// Failure categories raised by the library. Each maps to a named error of
/// the corresponding operation so callers can branch on the cause.
enum class ErrorKind {
  InvalidArgument,
  EmptySection,
  RootBracketFailure,
  ConvergenceFailure,
  NonMonotone,
  DegenerateDirections,
  OrderTooHigh,
  EndpointSingular,
  NoContraction,
  DomainEscape,
  KernelDomainViolation,
  IllConditioned,
  ExtensionMismatch,
  NewtonDivergence,
  SingularRHS,
  SearchExhausted,
  CapMismatch,
  ConvexityFailure,
  ChainCheckFailure,
  ParseError,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace klee
