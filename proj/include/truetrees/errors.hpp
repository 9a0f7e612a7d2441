#pragma once

#include <stdexcept>
#include <string>

namespace truetrees {

/// Failure categories shared by every module. The CLI maps them to exit codes.
enum class ErrorKind {
  DegreeBound,
  InvalidSize,
  NotInTree,
  IndexMismatch,
  SolveDiverged,
  CombinatoricsMismatch,
  SingularJacobian,
  BranchAmbiguity,
  NotConverged,
  OutOfDomain,
  NoExteriorRoot,
  EmptyInput,
  DepthTooSmall,
  InvalidConfig,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegreeBound: return "DegreeBound";
    case ErrorKind::InvalidSize: return "InvalidSize";
    case ErrorKind::NotInTree: return "NotInTree";
    case ErrorKind::IndexMismatch: return "IndexMismatch";
    case ErrorKind::SolveDiverged: return "SolveDiverged";
    case ErrorKind::CombinatoricsMismatch: return "CombinatoricsMismatch";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NoExteriorRoot: return "NoExteriorRoot";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DepthTooSmall: return "DepthTooSmall";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace truetrees
