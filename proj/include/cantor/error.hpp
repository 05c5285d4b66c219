#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cantor {

enum class ErrorKind {
  BlockMismatch,
  OutOfRange,
  InvalidArgument,
  HorizonMismatch,
  Degenerate,
  NotPerfect,
  HorizonTooSmall,
  Misaligned,
  BudgetExceeded,
  InsufficientNullity,
  NotAscending,
  GeometricBound,
  Parse,
  UnresolvedReference,
  UnknownOperation,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::BlockMismatch: return "block mismatch";
    case ErrorKind::OutOfRange: return "out of range";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::HorizonMismatch: return "horizon mismatch";
    case ErrorKind::Degenerate: return "degenerate tree";
    case ErrorKind::NotPerfect: return "tree not perfect";
    case ErrorKind::HorizonTooSmall: return "horizon too small";
    case ErrorKind::Misaligned: return "partition misalignment";
    case ErrorKind::BudgetExceeded: return "enumeration budget exceeded";
    case ErrorKind::InsufficientNullity: return "insufficient nullity";
    case ErrorKind::NotAscending: return "stages not ascending";
    case ErrorKind::GeometricBound: return "geometric bound violated";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::UnresolvedReference: return "unresolved reference";
    case ErrorKind::UnknownOperation: return "unknown operation";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cantor
