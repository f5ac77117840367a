#ifndef MRID_ERROR_HPP
#define MRID_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrid {

enum class ErrorKind {
  DimensionMismatch,
  NonSquare,
  NonFinite,
  Singular,
  InvalidRate,
  RankDeficientA,
  MalformedCycledSignal,
  InsufficientData,
  ExcitationDeficient,
  RankConditionFailed,
  StructureViolation,
  AssumptionFailed,
  ParseError,
  SchemaError,
  InvalidArgument,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::InvalidRate: return "InvalidRate";
    case ErrorKind::RankDeficientA: return "RankDeficientA";
    case ErrorKind::MalformedCycledSignal: return "MalformedCycledSignal";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ExcitationDeficient: return "ExcitationDeficient";
    case ErrorKind::RankConditionFailed: return "RankConditionFailed";
    case ErrorKind::StructureViolation: return "StructureViolation";
    case ErrorKind::AssumptionFailed: return "AssumptionFailed";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is the stable, testable part;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// CLI exit status for an error: 2 configuration, 3 data, 4 assumption or structure.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::SchemaError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidRate:
    case ErrorKind::NonSquare:
      return 2;
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonFinite:
    case ErrorKind::MalformedCycledSignal:
    case ErrorKind::InsufficientData:
    case ErrorKind::ExcitationDeficient:
      return 3;
    case ErrorKind::Singular:
    case ErrorKind::RankDeficientA:
    case ErrorKind::RankConditionFailed:
    case ErrorKind::StructureViolation:
    case ErrorKind::AssumptionFailed:
      return 4;
  }
  return 4;
}

}  // namespace mrid

#endif  // MRID_ERROR_HPP
