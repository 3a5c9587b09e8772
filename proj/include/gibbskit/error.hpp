#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gibbskit {

enum class ErrorCode {
  InvalidArgument,
  BudgetExceeded,
  AlphabetMismatch,
  TolUnreachable,
  NotUAC,
  BackgroundMismatch,
  NonConvergent,
  NullKernel,
  NoConvergence,
  PatternTooShort,
  NonAbsolutelyContinuous,
  MarginViolation,
  ModelError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorCode::TolUnreachable: return "TolUnreachable";
    case ErrorCode::NotUAC: return "NotUAC";
    case ErrorCode::BackgroundMismatch: return "BackgroundMismatch";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NullKernel: return "NullKernel";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PatternTooShort: return "PatternTooShort";
    case ErrorCode::NonAbsolutelyContinuous: return "NonAbsolutelyContinuous";
    case ErrorCode::MarginViolation: return "MarginViolation";
    case ErrorCode::ModelError: return "ModelError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

/// Caps exhaustive enumeration. Every routine that sums over E^W checks its
/// pattern count against this before allocating or looping.
struct Budget {
  std::uint64_t max_patterns = std::uint64_t{1} << 24;
};

}  // namespace gibbskit
