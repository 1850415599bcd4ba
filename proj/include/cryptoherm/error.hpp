#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cryptoherm {

/// Failure categories shared by every module. The numeric values are part of
/// the C API (see cryptoherm.h) and must stay in sync with chq_status.
enum class ErrorCode : int {
  InvalidArgument = 1,
  NonConvergence = 2,
  DefectiveMatrix = 3,
  SingularWeight = 4,
  NotHermitian = 5,
  NotPositiveDefinite = 6,
  ComplexSpectrum = 7,
  HermitizationFailed = 8,
  CertificationFailed = 9,
  IllConditionedOmega = 10,
  WindowViolation = 11,
  StepSizeUnderflow = 12,
  GridMismatch = 13,
  DegeneratePath = 14,
  GridTooCoarse = 15,
  SingularTMap = 16,
  CenterOutOfRange = 17,
  BandEdge = 18,
  SupportTouchesLead = 19,
  ConfigError = 20,
  IoError = 21,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Raised by `eig`-style kernels when an eigenvalue problem is not
/// diagonalizable to working precision. Carries the worst biorthogonal overlap.
class DefectiveMatrixError : public Error {
 public:
  DefectiveMatrixError(const std::string& what, double overlap)
      : Error(ErrorCode::DefectiveMatrix, what), overlap_(overlap) {}
  double overlap() const noexcept { return overlap_; }

 private:
  double overlap_;
};

class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(const std::string& what, double min_eigenvalue)
      : Error(ErrorCode::NotPositiveDefinite, what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace cryptoherm
