#pragma once

#include <stdexcept>
#include <string>

namespace cpb {

// Exit codes used by the CLI: 2 = bad parameter/usage, 3 = numeric failure,
// 4 = bound or invariant violation.
class Error : public std::runtime_error {
 public:
  Error(const char* code, int exit_code, const std::string& msg)
      : std::runtime_error(std::string(code) + ": " + msg),
        code_(code),
        exit_code_(exit_code) {}

  const char* code() const noexcept { return code_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  const char* code_;
  int exit_code_;
};

#define CPB_DEFINE_ERROR(NAME, EXIT_CODE)                      \
  class NAME : public Error {                                  \
   public:                                                     \
    explicit NAME(const std::string& msg)                      \
        : Error(#NAME, EXIT_CODE, msg) {}                      \
  }

CPB_DEFINE_ERROR(InvalidParameter, 2);
CPB_DEFINE_ERROR(InvalidArcCount, 2);
CPB_DEFINE_ERROR(EqualConsecutiveRadii, 2);
CPB_DEFINE_ERROR(ClosureViolation, 2);
CPB_DEFINE_ERROR(NotRational, 2);
CPB_DEFINE_ERROR(InvalidN, 2);
CPB_DEFINE_ERROR(EmptyIntersection, 2);
CPB_DEFINE_ERROR(NotAdmissiblePair, 2);
CPB_DEFINE_ERROR(NotInPolytope, 2);
CPB_DEFINE_ERROR(NotSliding, 2);
CPB_DEFINE_ERROR(WindowTooLarge, 2);
CPB_DEFINE_ERROR(CapTooSmall, 2);
CPB_DEFINE_ERROR(IndexOutOfRange, 2);
CPB_DEFINE_ERROR(TargetOutOfRange, 2);
CPB_DEFINE_ERROR(DimensionTooLarge, 2);

CPB_DEFINE_ERROR(DomainError, 3);
CPB_DEFINE_ERROR(DegenerateChord, 3);
CPB_DEFINE_ERROR(NoIntersection, 3);
CPB_DEFINE_ERROR(NoConvergence, 3);
CPB_DEFINE_ERROR(RealizationFailed, 3);
CPB_DEFINE_ERROR(Unreachable, 3);
CPB_DEFINE_ERROR(GuardBandAmbiguous, 3);
CPB_DEFINE_ERROR(EmptyCube, 3);
CPB_DEFINE_ERROR(DegeneratePolytope, 3);

CPB_DEFINE_ERROR(BoundViolation, 4);

#undef CPB_DEFINE_ERROR

}  // namespace cpb
