#pragma once

#include <stdexcept>
#include <string>

namespace shapephase {

enum class ErrorCode {
  // rotation algebra
  AxisNotFixed,
  AntipodalInput,
  DegenerateFit,
  // triangle geometry / potentials
  BinaryCollision,
  TripleCollision,
  // integration
  StepFailure,
  TripleCollisionApproach,
  PersistentlyCollinear,
  // reduction / gauge
  PreconditionViolated,
  UndefinedAtCollinear,
  EigenframeDegenerate,
  LiftStepFailure,
  ChartViolation,
  // reconstruction
  ShapeNotClosed,
  NotSimilar,
  AntipodalNormal,
  ZeroMomentum,
  NoReturn,
  // harness
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode c);

// Exit-code contract for the command-line tools:
//   0 success, 1 numerical-tolerance failure, 2 precondition/physics failure,
//   3 I/O or configuration failure.
int exit_code_for(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace shapephase
