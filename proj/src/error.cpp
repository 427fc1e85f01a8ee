#include "shapephase/error.hpp"

namespace shapephase {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::AxisNotFixed: return "AxisNotFixed";
    case ErrorCode::AntipodalInput: return "AntipodalInput";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::BinaryCollision: return "BinaryCollision";
    case ErrorCode::TripleCollision: return "TripleCollision";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::TripleCollisionApproach: return "TripleCollisionApproach";
    case ErrorCode::PersistentlyCollinear: return "PersistentlyCollinear";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::UndefinedAtCollinear: return "UndefinedAtCollinear";
    case ErrorCode::EigenframeDegenerate: return "EigenframeDegenerate";
    case ErrorCode::LiftStepFailure: return "LiftStepFailure";
    case ErrorCode::ChartViolation: return "ChartViolation";
    case ErrorCode::ShapeNotClosed: return "ShapeNotClosed";
    case ErrorCode::NotSimilar: return "NotSimilar";
    case ErrorCode::AntipodalNormal: return "AntipodalNormal";
    case ErrorCode::ZeroMomentum: return "ZeroMomentum";
    case ErrorCode::NoReturn: return "NoReturn";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
      return 3;
    case ErrorCode::StepFailure:
    case ErrorCode::LiftStepFailure:
      return 1;
    default:
      return 2;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace shapephase
