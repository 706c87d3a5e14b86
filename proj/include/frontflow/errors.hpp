#pragma once

#include <stdexcept>
#include <string>

namespace frontflow {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FRONTFLOW_DEFINE_ERROR(NAME)                        \
  class NAME : public Error {                               \
   public:                                                  \
    explicit NAME(const std::string& msg) : Error(msg) {}   \
  }

// Parameter validation
FRONTFLOW_DEFINE_ERROR(OrderingViolation);
FRONTFLOW_DEFINE_ERROR(SignViolation);
FRONTFLOW_DEFINE_ERROR(DensityViolation);
FRONTFLOW_DEFINE_ERROR(ClosingSpeedViolation);

// Analytic layer
FRONTFLOW_DEFINE_ERROR(EmptyGroup);
FRONTFLOW_DEFINE_ERROR(DegenerateParameters);
FRONTFLOW_DEFINE_ERROR(InternalInconsistency);
FRONTFLOW_DEFINE_ERROR(ToleranceNotReached);

// Face calculus
FRONTFLOW_DEFINE_ERROR(NotErgodicFace);
FRONTFLOW_DEFINE_ERROR(NotErgodicProcess);
FRONTFLOW_DEFINE_ERROR(FaceIsErgodic);

// Flow
FRONTFLOW_DEFINE_ERROR(NotOnManifold);

// Simulation / statistics
FRONTFLOW_DEFINE_ERROR(BadFamilyParams);
FRONTFLOW_DEFINE_ERROR(StopTooSmall);
FRONTFLOW_DEFINE_ERROR(InsufficientData);

// Config / CLI
FRONTFLOW_DEFINE_ERROR(ParseError);
FRONTFLOW_DEFINE_ERROR(SchemaError);

#undef FRONTFLOW_DEFINE_ERROR

}  // namespace frontflow
