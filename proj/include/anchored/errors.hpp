#pragma once

#include <stdexcept>
#include <string>

namespace anchored {

// Base for every solver-level failure. `name()` is the stable identifier
// reported by the CLI (exit code 3) and in telemetry JSON.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

#define ANCHORED_DEFINE_ERROR(Type)                           \
  class Type : public SolverError {                           \
   public:                                                    \
    explicit Type(const std::string& what)                    \
        : SolverError(#Type, what) {}                         \
  }

ANCHORED_DEFINE_ERROR(NonFiniteIntegrand);
ANCHORED_DEFINE_ERROR(NoSignChange);
ANCHORED_DEFINE_ERROR(InvalidBranch);
ANCHORED_DEFINE_ERROR(IllConditionedPayoff);
ANCHORED_DEFINE_ERROR(InfeasiblePartition);
ANCHORED_DEFINE_ERROR(OnlyBabbling);
ANCHORED_DEFINE_ERROR(NoInducingAnchor);
ANCHORED_DEFINE_ERROR(RegularityViolation);
ANCHORED_DEFINE_ERROR(NoRegularEquilibrium);
ANCHORED_DEFINE_ERROR(NoHybridFound);
ANCHORED_DEFINE_ERROR(SpectralFailure);
ANCHORED_DEFINE_ERROR(AlignmentViolation);
ANCHORED_DEFINE_ERROR(AssumptionViolation);
ANCHORED_DEFINE_ERROR(InvalidSpec);

#undef ANCHORED_DEFINE_ERROR

}  // namespace anchored
