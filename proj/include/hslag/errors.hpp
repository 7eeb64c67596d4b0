#pragma once

#include <stdexcept>
#include <string>

namespace hslag {

/// Base class for all toolkit errors. Every concrete error carries a stable
/// machine-readable code used by the CLI report writer.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

#define HSLAG_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                       \
  public:                                                           \
    explicit Name(const std::string& what = "") : Error(#Name, what) {} \
  }

// geometry backends
HSLAG_DEFINE_ERROR(PointOutsideChart);
HSLAG_DEFINE_ERROR(DegenerateMetric);
HSLAG_DEFINE_ERROR(FlowLeftAtlas);
HSLAG_DEFINE_ERROR(UnsupportedBackend);

// polytopes / toric
HSLAG_DEFINE_ERROR(NonCompact);
HSLAG_DEFINE_ERROR(NonSimpleVertex);
HSLAG_DEFINE_ERROR(NonUnimodularVertex);
HSLAG_DEFINE_ERROR(BoundaryPoint);
HSLAG_DEFINE_ERROR(ZeroVector);
HSLAG_DEFINE_ERROR(DegenerateOrbit);

// immersions
HSLAG_DEFINE_ERROR(DegenerateInducedMetric);
HSLAG_DEFINE_ERROR(TubeTooSmall);
HSLAG_DEFINE_ERROR(SolverDiverged);
HSLAG_DEFINE_ERROR(FamilyOverlap);

// box operator
HSLAG_DEFINE_ERROR(NonIntegrableBackend);
HSLAG_DEFINE_ERROR(QuadratureUnderResolved);
HSLAG_DEFINE_ERROR(EigenSolverFailure);

// deformation pipeline
HSLAG_DEFINE_ERROR(NewtonDiverged);
HSLAG_DEFINE_ERROR(ObstructionRankLoss);
HSLAG_DEFINE_ERROR(IllConditionedBox);
HSLAG_DEFINE_ERROR(DescentStalled);
HSLAG_DEFINE_ERROR(DegenerateMinimum);
HSLAG_DEFINE_ERROR(ConstraintDriftExceeded);
HSLAG_DEFINE_ERROR(NonTransverseSubgroup);

class ContinuationStopped : public Error {
public:
  ContinuationStopped(double t, const std::string& reason)
      : Error("ContinuationStopped",
              "t=" + std::to_string(t) + " (" + reason + ")"),
        t_(t), reason_(reason) {}
  double t() const { return t_; }
  const std::string& reason() const { return reason_; }

private:
  double t_;
  std::string reason_;
};

// cli
HSLAG_DEFINE_ERROR(ConfigInvalid);
HSLAG_DEFINE_ERROR(TaskFailed);

#undef HSLAG_DEFINE_ERROR

}  // namespace hslag
