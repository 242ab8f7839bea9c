#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace wxreg {

/// Broad failure class, used by the command line tool to pick an exit code.
enum class ErrorCategory {
  usage,    // bad input, configuration or file contents
  forward,  // the forward model could not be evaluated (tangled mesh, ...)
  solver,   // a linear solve broke down or did not converge
  internal  // convention or consistency check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

  /// Time step at which the error was raised, when it happened inside a
  /// forward integration.
  std::optional<int> step() const noexcept { return step_; }
  void set_step(int step) noexcept { step_ = step; }

  /// Message including the step annotation, if any.
  std::string describe() const;

 private:
  ErrorCategory category_;
  std::optional<int> step_;
};

#define WXREG_DECLARE_ERROR(Name, Category)                  \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what)                   \
        : Error(ErrorCategory::Category, #Name ": " + what) {} \
  }

// mesh
WXREG_DECLARE_ERROR(GenerationFailure, internal);
WXREG_DECLARE_ERROR(ParseError, usage);
WXREG_DECLARE_ERROR(CurveNotClosed, usage);
WXREG_DECLARE_ERROR(CurveOnBoundary, usage);
WXREG_DECLARE_ERROR(SingularCell, forward);
WXREG_DECLARE_ERROR(TangledMesh, forward);
WXREG_DECLARE_ERROR(PreconditionViolation, usage);

// element
WXREG_DECLARE_ERROR(IllConditioned, internal);
WXREG_DECLARE_ERROR(DualityFailure, internal);
WXREG_DECLARE_ERROR(PointOutsideCell, usage);

// linear algebra
WXREG_DECLARE_ERROR(NotConverged, solver);
WXREG_DECLARE_ERROR(NotPositiveDefinite, solver);
WXREG_DECLARE_ERROR(SingularGram, solver);

// data
WXREG_DECLARE_ERROR(ShapeMismatch, usage);
WXREG_DECLARE_ERROR(ConfigError, usage);
WXREG_DECLARE_ERROR(IoError, usage);

// ensemble
WXREG_DECLARE_ERROR(AllMembersFailed, forward);

#undef WXREG_DECLARE_ERROR

}  // namespace wxreg
