#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace paulimag {

enum class ErrorCode {
  UnsupportedShell,
  InfeasibleSymmetry,
  DimensionMismatch,
  Infeasible,
  Unbounded,
  UnboundedPolytope,
  DegeneratePolytope,
  EmptyPolytope,
  HighSpinInfeasible,
  CollapseToSingletState,
  InvalidPopulations,
  Range,
  NoRootAboveOne,
  NonConvergence,
  OutOfRange,
  DegenerateFit,
  Parse,
};

/// Stable machine-readable name, used by the CLI error object.
std::string_view error_code_name(ErrorCode code);

/// Domain failure raised by every module. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace paulimag
