#include "paulimag/error.hpp"

namespace paulimag {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedShell: return "UnsupportedShell";
    case ErrorCode::InfeasibleSymmetry: return "InfeasibleSymmetry";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::UnboundedPolytope: return "UnboundedPolytope";
    case ErrorCode::DegeneratePolytope: return "DegeneratePolytope";
    case ErrorCode::EmptyPolytope: return "EmptyPolytope";
    case ErrorCode::HighSpinInfeasible: return "HighSpinInfeasible";
    case ErrorCode::CollapseToSingletState: return "CollapseToSingletState";
    case ErrorCode::InvalidPopulations: return "InvalidPopulations";
    case ErrorCode::Range: return "RangeError";
    case ErrorCode::NoRootAboveOne: return "NoRootAboveOne";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::Parse: return "ParseError";
  }
  return "Unknown";
}

}  // namespace paulimag
