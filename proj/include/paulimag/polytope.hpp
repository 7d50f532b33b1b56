#pragma once

// Exact rational polyhedral computations: feasibility, linear optimization,
// Fourier-Motzkin projection, vertex enumeration, redundancy removal, volume.

#include "paulimag/rational.hpp"
#include "paulimag/system.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace paulimag {

/// normal·x <= bound (or == bound when stored among equalities).
struct Halfspace {
  RationalVector normal;
  Rational bound;
  std::string label;

  friend bool operator==(const Halfspace& lhs, const Halfspace& rhs) {
    return lhs.normal == rhs.normal && lhs.bound == rhs.bound;
  }
};

/// H-representation over `dimension` variables.
struct Polytope {
  std::size_t dimension = 0;
  std::vector<Halfspace> inequalities;
  std::vector<Halfspace> equalities;
  std::vector<std::string> variables;

  void add_inequality(RationalVector normal, Rational bound, std::string label = {});
  void add_equality(RationalVector normal, Rational bound, std::string label = {});
};

/// Canonical representative of a row: coefficients on the pivot variables of
/// `equalities` are eliminated, then the row is scaled by a positive factor to
/// coprime integers. Two rows describe the same half-space of the affine hull
/// iff their canonical forms agree.
Halfspace canonical_row(const Halfspace& row, const std::vector<Halfspace>& equalities);

enum class Direction { Maximize, Minimize };
enum class LPStatus { Optimal, Infeasible, Unbounded };

/// For an optimal result the multipliers certify the value: with s = +1 for
/// Maximize and -1 for Minimize,
///   sum_i y_i a_i + sum_k z_k e_k = s * objective,  y >= 0,
///   sum_i y_i b_i + sum_k z_k f_k = s * value.
struct LPResult {
  LPStatus status = LPStatus::Infeasible;
  Rational value;
  RationalVector argpoint;
  RationalVector inequality_multipliers;
  RationalVector equality_multipliers;
};

/// Exact simplex (run on the dual, Bland's rule). Never throws on
/// infeasible/unbounded; inspect `status`.
LPResult lp_solve(const Polytope& poly, const RationalVector& objective, Direction direction);

/// As lp_solve, but throws Error(Infeasible|Unbounded) unless optimal.
LPResult lp_optimize(const Polytope& poly, const RationalVector& objective, Direction direction);

/// Checks primal feasibility, dual feasibility and the value identity exactly.
bool verify_certificate(const Polytope& poly, const RationalVector& objective,
                        Direction direction, const LPResult& result);

struct PointCheck {
  bool feasible = true;
  std::vector<std::size_t> violated_inequalities;
  std::vector<std::size_t> violated_equalities;
};

PointCheck check_point(const Polytope& poly, const RationalVector& point);

bool is_feasible(const Polytope& poly);

/// Row r survives iff max of its left side over the remaining rows exceeds its
/// bound. Exact duplicates (after canonical_row) are merged first. Throws
/// Error(Infeasible) on an empty polytope.
Polytope remove_redundant(const Polytope& poly);

/// Fourier-Motzkin elimination. Equalities are used first to substitute
/// variables away; the remaining ones are eliminated pairwise with primitive
/// normalization and exact redundancy pruning after every step. The result is
/// expressed over the kept variables in their original order.
Polytope project_out(const Polytope& poly, const std::vector<std::size_t>& eliminate);

/// All vertices, sorted lexicographically. Throws Error(UnboundedPolytope).
std::vector<RationalVector> enumerate_vertices(const Polytope& poly);

/// Vertices of `poly` lying on the face where `objective` attains its maximum.
std::vector<RationalVector> optimal_face_vertices(const Polytope& poly,
                                                  const RationalVector& objective);

struct VolumeResult {
  Rational value;
  std::size_t affine_dimension = 0;
  bool full_dimensional = false;
  /// Coordinates used as the chart (the equality pivots, taken from the last
  /// variables, are dropped).
  std::vector<std::size_t> chart;
};

/// Exact volume by a pulling triangulation of the vertex set, measured in the
/// chart that drops the equality pivot variables. Degenerate polytopes report
/// full_dimensional = false and value 0.
VolumeResult volume(const Polytope& poly);

// --- adapters for constraint systems --------------------------------------

/// Variables are ordered [nu_1..nu_n, mu_1..mu_k]. Structural rows included.
Polytope to_polytope(const ConstraintSystem& system);

/// The spin polytope at fixed (sorted) orbital occupancies: variables mu_1..mu_k.
Polytope spin_polytope(const ConstraintSystem& system, const OccupancyVector& orbital);

struct SystemCheck {
  bool feasible = true;
  /// Rendered rows that fail, in table order (structural rows last).
  std::vector<std::string> violated;
};

/// Sorts both occupancy vectors, then evaluates every table and structural row.
/// Throws Error(DimensionMismatch) if the lengths do not match the shell.
SystemCheck feasible(const ConstraintSystem& system, const OccupancyVector& orbital,
                     const OccupancyVector& spin);

/// Optional derived variable appended after the system variables.
struct DerivedVariable {
  std::string name;
  /// Coefficients over the system variables: name = coeffs · x.
  RationalVector coefficients;
  /// Pin the derived variable to a value (e.g. M = 0).
  std::optional<Rational> fixed;
};

/// Projects a constraint system onto the variables not in `eliminate`,
/// optionally introducing a derived variable first. Returned rows are over the
/// kept variables (plus the derived one, last).
Polytope project_out(const ConstraintSystem& system, const std::vector<std::size_t>& eliminate,
                     const std::optional<DerivedVariable>& introduce = std::nullopt);

}  // namespace paulimag
