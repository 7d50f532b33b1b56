#pragma once

// Spin-orbital Pauli constraint tables for d-shells, the spinless (polarized)
// constraints, particle-hole duality and symmetry specialization.

#include "paulimag/polytope.hpp"
#include "paulimag/rational.hpp"
#include "paulimag/system.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace paulimag {

/// Supported: d7 high, d8 high, d7 low, d^N high for N in {1,4,5,6,9}, and d3/d2
/// high through particle_hole_dual. Throws Error(UnsupportedShell) otherwise.
ConstraintSystem load_catalog(const ShellConfig& shell);

/// Spinless constraints of spin-polarized electrons: (3,7), (3, even n),
/// (2, n), and the d-shell shapes for N in {3,7,8}.
ConstraintSystem load_spinless_catalog(int electron_count, int orbital_dim);

/// nu_i -> 2 - nu_{6-i}; N -> 10 - N. Spin coefficients are unchanged.
ConstraintSystem particle_hole_dual(const ConstraintSystem& system);

/// Raw text of an embedded table ("d7_high", "d8_high", "d7_low").
const std::string& table_text(const std::string& name);

/// FNV-1a 64 of the embedded table text.
std::uint64_t table_checksum(const std::string& name);

/// Table text format: "a1 .. a5 | b1 .. bk | <= | c" per row, '#' comments,
/// "# shell d7-high" and "# cubicle L1" headers. Witness rows are written as
/// "# witness nu ..." / "# witness mu ...".
std::string dump_system(const ConstraintSystem& system);
ConstraintSystem parse_system(std::string_view text);

struct CubicleGroup {
  std::string label;
  std::size_t rows = 0;
  /// Number of distinct (sorted a, sorted b, c) keys in the cubicle.
  std::size_t keys = 0;
  /// Origins of rows whose key differs from the cubicle's majority key.
  std::vector<std::string> outliers;
};

struct CubicleReport {
  std::vector<CubicleGroup> groups;
  bool consistent() const;
};

/// Groups table rows by (sorted orbital, sorted spin, bound) and compares the
/// groups with the printed cubicle blocks.
CubicleReport cubicle_self_check(const ConstraintSystem& system);

// --- symmetry specialization ----------------------------------------------

enum class SymmetryKind { BCC, FCC, Spherical, Hexagonal, Free };

struct SymmetrySpec {
  SymmetryKind kind = SymmetryKind::Free;
  /// BCC/FCC: "a" (t2g occupancy), omitted for a symbolic specialization.
  /// Hexagonal: "a" (a_g), "b" (e_g), "c" (e_g'). Free: "nu1".."nu5".
  std::map<std::string, Rational> parameters;
};

std::string to_string(SymmetryKind kind);
SymmetryKind parse_symmetry_kind(const std::string& text);

/// Orbital occupancy induced by a numeric symmetry spec. Throws
/// Error(InfeasibleSymmetry) if it is not sorted-compatible, outside the box or
/// does not sum to the electron count.
OccupancyVector symmetry_occupancy(const ShellConfig& shell, const SymmetrySpec& sym);

/// Homogeneous row (constant + slope * a) . mu <= 0.
struct ParametricRow {
  RationalVector constant;
  RationalVector slope;
  std::string origin;

  RationalVector at(const Rational& a) const;
};

struct SpecializedSystem {
  ShellConfig shell;
  SymmetrySpec symmetry;
  bool symbolic = false;

  /// Numeric case: table rows b . mu <= c after substitution.
  std::vector<Inequality> rows;

  /// Symbolic case: table rows homogenized with sum(mu) = 1, valid on
  /// [domain_min, domain_max].
  std::vector<ParametricRow> parametric_rows;
  Rational domain_min;
  Rational domain_max;

  /// mu ordering, mu >= 0 and sum(mu) = 1 (never removed).
  std::vector<Inequality> structural;

  /// Spin polytope over mu at the parameter value (symbolic) or as is.
  Polytope polytope(const std::optional<Rational>& a = std::nullopt) const;
};

/// Substitutes the symmetric orbital occupancy, removes redundant rows. A BCC
/// or FCC spec without "a" is treated symbolically: the domain of a comes from
/// the purely orbital rows, and a row is dropped when it is redundant at every
/// point of a rational grid on the domain (endpoints included).
SpecializedSystem specialize(const ConstraintSystem& system, const SymmetrySpec& sym,
                             std::size_t grid_points = 64);

/// The nine-row BCC d7 list in its customary printed order, homogeneous in mu.
std::vector<ParametricRow> bcc_reference_rows();

/// True if the two homogeneous rows agree up to a positive constant factor.
bool same_up_to_scaling(const ParametricRow& lhs, const ParametricRow& rhs);

}  // namespace paulimag
