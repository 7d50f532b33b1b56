#pragma once

// Moment bounds, floors and element-level analyses built on the catalog and
// the polytope layer.

#include "paulimag/catalog.hpp"
#include "paulimag/polytope.hpp"
#include "paulimag/system.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace paulimag {

/// Quantized moment per spin level: M = m . mu (Bohr magnetons).
struct MomentObjective {
  RationalVector spin_coeffs;

  /// (3,1,-1,-3) for S = 3/2, (2,0,-2) for S = 1, (1,-1) for S = 1/2, ...
  static MomentObjective for_shell(const ShellConfig& shell);

  Rational value(const RationalVector& mu) const { return dot(spin_coeffs, mu); }
};

/// A closed-form bound M <= orbital . nu + constant (or >= for lower bounds).
struct ProjectedBound {
  std::string label;
  RationalVector orbital;
  Rational constant;
  bool upper = true;

  Rational value(const RationalVector& nu) const { return dot(orbital, nu) + constant; }
};

/// Known closed-form moment bounds of a shell (empty when none are known).
std::vector<ProjectedBound> projected_bounds(const ShellConfig& shell);

struct CertificateRow {
  std::string label;
  Rational multiplier;
};

struct MomentBound {
  Rational value;
  RationalVector argmax;
  /// Rows carrying a positive multiplier in the dual certificate.
  std::vector<CertificateRow> certificate;
  /// Closed-form bounds that evaluate to `value` at nu.
  std::vector<std::string> tight_bounds;
  bool certificate_verified = false;
};

/// LP maximum (or minimum) of the moment over mu at fixed nu. Throws
/// Error(HighSpinInfeasible) when no mu is compatible with nu.
MomentBound moment_bound(const ConstraintSystem& system, const OccupancyVector& nu);
MomentBound moment_floor(const ConstraintSystem& system, const OccupancyVector& nu);

struct SpinIndependence {
  bool consistent = true;
  /// d8: nu1 + nu5 < 3 (the shell is forced into S = 0).
  bool collapse = false;
  /// nu3 + nu4 - nu5 for d7, nu1 + nu5 for d8.
  Rational quantity;
  std::vector<std::string> violated;
};

SpinIndependence spin_independence_check(const ShellConfig& shell, const OccupancyVector& nu);

// --- iron ------------------------------------------------------------------

struct DiagramVertex {
  std::string label;
  Rational a;
  Rational moment;
};

/// M = intercept + slope * a on [a_from, a_to]; mu(a) = mu_constant + mu_slope * a
/// is an optimal spin configuration along the segment.
struct DiagramSegment {
  std::string from;
  std::string to;
  Rational a_from;
  Rational a_to;
  Rational intercept;
  Rational slope;
  RationalVector mu_constant;
  RationalVector mu_slope;
};

struct IronDiagram {
  std::vector<DiagramVertex> vertices;  // clockwise from the top-left vertex
  std::vector<DiagramSegment> upper;
  std::vector<DiagramSegment> lower;
};

/// Admissible (a, M) region of BCC d7 for a in [a_min, a_max] subset of [7/5, 5/3].
IronDiagram iron_diagram(const Rational& a_min = Rational(7, 5), const Rational& a_max = Rational(5, 3));

// --- cobalt ----------------------------------------------------------------

struct CobaltCase {
  std::string name;  // "no-split", "eps<delta", "eps>delta"
  Rational epsilon;
  Rational delta;
  Rational bound;
  RationalVector nu;  // sorted adjusted occupancies
};

struct Interval {
  Rational lo;
  Rational hi;
};

struct CobaltResult {
  CobaltCase best;
  std::vector<CobaltCase> cases;
  /// Range of the best bound over the corners of the uncertainty box, when
  /// uncertainties are given.
  std::optional<Interval> image;
};

struct CobaltUncertainty {
  Rational a;
  Rational b;
  Rational c;
};

/// Maximizes the Co-framed bound 3nu3 + (nu4 - nu5) - 5(nu1 - nu2) over the
/// splits (a, b+e, b-e, c+d, c-d) with 2e + 4d = M_orb. Throws
/// Error(InvalidPopulations) for occupancies outside [0,2] or a < b < c.
CobaltResult cobalt_bound(const Rational& a, const Rational& b, const Rational& c, const Rational& orbital_moment,
                          const std::optional<CobaltUncertainty>& uncertainty = std::nullopt);

/// Bound on one split, evaluated on the sorted adjusted occupancies.
Rational cobalt_split_bound(const Rational& a, const Rational& b, const Rational& c, const Rational& epsilon,
                            const Rational& delta);

// --- nickel ----------------------------------------------------------------

struct NickelBounds {
  std::vector<Rational> rows;   // the four closed-form bounds, displayed order
  Rational minimum;
  std::size_t attaining_row = 0;  // 1-based
  Rational lp_value;
  bool agrees_with_lp = false;
  /// Set when the minimum is attained by a row other than the first.
  bool attribution_differs_from_first = false;
};

/// Throws Error(InvalidPopulations) if nu1 > 2, Error(CollapseToSingletState)
/// if nu1 + nu5 < 3.
NickelBounds nickel_bounds(const OccupancyVector& nu);

// --- d7 orbital regions ------------------------------------------------------

/// Orbital occupancies of d7 high compatible with M = 0, over nu1..nu5.
Polytope zero_moment_region();

/// Sorted nu with sum 7 and nu1 <= 2: the reference set for volume fractions.
Polytope orbital_reference_region();

struct VolumeFraction {
  Rational region;
  Rational reference;
  Rational fraction;
};

VolumeFraction zero_moment_fraction();

struct FreeSpinCheck {
  bool free = false;
  /// nu1 >= nu3 >= 1: the labeled vector is already sorted.
  bool ordered = false;
  OccupancyVector nu;
  /// Vertices of the sorted spin simplex that are excluded.
  std::vector<RationalVector> excluded;
};

/// Whether nu = (nu1, nu1, 3 - nu1, 3 - nu1, 1) is sorted as labeled and every
/// vertex of the sorted spin simplex is admissible for d7 high there.
FreeSpinCheck free_spin_check(const Rational& nu1);

// --- presets -------------------------------------------------------------------

struct MeasuredValue {
  Rational value;
  Rational uncertainty;
};

struct ElementPreset {
  std::string element;
  std::string structure;
  std::string shell;
  std::map<std::string, MeasuredValue> occupancies;
  Rational moment_total;
  Rational moment_spin;
  Rational moment_orbital;
  std::vector<std::string> sources;
};

/// "fe", "co" or "ni" (case-insensitive).
ElementPreset load_preset(const std::string& element);
std::vector<std::string> preset_names();

}  // namespace paulimag
