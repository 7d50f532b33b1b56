#pragma once

// Plain data types shared by the catalog, polytope and magnetics layers.

#include "paulimag/rational.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace paulimag {

enum class SpinSector { High, Low, Polarized };

enum class Sense { LessEqual, Equal };

/// One row orbital·ν + spin·μ (<= or =) bound.
struct Inequality {
  RationalVector orbital;
  RationalVector spin;
  Rational bound;
  Sense sense = Sense::LessEqual;

  /// Position inside the source table (cubicle label and 1-based row), if any.
  std::string origin;

  friend bool operator==(const Inequality& lhs, const Inequality& rhs) {
    return lhs.orbital == rhs.orbital && lhs.spin == rhs.spin && lhs.bound == rhs.bound &&
           lhs.sense == rhs.sense;
  }
};

struct ShellConfig {
  int electron_count = 0;
  int orbital_dim = 5;
  SpinSector sector = SpinSector::High;
  Rational total_spin;

  /// Number of spin levels 2S+1 (one for a spin-polarized, spinless system).
  std::size_t spin_multiplicity() const;

  /// "d7-high", "d7-low", "f3-polarized", "n6-3-polarized".
  std::string name() const;

  friend bool operator==(const ShellConfig&, const ShellConfig&) = default;
};

/// High spin d-shell d^N with S = min(N, 10-N)/2.
ShellConfig d_shell(int electron_count, SpinSector sector = SpinSector::High);

/// Parses "d7-high", "d7", "d8-high", "d7-low", "d3-high".
ShellConfig parse_shell(const std::string& text);

/// Sorted occupancy spectrum of either the orbital or the spin density matrix.
struct OccupancyVector {
  enum class Kind { Orbital, Spin };

  RationalVector values;
  Kind kind = Kind::Orbital;
  Rational normalization;

  /// Copies and sorts values weakly decreasing; normalization is the sum.
  static OccupancyVector orbital(RationalVector values);
  static OccupancyVector spin(RationalVector values);

  /// ν = (a,a,a,b,b) with b = (N - 3a)/2.
  static OccupancyVector bcc(const Rational& t2g_occupancy, int electron_count = 7);
  /// ν = (b,b,a,a,a) with b = (N - 3a)/2, sorted.
  static OccupancyVector fcc(const Rational& t2g_occupancy, int electron_count);
  static OccupancyVector spherical(int electron_count, int orbital_dim = 5);
};

/// A shell configuration's half-space description. The table rows live in
/// `inequalities` and `equalities`; ordering, box and normalization rows are
/// generated on demand (see `structural_rows`).
struct ConstraintSystem {
  ShellConfig shell;
  std::vector<Inequality> inequalities;
  std::vector<Inequality> equalities;
  bool ordered = true;

  /// Upper bound of each orbital occupancy (2 with spin, 1 for polarized shells
  /// with at most one electron per orbital). Empty when the box is not imposed.
  std::optional<Rational> orbital_cap = Rational(2);

  /// Point satisfying every row exactly.
  RationalVector witness_orbital;
  RationalVector witness_spin;

  std::size_t variable_count() const {
    return static_cast<std::size_t>(shell.orbital_dim) + shell.spin_multiplicity();
  }

  /// Ordering, box and normalization rows in the same Inequality form.
  std::vector<Inequality> structural_rows() const;
};

std::string to_string(const Inequality& row);

}  // namespace paulimag
