#pragma once

// Constrained Gibbs statistics of spin levels over a moment polytope, the
// Weiss mean-field closure and utilities for comparing with measured series.

#include "paulimag/polytope.hpp"
#include "paulimag/rational.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paulimag {

/// Normalized weights mu_i ~ exp(beta m_i).
std::vector<double> gibbs(double beta, const std::vector<double>& m);

/// Homogeneous facets g . mu <= 0 of a spin polytope, obtained from rows
/// h . mu <= d via g = h - d (using sum(mu) = 1). Nonnegativity and ordering
/// rows are left out: the exponential family satisfies them by itself.
struct ThermalFacets {
  std::vector<std::vector<double>> rows;
  std::vector<RationalVector> exact_rows;
  std::vector<std::string> labels;
  std::size_t dimension = 0;
};

ThermalFacets thermal_facets(const Polytope& poly);

struct ThermalState {
  double beta = 0;
  std::vector<double> mu;
  /// Indices into ThermalFacets::rows, ascending.
  std::vector<std::size_t> active;
  /// Coefficient of each active facet in the exponent:
  /// mu_i ~ exp(beta m_i + sum_k multiplier_k g_{k,i}); never positive.
  std::vector<double> multipliers;
  int regime = 1;
  double residual = 0;
  std::size_t iterations = 0;
  bool converged = false;
  /// mu is weakly decreasing (expected for beta >= 0 and decreasing m).
  bool ordered = true;
  double moment = 0;
  double entropy = 0;
};

struct SolverOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 200;
  /// Keep exactly this active set (no facet is added or dropped).
  std::optional<std::vector<std::size_t>> fixed_active;
};

/// Minimizer of -beta m.mu - S(mu) over the polytope, by an active-set method
/// on the dual with damped Newton steps. Throws Error(EmptyPolytope) when the
/// facets leave no strictly positive mu, Error(NonConvergence) when the
/// iteration budget is exhausted.
ThermalState minimize_free_energy(double beta, const ThermalFacets& facets, const std::vector<double>& m,
                                  const std::optional<ThermalState>& warm = std::nullopt,
                                  const SolverOptions& options = {});

ThermalState minimize_free_energy(double beta, const Polytope& poly, const std::vector<double>& m);

struct CriticalBetas {
  double beta1 = 0;
  double beta2 = 0;
  double alpha = 0;  // exp(2 beta1), root of the cubic
};

/// For BCC d7 with a in [7/5, 19/13): beta1 = ln(alpha)/2 with alpha > 1 the
/// root of (11-7a)x^3 + (9-7a)x^2 + (7-7a)x + (9-7a), and
/// beta2 = ln((20-12a)/(19-13a))/4. Throws Error(Range) or Error(NoRootAboveOne).
CriticalBetas critical_betas(const Rational& a);

/// Unique root above one of c0 x^3 + c1 x^2 + c2 x + c3, if any.
std::optional<double> cubic_root_above_one(double c0, double c1, double c2, double c3);

struct Activation {
  double beta = 0;
  std::size_t facet = 0;
  std::string label;
  /// 1-based position in the nine-row BCC list, when the facet matches one.
  std::optional<std::size_t> reference_index;
  /// Regime entered at this activation.
  int regime = 1;
};

struct Trajectory {
  ThermalFacets facets;
  std::vector<ThermalState> states;
  std::vector<Activation> activations;
};

/// Spin polytope of BCC d7 at t2g occupancy a.
Polytope bcc_spin_polytope(const Rational& a);

/// Thermal evolution along an increasing beta grid, with facet activations
/// located by root finding between grid points.
Trajectory evolve(const Polytope& poly, const std::vector<double>& m, const std::vector<double>& beta_grid);
Trajectory evolve(const Rational& a, const std::vector<double>& beta_grid);

struct CurvePoint {
  double t_reduced = 0;
  double m_reduced = 0;
  double beta = 0;
  int regime = 1;
  /// "beta1" / "beta2" on the first point at or beyond the crossover.
  std::string marker;
  bool converged = true;
};

struct WeissCurve {
  std::vector<CurvePoint> constrained;
  std::vector<CurvePoint> unconstrained;
  double beta1 = 0;
  double beta2 = 0;
  /// M(beta_k) / M_sat and the matching reduced temperatures.
  double m1 = 0;
  double m2 = 0;
  double t1 = 0;
  double t2 = 0;
  double saturation = 0;
  /// Coupling so that the unconstrained model has its Curie point at t = 1.
  double coupling = 0;
};

struct WeissOptions {
  /// Divide moments by this instead of the constrained maximum.
  std::optional<double> saturation;
};

/// Self-consistent M = M(beta), beta = M / (C t) with C = sum(m^2)/k, the
/// choice that puts the unconstrained Curie point at t = 1.
WeissCurve weiss_curve(const Rational& a, const std::vector<double>& t_grid, const WeissOptions& options = {});

/// Unconstrained mean-field reduced magnetization at t.
double pure_weiss_magnetization(const std::vector<double>& m, double t);

// --- measured series -------------------------------------------------------------

struct DataSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string kind;   // "magnetization" or "susceptibility"
  std::string units;  // column header of the value column
};

/// CSV with a header row "T_kelvin, value"; '#' starts a comment line.
/// Throws Error(Parse) unless x is strictly increasing.
DataSeries parse_data_series(std::string_view text, const std::string& kind = "magnetization");
DataSeries load_data_series(const std::string& path, const std::string& kind = "magnetization");

struct CrossoverTemperatures {
  double t1_kelvin = 0;
  double t2_kelvin = 0;
};

/// Shape-preserving interpolation of the inverse map M/M_sat -> T. Throws
/// Error(OutOfRange) when a moment lies outside the data range.
CrossoverTemperatures crossover_temperatures(double m1, double m2, const DataSeries& data);

/// Inverse interpolation at one reduced moment.
double temperature_at(double m_reduced, const DataSeries& data);

struct QuadraticFit {
  double a2 = 0;
  double a0 = 0;
  DataSeries residual;
};

/// Least squares y ~ a2 x^2 + a0 on points with x in [lo, hi] (all points when
/// unset); the residual covers the whole series. Throws Error(DegenerateFit)
/// with fewer than three distinct x in the window.
QuadraticFit fit_quadratic_baseline(const DataSeries& data, std::optional<double> lo = std::nullopt,
                                    std::optional<double> hi = std::nullopt);

/// Interior node where the slope of the series changes most, restricted to
/// [lo, hi] when given.
double largest_slope_change(const DataSeries& series, std::optional<double> lo = std::nullopt,
                            std::optional<double> hi = std::nullopt);

}  // namespace paulimag
