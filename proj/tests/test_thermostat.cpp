#include "doctest.h"
#include "oracles.hpp"

#include "paulimag/catalog.hpp"
#include "paulimag/error.hpp"
#include "paulimag/polytope.hpp"
#include "paulimag/thermostat.hpp"

#include <cmath>
#include <map>

using namespace paulimag;

namespace {

const std::vector<double> kMoment{3, 1, -1, -3};
const Rational kIron(35, 24);

struct DoubleRow {
  std::vector<double> a;
  double b;
};

// Spin polytope of BCC d7 at a, straight from the table rows.
std::vector<DoubleRow> admissible_rows(const Rational& a) {
  auto rows = oracle::spin_rows(load_catalog(d_shell(7)), OccupancyVector::bcc(a).values);
  std::vector<DoubleRow> out;
  for (const auto& r : rows.ineq) {
    DoubleRow d;
    for (const auto& x : r.a) d.a.push_back(x.convert_to<double>());
    d.b = r.b.convert_to<double>();
    out.push_back(d);
  }
  return out;
}

bool admissible(const std::vector<DoubleRow>& rows, const std::vector<double>& mu, double slack = 1e-12) {
  for (const auto& r : rows) {
    double s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += r.a[i] * mu[i];
    if (s > r.b + slack) return false;
  }
  return true;
}

double moment_of(const std::vector<double>& mu) {
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += kMoment[i] * mu[i];
  return s;
}

double entropy_of(const std::vector<double>& mu) {
  double s = 0;
  for (double x : mu)
    if (x > 0) s -= x * std::log(x);
  return s;
}

// Largest violation of the first-order conditions at a solver state.
double kkt_residual(const ThermalState& s, const ThermalFacets& f, double beta) {
  double worst = 0;
  std::vector<double> r(s.mu.size());
  for (std::size_t i = 0; i < s.mu.size(); ++i) {
    r[i] = std::log(s.mu[i]) - beta * kMoment[i];
    for (std::size_t j = 0; j < s.active.size(); ++j) r[i] -= s.multipliers[j] * f.rows[s.active[j]][i];
  }
  worst = *std::max_element(r.begin(), r.end()) - *std::min_element(r.begin(), r.end());
  for (std::size_t k = 0; k < f.rows.size(); ++k) {
    double g = 0;
    for (std::size_t i = 0; i < s.mu.size(); ++i) g += f.rows[k][i] * s.mu[i];
    worst = std::max(worst, g);
  }
  for (std::size_t j = 0; j < s.active.size(); ++j) {
    double g = 0;
    for (std::size_t i = 0; i < s.mu.size(); ++i) g += f.rows[s.active[j]][i] * s.mu[i];
    worst = std::max(worst, std::abs(s.multipliers[j] * g));
    worst = std::max(worst, s.multipliers[j]);
  }
  double total = 0;
  for (double x : s.mu) total += x;
  return std::max(worst, std::abs(total - 1));
}

double cubic_root_by_bisection(const Rational& a) {
  double x = a.convert_to<double>();
  auto f = [&](double y) { return (11 - 7 * x) * y * y * y + (9 - 7 * x) * y * y + (7 - 7 * x) * y + (9 - 7 * x); };
  return oracle::bisect(f, 1, 50);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Parse;
}

}  // namespace

TEST_CASE("gibbs weights") {
  auto u = gibbs(0, kMoment);
  for (double x : u) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));
  for (double beta : {0.1, 0.7, 2.5, 40.0}) {
    auto g = gibbs(beta, kMoment);
    auto o = oracle::boltzmann(beta, kMoment);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(g[i] - o[i]) < 1e-15);
  }
  CHECK(code_of([] { gibbs(1, {}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("thermal facets are homogeneous rows of the spin polytope") {
  Polytope poly = bcc_spin_polytope(kIron);
  ThermalFacets f = thermal_facets(poly);
  CHECK(f.dimension == 4);
  REQUIRE_FALSE(f.rows.empty());
  // g . mu <= 0 agrees with the table rows on random points of the simplex.
  auto rows = admissible_rows(kIron);
  std::mt19937 rng(3);
  std::exponential_distribution<double> e(1.0);
  for (int n = 0; n < 2000; ++n) {
    std::vector<double> mu(4);
    double s = 0;
    for (double& x : mu) s += (x = e(rng));
    for (double& x : mu) x /= s;
    std::sort(mu.rbegin(), mu.rend());
    bool by_facets = true;
    for (const auto& g : f.rows) {
      double v = 0;
      for (std::size_t i = 0; i < 4; ++i) v += g[i] * mu[i];
      by_facets = by_facets && v <= 1e-12;
    }
    CHECK(by_facets == admissible(rows, mu));
  }
}

TEST_CASE("high temperature regime is plain Gibbs") {
  ThermalFacets f = thermal_facets(bcc_spin_polytope(kIron));
  CriticalBetas c = critical_betas(kIron);
  for (double beta : {0.0, 0.1, 0.3, 0.5, c.beta1 - 1e-3}) {
    CAPTURE(beta);
    ThermalState s = minimize_free_energy(beta, f, kMoment);
    CHECK(s.converged);
    CHECK(s.regime == 1);
    CHECK(s.active.empty());
    auto g = oracle::boltzmann(beta, kMoment);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(s.mu[i] - g[i]) < 1e-10);
  }
}

TEST_CASE("minimizer agrees with a dense grid") {
  for (const Rational& a : {kIron, Rational(3, 2), Rational(8, 5)}) {
    auto rows = admissible_rows(a);
    ThermalFacets f = thermal_facets(bcc_spin_polytope(a));
    for (double beta : {0.4, 0.9, 1.6, 3.0}) {
      CAPTURE(a);
      CAPTURE(beta);
      ThermalState s = minimize_free_energy(beta, f, kMoment);
      REQUIRE(s.converged);
      double lib = oracle::free_energy(beta, kMoment, s.mu);
      auto grid = oracle::grid_minimum(beta, kMoment, [&](const std::vector<double>& mu) { return admissible(rows, mu); },
                                       2e-3, 4);
      REQUIRE_FALSE(grid.mu.empty());
      CHECK(std::abs(lib - grid.value) <= 1e-5);
      CHECK(lib <= grid.value + 1e-9);
      CHECK(admissible(rows, s.mu, 1e-10));
    }
  }
}

TEST_CASE("cold and warm starts agree") {
  ThermalFacets f = thermal_facets(bcc_spin_polytope(kIron));
  for (double beta : {0.8, 1.3, 2.0, 5.0}) {
    CAPTURE(beta);
    ThermalState cold = minimize_free_energy(beta, f, kMoment);
    ThermalState from_below = minimize_free_energy(beta, f, kMoment, minimize_free_energy(beta / 2, f, kMoment));
    ThermalState from_above = minimize_free_energy(beta, f, kMoment, minimize_free_energy(beta + 3, f, kMoment));
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(cold.mu[i] - from_below.mu[i]) < 1e-10);
      CHECK(std::abs(cold.mu[i] - from_above.mu[i]) < 1e-10);
    }
    CHECK(cold.active == from_below.active);
    CHECK(cold.active == from_above.active);
  }
}

TEST_CASE("first-order conditions hold along the trajectory") {
  Trajectory t = evolve(kIron, linspace(0, 6, 121));
  REQUIRE(t.states.size() == 121);
  double worst = 0;
  for (const auto& s : t.states) {
    CHECK(s.converged);
    CHECK(s.ordered);
    for (double g : s.multipliers) CHECK(g <= 0);
    worst = std::max(worst, kkt_residual(s, t.facets, s.beta));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("moment grows and entropy falls with beta") {
  for (const Rational& a : {Rational(7, 5), kIron, Rational(3, 2), Rational(8, 5)}) {
    CAPTURE(a);
    Trajectory t = evolve(a, linspace(0, 8, 161));
    for (std::size_t i = 1; i < t.states.size(); ++i) {
      const auto& p = t.states[i - 1];
      const auto& q = t.states[i];
      CHECK(q.moment >= p.moment - 1e-12);
      CHECK(q.entropy <= p.entropy + 1e-12);
      CHECK(std::abs(q.moment - moment_of(q.mu)) < 1e-12);
      CHECK(std::abs(q.entropy - entropy_of(q.mu)) < 1e-12);
      if (a < Rational(19, 13)) CHECK(q.regime >= p.regime);
    }
  }
}

TEST_CASE("critical betas") {
  CriticalBetas iron = critical_betas(kIron);
  CHECK(std::abs(iron.beta1 - 0.55429) < 1e-5);
  CHECK(std::abs(iron.beta2 - 1.02359) < 1e-5);
  CHECK(std::abs(iron.alpha - cubic_root_by_bisection(kIron)) < 1e-12);
  CHECK(std::abs(iron.beta1 - 0.5 * std::log(iron.alpha)) < 1e-14);
  CHECK(std::abs(iron.beta2 - 0.25 * std::log((20 - 12 * 35.0 / 24) / (19 - 13 * 35.0 / 24))) < 1e-14);

  // At a = 7/5 the cubic is 2(x - 2)(3x^2 + 4x + 1)/5: both crossovers sit at ln(2)/2.
  CriticalBetas edge = critical_betas(Rational(7, 5));
  CHECK(std::abs(edge.alpha - 2) < 1e-12);
  CHECK(std::abs(edge.beta1 - 0.5 * std::log(2.0)) < 1e-12);
  CHECK(std::abs(edge.beta2 - 0.5 * std::log(2.0)) < 1e-12);

  CHECK(code_of([] { critical_betas(Rational(13, 10)); }) == ErrorCode::Range);
  CHECK(code_of([] { critical_betas(Rational(19, 13)); }) == ErrorCode::Range);
  CHECK_FALSE(cubic_root_above_one(1, 0, 0, 1).has_value());
  CHECK(*cubic_root_above_one(1, 0, 0, -8) == doctest::Approx(2).epsilon(1e-14));
}

TEST_CASE("detected activations match the crossover formulas") {
  auto grid = linspace(0, 2, 41);
  Trajectory iron = evolve(kIron, grid);
  CriticalBetas c = critical_betas(kIron);
  REQUIRE(iron.activations.size() >= 2);
  CHECK(std::abs(iron.activations[0].beta - c.beta1) < 1e-6);
  CHECK(iron.activations[0].reference_index == std::optional<std::size_t>(3));
  CHECK(iron.activations[0].regime == 2);
  CHECK(std::abs(iron.activations[1].beta - c.beta2) < 1e-6);
  CHECK(iron.activations[1].reference_index == std::optional<std::size_t>(1));
  CHECK(iron.activations[1].regime == 3);

  std::size_t checked = 0;
  for (int k = 1; k <= 50; ++k) {
    Rational a = Rational(7, 5) + Rational(4 * k, 65 * 51);
    CAPTURE(a);
    Trajectory t = evolve(a, grid);
    CriticalBetas ck = critical_betas(a);
    REQUIRE_FALSE(t.activations.empty());
    CHECK(std::abs(t.activations[0].beta - ck.beta1) < 1e-6);
    CHECK(std::abs(t.activations[0].beta - 0.5 * std::log(cubic_root_by_bisection(a))) < 1e-6);
    if (t.activations.size() > 1) CHECK(std::abs(t.activations[1].beta - ck.beta2) < 1e-6);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("multipliers vary continuously") {
  Trajectory t = evolve(kIron, linspace(0.3, 3, 271));
  CriticalBetas c = critical_betas(kIron);
  std::map<std::size_t, double> previous;
  double step = 0.01;
  for (const auto& s : t.states) {
    std::map<std::size_t, double> now;
    for (std::size_t j = 0; j < s.active.size(); ++j) now[s.active[j]] = s.multipliers[j];
    for (std::size_t k = 0; k < t.facets.rows.size(); ++k) {
      double x = previous.count(k) ? previous[k] : 0.0;
      double y = now.count(k) ? now[k] : 0.0;
      CHECK(std::abs(y - x) <= 20 * step);
    }
    previous = now;
  }
  // Just past a crossover the new multiplier is still small.
  ThermalFacets f = t.facets;
  ThermalState just = minimize_free_energy(c.beta1 + 1e-6, f, kMoment);
  REQUIRE(just.active.size() == 1);
  CHECK(std::abs(just.multipliers[0]) < 1e-4);
}

TEST_CASE("saturation at low temperature") {
  ThermalFacets f = thermal_facets(bcc_spin_polytope(kIron));
  ThermalState s = minimize_free_energy(40, f, kMoment);
  std::vector<double> sat{11.0 / 16, 11.0 / 48, 1.0 / 12, 0};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(s.mu[i] - sat[i]) < 1e-6);
  CHECK(std::abs(s.moment - 53.0 / 24) < 1e-6);
}

TEST_CASE("empty polytopes are rejected") {
  Polytope p;
  p.dimension = 4;
  p.add_equality({Rational(1), Rational(1), Rational(1), Rational(1)}, Rational(1));
  p.add_inequality({Rational(-1), Rational(0), Rational(0), Rational(0)}, Rational(-2));
  for (std::size_t i = 0; i < 4; ++i) {
    RationalVector row(4, Rational(0));
    row[i] = -1;
    p.add_inequality(row, Rational(0));
  }
  CHECK(code_of([&] { minimize_free_energy(1, p, kMoment); }) == ErrorCode::EmptyPolytope);
}

TEST_CASE("modified Weiss curve") {
  auto ts = linspace(0.0025, 1.2, 480);
  WeissCurve w = weiss_curve(kIron, ts);
  double msat = 7 * 35.0 / 24 - 8;
  CHECK(std::abs(w.saturation - msat) < 1e-12);
  CHECK(std::abs(w.coupling - 5) < 1e-15);
  CHECK(std::abs(w.m1 - 0.95585) < 1e-4);
  CHECK(std::abs(w.m2 - 0.99296) < 1e-4);

  // Below beta1 the state is unconstrained.
  CHECK(std::abs(w.m1 - moment_of(oracle::boltzmann(w.beta1, kMoment)) / msat) < 1e-10);
  // At beta2 the constrained optimum from the grid oracle.
  auto rows = admissible_rows(kIron);
  auto grid = oracle::grid_minimum(w.beta2, kMoment, [&](const std::vector<double>& mu) { return admissible(rows, mu); },
                                   2e-3, 4);
  CHECK(std::abs(w.m2 - moment_of(grid.mu) / msat) < 1e-4);
  CHECK(std::abs(w.t1 - w.m1 * msat / (5 * w.beta1)) < 1e-12);

  REQUIRE(w.constrained.size() == ts.size());
  CHECK(w.constrained.front().m_reduced > 0.999999);
  for (const auto& p : w.constrained) {
    CHECK(p.converged);
    if (p.t_reduced >= 1) CHECK(p.m_reduced == 0);
    else CHECK(p.m_reduced > 0);
  }
  for (std::size_t i = 1; i < w.constrained.size(); ++i)
    CHECK(w.constrained[i].m_reduced <= w.constrained[i - 1].m_reduced + 1e-9);
  int markers = 0;
  for (const auto& p : w.constrained) markers += !p.marker.empty();
  CHECK(markers == 2);

  WeissCurve scaled = weiss_curve(kIron, {0.5}, WeissOptions{3.0});
  CHECK(std::abs(scaled.m1 * 3 - w.m1 * msat) < 1e-12);
}

TEST_CASE("unconstrained Weiss magnetization") {
  for (double t : {0.05, 0.3, 0.6, 0.9, 0.99}) {
    CAPTURE(t);
    // M = sum m.gibbs(M / (5 t)), reduced by 3.
    auto h = [&](double m) { return moment_of(oracle::boltzmann(m / (5 * t), kMoment)) - m; };
    double expected = oracle::bisect(h, 1e-9, 3) / 3;
    CHECK(std::abs(pure_weiss_magnetization(kMoment, t) - expected) < 1e-9);
  }
  CHECK(pure_weiss_magnetization(kMoment, 1.0) == 0);
  CHECK(pure_weiss_magnetization(kMoment, 1.5) == 0);
  CHECK(code_of([] { pure_weiss_magnetization(kMoment, 0); }) == ErrorCode::Range);
}

TEST_CASE("data series parsing") {
  DataSeries d = parse_data_series("# digitized\nT_kelvin, M_over_Msat\n0, 1\n  100 , 0.99\n# gap\n200,0.97\n");
  CHECK(d.x == std::vector<double>{0, 100, 200});
  CHECK(d.y == std::vector<double>{1, 0.99, 0.97});
  CHECK(d.units == "M_over_Msat");
  CHECK(d.kind == "magnetization");
  CHECK(code_of([] { parse_data_series("0, 1\n1, 0.5\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_data_series("T, M\n0, 1\n0, 0.5\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_data_series("T, M\n0, 1\nx, 0.5\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_data_series("T, M\n0 1\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { load_data_series("/nonexistent/series.csv"); }) == ErrorCode::Parse);
}

TEST_CASE("crossover temperatures on a linear series") {
  std::string text = "T_kelvin, M\n";
  for (int i = 0; i <= 20; ++i) {
    double t = 1043.0 * i / 20;
    text += std::to_string(t) + ", " + std::to_string(1 - t / 1043.0) + "\n";
  }
  DataSeries d = parse_data_series(text);
  CrossoverTemperatures c = crossover_temperatures(0.95585, 0.99296, d);
  CHECK(std::abs(c.t1_kelvin - 1043 * (1 - 0.95585)) < 1e-3);
  CHECK(std::abs(c.t2_kelvin - 1043 * (1 - 0.99296)) < 1e-3);
  CHECK(std::abs(temperature_at(0.5, d) - 521.5) < 1e-3);
  CHECK(code_of([&] { temperature_at(1.2, d); }) == ErrorCode::OutOfRange);

  DataSeries three = parse_data_series("T, M\n0, 1\n10, 0.5\n20, 0\n");
  CHECK(std::abs(temperature_at(0.75, three) - 5) < 1e-12);

  DataSeries bump = parse_data_series("T, M\n0, 1\n10, 0.5\n20, 0.7\n30, 0\n");
  CHECK(code_of([&] { temperature_at(0.6, bump); }) == ErrorCode::OutOfRange);
}

TEST_CASE("quadratic baseline") {
  std::string smooth = "T, chi\n";
  std::string stepped = "T, chi\n";
  for (int i = 0; i <= 100; ++i) {
    double t = 10.0 * i;
    smooth += std::to_string(t) + ", " + std::to_string(2 * t * t + 3) + "\n";
    double step = t > 500 ? 5e4 : 0;
    stepped += std::to_string(t) + ", " + std::to_string(2 * t * t + 3 + step) + "\n";
  }
  QuadraticFit f = fit_quadratic_baseline(parse_data_series(smooth, "susceptibility"));
  CHECK(f.a2 == doctest::Approx(2).epsilon(1e-9));
  CHECK(f.a0 == doctest::Approx(3).epsilon(1e-6));
  for (double r : f.residual.y) CHECK(std::abs(r) < 1e-4);

  DataSeries s = parse_data_series(stepped, "susceptibility");
  QuadraticFit g = fit_quadratic_baseline(s, 0.0, 400.0);
  CHECK(g.a2 == doctest::Approx(2).epsilon(1e-9));
  REQUIRE(g.residual.x.size() == s.x.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) CHECK(std::abs(g.residual.y[i] - (s.x[i] > 500 ? 5e4 : 0)) < 1e-2);
  double knee = largest_slope_change(g.residual);
  CHECK(knee >= 500);
  CHECK(knee <= 510);

  CHECK(code_of([&] { fit_quadratic_baseline(s, 0.0, 15.0); }) == ErrorCode::DegenerateFit);
}
