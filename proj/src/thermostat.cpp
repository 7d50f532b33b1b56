#include "paulimag/thermostat.hpp"

#include "paulimag/catalog.hpp"
#include "paulimag/error.hpp"
#include "paulimag/magnetics.hpp"

#include <Eigen/Dense>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace paulimag {

namespace {

double log_sum_exp(const std::vector<double>& z) {
  double peak = *std::max_element(z.begin(), z.end());
  double total = 0;
  for (double v : z) total += std::exp(v - peak);
  return peak + std::log(total);
}

std::vector<double> softmax(const std::vector<double>& z, double lse) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::exp(z[i] - lse);
  return out;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double entropy_of(const std::vector<double>& mu) {
  double s = 0;
  for (double p : mu) {
    if (p > 0) s -= p * std::log(p);
  }
  return s;
}

bool is_dropped_row(const RationalVector& g) {
  // -e_j (nonnegativity) and -e_j + e_{j+1} (ordering)
  RationalVector p = primitive(g);
  std::size_t n = p.size();
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < n; ++i) {
    if (!p[i].is_zero()) nonzero.push_back(i);
  }
  if (nonzero.empty()) return true;
  if (nonzero.size() == 1) return p[nonzero[0]] == -1;
  if (nonzero.size() == 2) {
    return nonzero[1] == nonzero[0] + 1 && p[nonzero[0]] == -1 && p[nonzero[1]] == 1;
  }
  return false;
}

struct Evaluation {
  std::vector<double> mu;
  double phi = 0;
  std::vector<double> gradient;  // d phi / d lambda_k = -g_k . mu
};

class DualProblem {
 public:
  DualProblem(double beta, const ThermalFacets& facets, const std::vector<double>& m)
      : beta_(beta), facets_(facets), m_(m) {}

  Evaluation evaluate(const std::vector<std::size_t>& active, const std::vector<double>& lambda) const {
    std::size_t n = m_.size();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = beta_ * m_[i];
      for (std::size_t k = 0; k < active.size(); ++k) v -= lambda[k] * facets_.rows[active[k]][i];
      z[i] = v;
    }
    Evaluation e;
    e.phi = log_sum_exp(z);
    e.mu = softmax(z, e.phi);
    e.gradient.resize(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) e.gradient[k] = -dot(facets_.rows[active[k]], e.mu);
    return e;
  }

  Eigen::MatrixXd hessian(const std::vector<std::size_t>& active, const std::vector<double>& mu) const {
    std::size_t r = active.size();
    Eigen::MatrixXd h(r, r);
    std::vector<double> mean(r);
    for (std::size_t k = 0; k < r; ++k) mean[k] = dot(facets_.rows[active[k]], mu);
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t l = 0; l < r; ++l) {
        double s = 0;
        const auto& gk = facets_.rows[active[k]];
        const auto& gl = facets_.rows[active[l]];
        for (std::size_t i = 0; i < mu.size(); ++i) s += mu[i] * gk[i] * gl[i];
        h(k, l) = s - mean[k] * mean[l];
      }
    }
    return h;
  }

  // Rounding level of the gradient at lambda.
  double noise_floor(const std::vector<std::size_t>& active, const std::vector<double>& lambda) const {
    double zmax = 0;
    double gmax = 1;
    for (std::size_t i = 0; i < m_.size(); ++i) {
      double v = std::abs(beta_ * m_[i]);
      for (std::size_t k = 0; k < active.size(); ++k) {
        v += std::abs(lambda[k] * facets_.rows[active[k]][i]);
        gmax = std::max(gmax, std::abs(facets_.rows[active[k]][i]));
      }
      zmax = std::max(zmax, v);
    }
    return 16 * std::numeric_limits<double>::epsilon() * (1 + zmax) * gmax;
  }

 private:
  double beta_;
  const ThermalFacets& facets_;
  const std::vector<double>& m_;
};

double max_abs(const std::vector<double>& v) {
  double out = 0;
  for (double x : v) out = std::max(out, std::abs(x));
  return out;
}

double row_scale(const std::vector<double>& g) { return std::max(1.0, max_abs(g)); }

// Gradient level accepted when rounding stops further progress.
constexpr double kStallTolerance = 1e-9;

// Damped Newton on the dual restricted to `active`. Returns false when the
// iteration budget runs out first.
bool newton(const DualProblem& dual, const std::vector<std::size_t>& active, std::vector<double>& lambda,
            Evaluation& eval, double tolerance, std::size_t& iterations, std::size_t budget) {
  eval = dual.evaluate(active, lambda);
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  while (true) {
    double norm = max_abs(eval.gradient);
    if (active.empty() || norm <= std::max(tolerance, dual.noise_floor(active, lambda))) return true;
    if (norm < 0.5 * best) {
      best = norm;
      stalled = 0;
    } else if (++stalled >= 4 && norm <= kStallTolerance) {
      return true;
    }
    if (iterations >= budget) return false;
    ++iterations;
    std::size_t r = active.size();
    Eigen::MatrixXd h = dual.hessian(active, eval.mu);
    Eigen::VectorXd g(r);
    for (std::size_t k = 0; k < r; ++k) g(k) = eval.gradient[k];
    h.diagonal().array() += 1e-14 * std::max(1.0, h.diagonal().maxCoeff());
    Eigen::VectorXd step = -h.ldlt().solve(g);
    if (!step.allFinite()) step = -g;
    double slope = g.dot(step);
    if (slope >= 0) {
      step = -g;
      slope = g.dot(step);
    }
    auto line_search = [&](const Eigen::VectorXd& dir, double dir_slope) {
      for (double t = 1; t >= 1e-12; t /= 2) {
        std::vector<double> trial(lambda);
        for (std::size_t k = 0; k < r; ++k) trial[k] += t * dir(k);
        Evaluation next = dual.evaluate(active, trial);
        if (next.phi <= eval.phi + 1e-4 * t * dir_slope) {
          lambda = std::move(trial);
          eval = std::move(next);
          return true;
        }
      }
      return false;
    };
    if (-slope < 1e3 * std::numeric_limits<double>::epsilon() * (1 + std::abs(eval.phi))) {
      // phi cannot resolve the decrease; judge the full step by the gradient
      std::vector<double> trial(lambda);
      for (std::size_t k = 0; k < r; ++k) trial[k] += step(k);
      Evaluation next = dual.evaluate(active, trial);
      if (max_abs(next.gradient) < norm) {
        lambda = std::move(trial);
        eval = std::move(next);
        continue;
      }
      return norm <= kStallTolerance;
    }
    if (!line_search(step, slope) && !line_search(-g, -g.squaredNorm())) {
      return max_abs(eval.gradient) <= kStallTolerance;
    }
  }
}

Polytope exact_polytope(const ThermalFacets& facets) {
  Polytope poly;
  poly.dimension = facets.dimension;
  for (std::size_t k = 0; k < facets.exact_rows.size(); ++k) {
    poly.add_inequality(facets.exact_rows[k], Rational(0), facets.labels[k]);
  }
  for (std::size_t i = 0; i < facets.dimension; ++i) {
    RationalVector e(facets.dimension, Rational(0));
    e[i] = -1;
    poly.add_inequality(e, Rational(0));
  }
  poly.add_equality(RationalVector(facets.dimension, Rational(1)), Rational(1));
  return poly;
}

}  // namespace

std::vector<double> gibbs(double beta, const std::vector<double>& m) {
  if (m.empty()) throw Error(ErrorCode::DimensionMismatch, "empty moment vector");
  std::vector<double> z(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) z[i] = beta * m[i];
  return softmax(z, log_sum_exp(z));
}

ThermalFacets thermal_facets(const Polytope& poly) {
  std::size_t n = poly.dimension;
  RationalVector ones(n, Rational(1));
  for (const auto& eq : poly.equalities) {
    RationalVector p = primitive(eq.normal);
    Rational scale = eq.normal.empty() ? Rational(0) : eq.normal[0];
    if (p != ones || scale.is_zero() || eq.bound / scale != 1) {
      throw Error(ErrorCode::DimensionMismatch, "thermal model supports only the normalization equality");
    }
  }
  ThermalFacets out;
  out.dimension = n;
  std::set<RationalVector> seen;
  for (const auto& row : poly.inequalities) {
    RationalVector g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = row.normal[i] - row.bound;
    if (is_dropped_row(g)) continue;
    RationalVector key = primitive(g);
    if (!seen.insert(key).second) continue;
    out.exact_rows.push_back(g);
    out.rows.push_back(to_double(g));
    out.labels.push_back(row.label);
  }
  return out;
}

namespace {

ThermalState solve_at(double beta, const ThermalFacets& facets, const std::vector<double>& m,
                      const std::optional<ThermalState>& warm, const SolverOptions& options) {
  DualProblem dual(beta, facets, m);
  std::vector<std::size_t> active;
  std::vector<double> lambda;
  if (options.fixed_active) {
    active = *options.fixed_active;
    lambda.assign(active.size(), 0.0);
    if (warm) {
      for (std::size_t k = 0; k < active.size(); ++k) {
        auto it = std::find(warm->active.begin(), warm->active.end(), active[k]);
        if (it != warm->active.end()) lambda[k] = -warm->multipliers[it - warm->active.begin()];
      }
    }
  } else if (warm) {
    active = warm->active;
    for (double gamma : warm->multipliers) lambda.push_back(-gamma);
  }
  for (std::size_t k : active) {
    if (k >= facets.rows.size()) throw Error(ErrorCode::DimensionMismatch, "active facet index out of range");
  }

  std::size_t iterations = 0;
  Evaluation eval;
  bool converged = false;
  for (std::size_t round = 0; round < 4 * facets.rows.size() + 8; ++round) {
    if (!newton(dual, active, lambda, eval, options.tolerance, iterations, options.max_iterations)) break;
    if (options.fixed_active) {
      converged = true;
      break;
    }
    // drop the most negative multiplier
    std::size_t worst = active.size();
    double worst_value = -1e-10 * (1 + max_abs(lambda));
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (lambda[k] < worst_value) {
        worst_value = lambda[k];
        worst = k;
      }
    }
    if (worst < active.size()) {
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst));
      lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(worst));
      continue;
    }
    // add the most violated inactive facet
    std::size_t add = facets.rows.size();
    double add_value = 0;
    double threshold = std::max(options.tolerance, dual.noise_floor(active, lambda));
    for (std::size_t j = 0; j < facets.rows.size(); ++j) {
      if (std::find(active.begin(), active.end(), j) != active.end()) continue;
      double v = dot(facets.rows[j], eval.mu) / row_scale(facets.rows[j]);
      if (v > threshold && v > add_value) {
        add_value = v;
        add = j;
      }
    }
    if (add < facets.rows.size()) {
      active.push_back(add);
      lambda.push_back(0.0);
      continue;
    }
    converged = true;
    break;
  }

  if (!converged) {
    if (!is_feasible(exact_polytope(facets))) {
      throw Error(ErrorCode::EmptyPolytope, "the facets leave no admissible spin distribution");
    }
    double residual = max_abs(eval.gradient);
    throw Error(ErrorCode::NonConvergence, "free-energy minimization did not converge at beta = " +
                                               std::to_string(beta) + " (residual " + std::to_string(residual) +
                                               ", active " + std::to_string(active.size()) + ")");
  }

  // report in ascending facet order
  std::vector<std::size_t> order(active.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return active[x] < active[y]; });
  ThermalState state;
  state.beta = beta;
  state.mu = eval.mu;
  for (std::size_t k : order) {
    state.active.push_back(active[k]);
    state.multipliers.push_back(-lambda[k]);
  }
  state.regime = 1 + static_cast<int>(state.active.size());
  double residual = 0;
  for (std::size_t j = 0; j < facets.rows.size(); ++j) {
    double v = dot(facets.rows[j], eval.mu);
    bool is_active = std::find(active.begin(), active.end(), j) != active.end();
    residual = std::max(residual, is_active ? std::abs(v) : std::max(0.0, v));
  }
  state.residual = residual;
  state.iterations = iterations;
  state.converged = true;
  for (std::size_t i = 1; i < state.mu.size(); ++i) {
    if (state.mu[i] > state.mu[i - 1] * (1 + 1e-12) + 1e-300) state.ordered = false;
  }
  state.moment = dot(m, state.mu);
  state.entropy = entropy_of(state.mu);
  return state;
}

}  // namespace

ThermalState minimize_free_energy(double beta, const ThermalFacets& facets, const std::vector<double>& m,
                                  const std::optional<ThermalState>& warm, const SolverOptions& options) {
  if (m.size() != facets.dimension) throw Error(ErrorCode::DimensionMismatch, "moment vector length mismatch");
  if (!std::isfinite(beta)) throw Error(ErrorCode::Range, "beta must be finite");
  double from = warm ? warm->beta : 0.0;
  if (std::abs(beta - from) <= 1) return solve_at(beta, facets, m, warm, options);
  try {
    return solve_at(beta, facets, m, warm, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonConvergence) throw;
  }
  // continuation in beta from the starting point
  std::optional<ThermalState> current = warm;
  auto steps = static_cast<std::size_t>(std::ceil(std::abs(beta - from)));
  for (std::size_t i = 1; i <= steps; ++i) {
    double b = i == steps ? beta : from + (beta - from) * static_cast<double>(i) / static_cast<double>(steps);
    current = solve_at(b, facets, m, current, options);
  }
  return *current;
}

ThermalState minimize_free_energy(double beta, const Polytope& poly, const std::vector<double>& m) {
  ThermalFacets facets = thermal_facets(poly);
  if (!is_feasible(poly)) throw Error(ErrorCode::EmptyPolytope, "empty spin polytope");
  return minimize_free_energy(beta, facets, m);
}

std::optional<double> cubic_root_above_one(double c0, double c1, double c2, double c3) {
  auto p = [&](double x) { return ((c0 * x + c1) * x + c2) * x + c3; };
  double lo = 1;
  double plo = p(lo);
  double hi = 2;
  while (hi < 1e12) {
    double phi = p(hi);
    if (phi == 0) return hi;
    if ((plo < 0) != (phi < 0) && plo != 0) {
      std::uintmax_t max_iter = 200;
      auto tol = boost::math::tools::eps_tolerance<double>(52);
      auto r = boost::math::tools::toms748_solve(p, lo, hi, plo, phi, tol, max_iter);
      return (r.first + r.second) / 2;
    }
    lo = hi;
    plo = phi;
    hi *= 2;
  }
  return std::nullopt;
}

CriticalBetas critical_betas(const Rational& a) {
  if (a < Rational(7, 5) || a >= Rational(19, 13)) {
    throw Error(ErrorCode::Range, "a = " + to_string(a) + " is outside [7/5, 19/13)");
  }
  Rational seven_a = 7 * a;
  auto root = cubic_root_above_one(to_double(11 - seven_a), to_double(9 - seven_a), to_double(7 - seven_a),
                                   to_double(9 - seven_a));
  if (!root) throw Error(ErrorCode::NoRootAboveOne, "the crossover cubic has no root above 1 at a = " + to_string(a));
  CriticalBetas out;
  out.alpha = *root;
  out.beta1 = std::log(*root) / 2;
  out.beta2 = std::log(to_double((20 - 12 * a) / (19 - 13 * a))) / 4;
  return out;
}

Polytope bcc_spin_polytope(const Rational& a) {
  ConstraintSystem system = load_catalog(d_shell(7, SpinSector::High));
  SymmetrySpec sym;
  sym.kind = SymmetryKind::BCC;
  sym.parameters["a"] = a;
  return specialize(system, sym).polytope();
}

namespace {

std::vector<std::size_t> newly_active(const ThermalState& before, const ThermalState& after) {
  std::vector<std::size_t> out;
  for (std::size_t k : after.active) {
    if (std::find(before.active.begin(), before.active.end(), k) == before.active.end()) out.push_back(k);
  }
  return out;
}

double activation_beta(const ThermalFacets& facets, const std::vector<double>& m, const ThermalState& before,
                       double beta_hi, std::size_t facet) {
  SolverOptions fixed;
  fixed.fixed_active = before.active;
  std::optional<ThermalState> warm = before;
  auto f = [&](double beta) {
    ThermalState s = minimize_free_energy(beta, facets, m, warm, fixed);
    warm = s;
    return dot(facets.rows[facet], s.mu);
  };
  double flo = f(before.beta);
  double fhi = f(beta_hi);
  if (flo >= 0) return before.beta;
  if (fhi <= 0) return beta_hi;
  std::uintmax_t max_iter = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(48);
  auto r = boost::math::tools::toms748_solve(f, before.beta, beta_hi, flo, fhi, tol, max_iter);
  return (r.first + r.second) / 2;
}

Trajectory evolve_impl(ThermalFacets facets, const std::vector<double>& m, const std::vector<double>& beta_grid) {
  for (std::size_t i = 1; i < beta_grid.size(); ++i) {
    if (!(beta_grid[i] > beta_grid[i - 1])) throw Error(ErrorCode::Range, "beta grid must be increasing");
  }
  if (!beta_grid.empty() && beta_grid.front() < 0) throw Error(ErrorCode::Range, "beta grid must start at >= 0");
  Trajectory out;
  out.facets = std::move(facets);
  std::optional<ThermalState> warm;
  for (double beta : beta_grid) {
    ThermalState s = minimize_free_energy(beta, out.facets, m, warm);
    if (warm) {
      // several facets may activate inside one grid step: take the earliest,
      // then continue from there with it held active
      auto fresh = newly_active(*warm, s);
      ThermalState at = *warm;
      while (!fresh.empty()) {
        std::size_t pick = 0;
        double first = beta;
        for (std::size_t i = 0; i < fresh.size(); ++i) {
          double b = activation_beta(out.facets, m, at, beta, fresh[i]);
          if (i == 0 || b < first) {
            first = b;
            pick = i;
          }
        }
        Activation act;
        act.facet = fresh[pick];
        act.label = out.facets.labels[act.facet];
        act.beta = first;
        act.regime = at.regime + 1;
        out.activations.push_back(act);

        SolverOptions fixed;
        fixed.fixed_active = at.active;
        fixed.fixed_active->push_back(act.facet);
        std::sort(fixed.fixed_active->begin(), fixed.fixed_active->end());
        at = minimize_free_energy(first, out.facets, m, at, fixed);
        fresh.erase(fresh.begin() + static_cast<std::ptrdiff_t>(pick));
      }
    }
    out.states.push_back(s);
    warm = s;
  }
  return out;
}

std::vector<double> bcc_moment() { return {3, 1, -1, -3}; }

}  // namespace

Trajectory evolve(const Polytope& poly, const std::vector<double>& m, const std::vector<double>& beta_grid) {
  if (!is_feasible(poly)) throw Error(ErrorCode::EmptyPolytope, "empty spin polytope");
  return evolve_impl(thermal_facets(poly), m, beta_grid);
}

Trajectory evolve(const Rational& a, const std::vector<double>& beta_grid) {
  Trajectory out = evolve(bcc_spin_polytope(a), bcc_moment(), beta_grid);
  auto reference = bcc_reference_rows();
  for (auto& act : out.activations) {
    RationalVector key = primitive(out.facets.exact_rows[act.facet]);
    for (std::size_t j = 0; j < reference.size(); ++j) {
      if (primitive(reference[j].at(a)) == key) {
        act.reference_index = j + 1;
        break;
      }
    }
  }
  return out;
}

namespace {

// Root of M(beta) - c t beta on beta > 0, or 0 when only the trivial root exists.
template <typename Moment>
double weiss_beta(const Moment& moment, double coupling, double t, double moment_max) {
  auto h = [&](double beta) { return moment(beta) - coupling * t * beta; };
  double lo = 1;
  while (h(lo) <= 0) {
    lo /= 2;
    if (lo < 1e-12) return 0;
  }
  double hi = moment_max / (coupling * t) + 1;
  double hlo = h(lo);
  double hhi = h(hi);
  if (hhi >= 0) return hi;
  std::uintmax_t max_iter = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto r = boost::math::tools::toms748_solve(h, lo, hi, hlo, hhi, tol, max_iter);
  return (r.first + r.second) / 2;
}

double variance_coupling(const std::vector<double>& m) {
  double s = 0;
  for (double v : m) s += v * v;
  return s / static_cast<double>(m.size());
}

void mark_crossings(std::vector<CurvePoint>& points, double beta_k, const std::string& name) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    double x = points[i - 1].beta - beta_k;
    double y = points[i].beta - beta_k;
    if ((x < 0 && y >= 0) || (x > 0 && y <= 0)) {
      points[i].marker = points[i].marker.empty() ? name : points[i].marker + "," + name;
      return;
    }
  }
}

}  // namespace

double pure_weiss_magnetization(const std::vector<double>& m, double t) {
  if (!(t > 0)) throw Error(ErrorCode::Range, "reduced temperature must be positive");
  double coupling = variance_coupling(m);
  double top = *std::max_element(m.begin(), m.end());
  if (t >= 1) return 0;
  auto moment = [&](double beta) { return dot(m, gibbs(beta, m)); };
  double beta = weiss_beta(moment, coupling, t, top);
  return moment(beta) / top;
}

WeissCurve weiss_curve(const Rational& a, const std::vector<double>& t_grid, const WeissOptions& options) {
  for (double t : t_grid) {
    if (!(t > 0) || !std::isfinite(t)) throw Error(ErrorCode::Range, "reduced temperatures must be positive");
  }
  CriticalBetas crit = critical_betas(a);
  Polytope poly = bcc_spin_polytope(a);
  ThermalFacets facets = thermal_facets(poly);
  std::vector<double> m = bcc_moment();
  RationalVector mq{Rational(3), Rational(1), Rational(-1), Rational(-3)};
  double m_max = to_double(lp_solve(poly, mq, Direction::Maximize).value);

  WeissCurve out;
  out.beta1 = crit.beta1;
  out.beta2 = crit.beta2;
  out.coupling = variance_coupling(m);
  out.saturation = options.saturation.value_or(m_max);

  std::optional<ThermalState> warm;
  auto constrained_state = [&](double beta) {
    ThermalState s = minimize_free_energy(beta, facets, m, warm);
    warm = s;
    return s;
  };
  auto constrained_moment = [&](double beta) { return constrained_state(beta).moment; };

  double m1 = constrained_moment(crit.beta1);
  double m2 = constrained_moment(crit.beta2);
  out.m1 = m1 / out.saturation;
  out.m2 = m2 / out.saturation;
  out.t1 = m1 / (out.coupling * crit.beta1);
  out.t2 = m2 / (out.coupling * crit.beta2);

  for (double t : t_grid) {
    CurvePoint p;
    p.t_reduced = t;
    try {
      double beta = t >= 1 ? 0.0 : weiss_beta(constrained_moment, out.coupling, t, m_max);
      ThermalState s = constrained_state(beta);
      p.beta = beta;
      p.m_reduced = s.moment / out.saturation;
      p.regime = s.regime;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergence) throw;
      p.converged = false;
    }
    out.constrained.push_back(p);

    CurvePoint q;
    q.t_reduced = t;
    q.m_reduced = pure_weiss_magnetization(m, t);
    q.beta = q.m_reduced * 3 / (out.coupling * t);
    out.unconstrained.push_back(q);
  }
  mark_crossings(out.constrained, crit.beta2, "beta2");
  mark_crossings(out.constrained, crit.beta1, "beta1");
  return out;
}

// --- measured series -------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

DataSeries parse_data_series(std::string_view text, const std::string& kind) {
  DataSeries out;
  out.kind = kind;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++number;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t comma = t.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(number) + ": expected two comma-separated columns");
    }
    std::string first = trim(std::string_view(t).substr(0, comma));
    std::string second = trim(std::string_view(t).substr(comma + 1));
    auto x = parse_double(first);
    auto y = parse_double(second);
    if (!x || !y) {
      if (!header_seen && out.x.empty()) {
        header_seen = true;
        out.units = second;
        continue;
      }
      throw Error(ErrorCode::Parse, "line " + std::to_string(number) + ": not a number pair");
    }
    if (!out.x.empty() && !(*x > out.x.back())) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(number) + ": temperatures must be strictly increasing");
    }
    out.x.push_back(*x);
    out.y.push_back(*y);
  }
  if (!header_seen) throw Error(ErrorCode::Parse, "missing header row");
  return out;
}

DataSeries load_data_series(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_data_series(buffer.str(), kind);
}

double temperature_at(double m_reduced, const DataSeries& data) {
  if (data.x.size() < 2) throw Error(ErrorCode::OutOfRange, "need at least two data points");
  // inverse map: moment must be strictly monotone
  std::vector<double> xs(data.y.rbegin(), data.y.rend());
  std::vector<double> ys(data.x.rbegin(), data.x.rend());
  bool increasing = true;
  for (std::size_t i = 1; i < xs.size(); ++i) increasing = increasing && xs[i] > xs[i - 1];
  if (!increasing) {
    throw Error(ErrorCode::OutOfRange, "magnetization data must decrease strictly with temperature");
  }
  if (m_reduced < xs.front() || m_reduced > xs.back()) {
    throw Error(ErrorCode::OutOfRange, "reduced moment " + std::to_string(m_reduced) + " outside data range [" +
                                           std::to_string(xs.front()) + ", " + std::to_string(xs.back()) + "]");
  }
  if (xs.size() < 4) {
    auto it = std::upper_bound(xs.begin(), xs.end(), m_reduced);
    std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xs.begin(), 1), xs.size() - 1);
    double w = (m_reduced - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
  }
  auto it = std::find(xs.begin(), xs.end(), m_reduced);
  if (it != xs.end()) return ys[static_cast<std::size_t>(it - xs.begin())];
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(xs), std::move(ys));
  return spline(m_reduced);
}

CrossoverTemperatures crossover_temperatures(double m1, double m2, const DataSeries& data) {
  return CrossoverTemperatures{temperature_at(m1, data), temperature_at(m2, data)};
}

QuadraticFit fit_quadratic_baseline(const DataSeries& data, std::optional<double> lo, std::optional<double> hi) {
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    if (lo && data.x[i] < *lo) continue;
    if (hi && data.x[i] > *hi) continue;
    window.push_back(i);
  }
  std::set<double> distinct;
  for (std::size_t i : window) distinct.insert(data.x[i]);
  if (distinct.size() < 3) throw Error(ErrorCode::DegenerateFit, "need at least three distinct temperatures");
  Eigen::MatrixXd a(window.size(), 2);
  Eigen::VectorXd b(window.size());
  for (std::size_t r = 0; r < window.size(); ++r) {
    double x = data.x[window[r]];
    a(r, 0) = x * x;
    a(r, 1) = 1;
    b(r) = data.y[window[r]];
  }
  Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  QuadraticFit out;
  out.a2 = coef(0);
  out.a0 = coef(1);
  out.residual.kind = data.kind;
  out.residual.units = data.units;
  out.residual.x = data.x;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    out.residual.y.push_back(data.y[i] - (out.a2 * data.x[i] * data.x[i] + out.a0));
  }
  return out;
}

double largest_slope_change(const DataSeries& series, std::optional<double> lo, std::optional<double> hi) {
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_change = -1;
  for (std::size_t i = 1; i + 1 < series.x.size(); ++i) {
    double x = series.x[i];
    if (lo && x < *lo) continue;
    if (hi && x > *hi) continue;
    double left = (series.y[i] - series.y[i - 1]) / (series.x[i] - series.x[i - 1]);
    double right = (series.y[i + 1] - series.y[i]) / (series.x[i + 1] - series.x[i]);
    double change = std::abs(right - left);
    if (change > best_change) {
      best_change = change;
      best = x;
    }
  }
  if (std::isnan(best)) throw Error(ErrorCode::OutOfRange, "no interior point in the window");
  return best;
}

}  // namespace paulimag
