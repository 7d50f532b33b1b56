#include "paulimag/polytope.hpp"

#include "exact_linalg.hpp"
#include "paulimag/error.hpp"
#include "simplex.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace paulimag {

namespace {

using detail::Matrix;

bool leq(const RationalVector& normal, const Rational& bound, const RationalVector& x) {
  return dot(normal, x) <= bound;
}

bool all_zero(const RationalVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& r) { return r.is_zero(); });
}

void require_dimension(const Polytope& poly, const RationalVector& v, const char* what) {
  if (v.size() != poly.dimension) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has length " + std::to_string(v.size()) +
                    ", polytope dimension is " + std::to_string(poly.dimension));
  }
}

detail::SimplexOutcome<Rational> run_exact(const std::vector<Halfspace>& ineqs,
                                           const std::vector<Halfspace>& eqs, std::size_t dim,
                                           const RationalVector& objective) {
  Matrix a, e;
  RationalVector b, f;
  a.reserve(ineqs.size());
  b.reserve(ineqs.size());
  for (const auto& h : ineqs) {
    a.push_back(h.normal);
    b.push_back(h.bound);
  }
  for (const auto& h : eqs) {
    e.push_back(h.normal);
    f.push_back(h.bound);
  }
  detail::DualSimplex<Rational> solver(a, b, e, f, dim);
  return solver.maximize(objective);
}

/// Equality rows in reduced echelon form, pivots taken from the last variables.
struct EqualityBasis {
  Matrix rows;  // each row: normal..., bound
  std::vector<std::size_t> pivots;
};

EqualityBasis equality_basis(const std::vector<Halfspace>& eqs, std::size_t dim) {
  EqualityBasis basis;
  for (const auto& h : eqs) {
    RationalVector row = h.normal;
    row.push_back(h.bound);
    basis.rows.push_back(std::move(row));
  }
  std::vector<std::size_t> order;
  for (std::size_t c = dim; c-- > 0;) order.push_back(c);
  basis.pivots = detail::rref(basis.rows, order);
  basis.rows.resize(basis.pivots.size());
  return basis;
}

Halfspace reduce_by(const Halfspace& row, const EqualityBasis& basis) {
  RationalVector v = row.normal;
  v.push_back(row.bound);
  for (std::size_t r = 0; r < basis.pivots.size(); ++r) {
    const Rational factor = v[basis.pivots[r]];
    if (factor.is_zero()) continue;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (!basis.rows[r][j].is_zero()) v[j] -= factor * basis.rows[r][j];
    }
  }
  v = primitive(v);
  Halfspace out;
  out.bound = v.back();
  v.pop_back();
  out.normal = std::move(v);
  out.label = row.label;
  return out;
}

/// Float pre-filter for redundancy: returns true/false when an exact
/// certificate built from the floating basis confirms the answer.
std::optional<bool> certified_redundancy(const std::vector<Halfspace>& others,
                                         const std::vector<Halfspace>& eqs, std::size_t dim,
                                         const Halfspace& target) {
  using FloatSolver = detail::DualSimplex<double, detail::FloatArithmetic>;
  std::vector<std::vector<double>> a, e;
  std::vector<double> b, f;
  for (const auto& h : others) {
    a.push_back(to_double(h.normal));
    b.push_back(to_double(h.bound));
  }
  for (const auto& h : eqs) {
    e.push_back(to_double(h.normal));
    f.push_back(to_double(h.bound));
  }
  FloatSolver solver(a, b, e, f, dim);
  auto outcome = solver.maximize(to_double(target.normal));
  if (outcome.status == detail::SimplexStatus::PrimalUnbounded) return std::nullopt;
  if (outcome.status != detail::SimplexStatus::Optimal) return std::nullopt;

  // Candidate vertex from the basic rows.
  Matrix rows;
  RationalVector rhs;
  for (std::size_t j : outcome.basic_inequalities) {
    rows.push_back(others[j].normal);
    rhs.push_back(others[j].bound);
  }
  for (const auto& h : eqs) {
    rows.push_back(h.normal);
    rhs.push_back(h.bound);
  }
  if (auto x = detail::solve_unique(rows, rhs)) {
    bool inside = std::all_of(others.begin(), others.end(),
                              [&](const Halfspace& h) { return leq(h.normal, h.bound, *x); });
    if (inside && dot(target.normal, *x) > target.bound) return false;
  }

  // Candidate multipliers on the same basis: sum y_j a_j + sum z_k e_k = target.
  Matrix transposed(dim, RationalVector(rows.size(), Rational(0)));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) transposed[c][r] = rows[r][c];
  }
  if (auto mult = detail::solve_any(transposed, target.normal)) {
    const std::size_t basic = outcome.basic_inequalities.size();
    bool nonnegative = true;
    Rational value = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r < basic && (*mult)[r] < 0) nonnegative = false;
      value += (*mult)[r] * rhs[r];
    }
    if (nonnegative && value <= target.bound) return true;
  }
  return std::nullopt;
}

bool exact_redundancy(const std::vector<Halfspace>& others, const std::vector<Halfspace>& eqs,
                      std::size_t dim, const Halfspace& target) {
  auto outcome = run_exact(others, eqs, dim, target.normal);
  if (outcome.status == detail::SimplexStatus::PrimalUnbounded) return false;
  if (outcome.status == detail::SimplexStatus::PrimalInfeasible) return true;
  return outcome.value <= target.bound;
}

/// Merges canonical duplicates and drops trivially satisfied zero rows.
std::vector<Halfspace> dedupe_rows(const std::vector<Halfspace>& rows, const EqualityBasis& basis) {
  std::vector<Halfspace> out;
  std::set<RationalVector> seen;
  for (const auto& row : rows) {
    Halfspace canon = reduce_by(row, basis);
    if (all_zero(canon.normal) && canon.bound >= 0) continue;
    RationalVector key = canon.normal;
    key.push_back(canon.bound);
    if (!seen.insert(key).second) continue;
    out.push_back(row);
  }
  return out;
}

std::vector<Halfspace> irredundant_rows(const std::vector<Halfspace>& rows,
                                        const std::vector<Halfspace>& eqs, std::size_t dim) {
  EqualityBasis basis = equality_basis(eqs, dim);
  std::vector<Halfspace> candidates = dedupe_rows(rows, basis);
  std::vector<bool> alive(candidates.size(), true);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::vector<Halfspace> others;
    others.reserve(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (j != i && alive[j]) others.push_back(candidates[j]);
    }
    std::optional<bool> redundant = certified_redundancy(others, eqs, dim, candidates[i]);
    if (!redundant) redundant = exact_redundancy(others, eqs, dim, candidates[i]);
    if (*redundant) alive[i] = false;
  }
  std::vector<Halfspace> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (alive[i]) out.push_back(candidates[i]);
  }
  return out;
}

}  // namespace

void Polytope::add_inequality(RationalVector normal, Rational bound, std::string label) {
  require_dimension(*this, normal, "inequality");
  inequalities.push_back(Halfspace{std::move(normal), std::move(bound), std::move(label)});
}

void Polytope::add_equality(RationalVector normal, Rational bound, std::string label) {
  require_dimension(*this, normal, "equality");
  equalities.push_back(Halfspace{std::move(normal), std::move(bound), std::move(label)});
}

Halfspace canonical_row(const Halfspace& row, const std::vector<Halfspace>& equalities) {
  return reduce_by(row, equality_basis(equalities, row.normal.size()));
}

LPResult lp_solve(const Polytope& poly, const RationalVector& objective, Direction direction) {
  require_dimension(poly, objective, "objective");
  RationalVector c = objective;
  if (direction == Direction::Minimize) {
    for (auto& v : c) v = -v;
  }
  auto outcome = run_exact(poly.inequalities, poly.equalities, poly.dimension, c);
  LPResult result;
  switch (outcome.status) {
    case detail::SimplexStatus::PrimalInfeasible:
      result.status = LPStatus::Infeasible;
      return result;
    case detail::SimplexStatus::PrimalUnbounded:
      result.status = LPStatus::Unbounded;
      return result;
    case detail::SimplexStatus::Optimal:
      break;
  }
  result.status = LPStatus::Optimal;
  result.argpoint = std::move(outcome.x);
  result.inequality_multipliers = std::move(outcome.y);
  result.equality_multipliers = std::move(outcome.z);
  result.value = dot(objective, result.argpoint);
  return result;
}

LPResult lp_optimize(const Polytope& poly, const RationalVector& objective, Direction direction) {
  LPResult result = lp_solve(poly, objective, direction);
  if (result.status == LPStatus::Infeasible) {
    throw Error(ErrorCode::Infeasible, "linear program is infeasible");
  }
  if (result.status == LPStatus::Unbounded) {
    throw Error(ErrorCode::Unbounded, "linear program is unbounded");
  }
  return result;
}

bool verify_certificate(const Polytope& poly, const RationalVector& objective, Direction direction,
                        const LPResult& result) {
  if (result.status != LPStatus::Optimal) return false;
  if (!check_point(poly, result.argpoint).feasible) return false;
  if (dot(objective, result.argpoint) != result.value) return false;
  if (result.inequality_multipliers.size() != poly.inequalities.size() ||
      result.equality_multipliers.size() != poly.equalities.size()) {
    return false;
  }
  const Rational s = direction == Direction::Maximize ? 1 : -1;
  RationalVector combo(poly.dimension, Rational(0));
  Rational bound = 0;
  for (std::size_t i = 0; i < poly.inequalities.size(); ++i) {
    const Rational& y = result.inequality_multipliers[i];
    if (y < 0) return false;
    if (y.is_zero()) continue;
    for (std::size_t j = 0; j < poly.dimension; ++j) combo[j] += y * poly.inequalities[i].normal[j];
    bound += y * poly.inequalities[i].bound;
  }
  for (std::size_t k = 0; k < poly.equalities.size(); ++k) {
    const Rational& z = result.equality_multipliers[k];
    if (z.is_zero()) continue;
    for (std::size_t j = 0; j < poly.dimension; ++j) combo[j] += z * poly.equalities[k].normal[j];
    bound += z * poly.equalities[k].bound;
  }
  for (std::size_t j = 0; j < poly.dimension; ++j) {
    if (combo[j] != s * objective[j]) return false;
  }
  return bound == s * result.value;
}

PointCheck check_point(const Polytope& poly, const RationalVector& point) {
  require_dimension(poly, point, "point");
  PointCheck check;
  for (std::size_t i = 0; i < poly.inequalities.size(); ++i) {
    const auto& h = poly.inequalities[i];
    if (!leq(h.normal, h.bound, point)) check.violated_inequalities.push_back(i);
  }
  for (std::size_t k = 0; k < poly.equalities.size(); ++k) {
    const auto& h = poly.equalities[k];
    if (dot(h.normal, point) != h.bound) check.violated_equalities.push_back(k);
  }
  check.feasible = check.violated_inequalities.empty() && check.violated_equalities.empty();
  return check;
}

bool is_feasible(const Polytope& poly) {
  return lp_solve(poly, RationalVector(poly.dimension, Rational(0)), Direction::Maximize).status ==
         LPStatus::Optimal;
}

Polytope remove_redundant(const Polytope& poly) {
  if (!is_feasible(poly)) throw Error(ErrorCode::Infeasible, "polytope is empty");
  Polytope out = poly;
  out.inequalities = irredundant_rows(poly.inequalities, poly.equalities, poly.dimension);
  return out;
}

Polytope project_out(const Polytope& poly, const std::vector<std::size_t>& eliminate) {
  const std::size_t dim = poly.dimension;
  std::set<std::size_t> pending(eliminate.begin(), eliminate.end());
  for (std::size_t v : pending) {
    if (v >= dim) throw Error(ErrorCode::DimensionMismatch, "eliminated variable out of range");
  }
  std::vector<Halfspace> ineqs = poly.inequalities;
  std::vector<Halfspace> eqs = poly.equalities;

  auto substitute = [](Halfspace& row, const Halfspace& pivot_row, std::size_t v) {
    if (row.normal[v].is_zero()) return;
    const Rational factor = row.normal[v] / pivot_row.normal[v];
    for (std::size_t j = 0; j < row.normal.size(); ++j) {
      if (!pivot_row.normal[j].is_zero()) row.normal[j] -= factor * pivot_row.normal[j];
    }
    row.bound -= factor * pivot_row.bound;
    row.normal[v] = 0;
  };

  // Equalities first: each one containing an eliminated variable removes it.
  for (auto it = pending.begin(); it != pending.end();) {
    const std::size_t v = *it;
    auto eq = std::find_if(eqs.begin(), eqs.end(), [&](const Halfspace& h) { return !h.normal[v].is_zero(); });
    if (eq == eqs.end()) {
      ++it;
      continue;
    }
    Halfspace pivot_row = *eq;
    eqs.erase(eq);
    for (auto& h : eqs) substitute(h, pivot_row, v);
    for (auto& h : ineqs) substitute(h, pivot_row, v);
    it = pending.erase(it);
  }
  for (auto& h : eqs) {
    if (all_zero(h.normal) && !h.bound.is_zero()) throw Error(ErrorCode::Infeasible, "inconsistent equalities");
  }
  eqs.erase(std::remove_if(eqs.begin(), eqs.end(), [](const Halfspace& h) { return all_zero(h.normal); }),
            eqs.end());

  ineqs = irredundant_rows(ineqs, eqs, dim);

  while (!pending.empty()) {
    // Cheapest variable first: fewest generated pairs.
    std::size_t best = *pending.begin();
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    for (std::size_t v : pending) {
      std::size_t pos = 0, neg = 0;
      for (const auto& h : ineqs) {
        if (h.normal[v] > 0) ++pos;
        if (h.normal[v] < 0) ++neg;
      }
      if (pos * neg < best_cost) {
        best_cost = pos * neg;
        best = v;
      }
    }
    pending.erase(best);

    std::vector<Halfspace> positive, negative, next;
    for (auto& h : ineqs) {
      if (h.normal[best] > 0) {
        positive.push_back(h);
      } else if (h.normal[best] < 0) {
        negative.push_back(h);
      } else {
        next.push_back(h);
      }
    }
    for (const auto& p : positive) {
      for (const auto& n : negative) {
        const Rational wp = -n.normal[best];
        const Rational wn = p.normal[best];
        RationalVector combined(dim + 1);
        for (std::size_t j = 0; j < dim; ++j) combined[j] = wp * p.normal[j] + wn * n.normal[j];
        combined[dim] = wp * p.bound + wn * n.bound;
        combined[best] = 0;
        combined = primitive(combined);
        Halfspace h;
        h.bound = combined.back();
        combined.pop_back();
        h.normal = std::move(combined);
        next.push_back(std::move(h));
      }
    }
    for (const auto& h : next) {
      if (all_zero(h.normal) && h.bound < 0) throw Error(ErrorCode::Infeasible, "projection of an empty set");
    }
    ineqs = irredundant_rows(next, eqs, dim);
  }

  // Re-express over the kept variables.
  std::set<std::size_t> removed(eliminate.begin(), eliminate.end());
  std::vector<std::size_t> kept;
  for (std::size_t v = 0; v < dim; ++v) {
    if (!removed.count(v)) kept.push_back(v);
  }
  Polytope out;
  out.dimension = kept.size();
  for (std::size_t v : kept) {
    out.variables.push_back(v < poly.variables.size() ? poly.variables[v] : "x" + std::to_string(v + 1));
  }
  auto restrict_row = [&](const Halfspace& h) {
    Halfspace r;
    r.bound = h.bound;
    r.label = h.label;
    for (std::size_t v : kept) r.normal.push_back(h.normal[v]);
    return r;
  };
  for (const auto& h : ineqs) out.inequalities.push_back(restrict_row(h));
  for (const auto& h : eqs) out.equalities.push_back(restrict_row(h));
  return out;
}

std::vector<RationalVector> enumerate_vertices(const Polytope& poly) {
  const std::size_t dim = poly.dimension;
  for (std::size_t j = 0; j < dim; ++j) {
    RationalVector e(dim, Rational(0));
    e[j] = 1;
    for (Direction d : {Direction::Maximize, Direction::Minimize}) {
      auto r = lp_solve(poly, e, d);
      if (r.status == LPStatus::Infeasible) return {};
      if (r.status == LPStatus::Unbounded) {
        throw Error(ErrorCode::UnboundedPolytope, "vertex enumeration needs a bounded polytope");
      }
    }
  }
  Polytope reduced = remove_redundant(poly);
  EqualityBasis basis = equality_basis(reduced.equalities, dim);
  const std::size_t need = dim - basis.pivots.size();

  Matrix base_rows;
  RationalVector base_rhs;
  for (const auto& row : basis.rows) {
    base_rows.emplace_back(row.begin(), row.end() - 1);
    base_rhs.push_back(row.back());
  }

  std::set<RationalVector> found;
  const auto& ineqs = reduced.inequalities;
  const std::size_t m = ineqs.size();
  if (need == 0) {
    if (auto x = detail::solve_unique(base_rows, base_rhs)) found.insert(*x);
  } else if (m >= need) {
    std::vector<std::size_t> pick(need);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    while (true) {
      Matrix rows = base_rows;
      RationalVector rhs = base_rhs;
      for (std::size_t i : pick) {
        rows.push_back(ineqs[i].normal);
        rhs.push_back(ineqs[i].bound);
      }
      if (auto x = detail::solve_unique(std::move(rows), std::move(rhs))) {
        bool inside = std::all_of(ineqs.begin(), ineqs.end(),
                                  [&](const Halfspace& h) { return leq(h.normal, h.bound, *x); });
        if (inside) found.insert(*x);
      }
      // next combination
      std::size_t i = need;
      while (i > 0 && pick[i - 1] == m - need + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < need; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return {found.begin(), found.end()};
}

std::vector<RationalVector> optimal_face_vertices(const Polytope& poly, const RationalVector& objective) {
  LPResult best = lp_optimize(poly, objective, Direction::Maximize);
  Polytope face = poly;
  face.add_equality(objective, best.value, "optimal face");
  return enumerate_vertices(face);
}

namespace {

using Simplex = std::vector<std::size_t>;

void pulling_triangulation(const std::vector<RationalVector>& points,
                           const std::vector<std::vector<std::size_t>>& tight_sets,
                           const std::vector<std::size_t>& face, std::size_t face_dim,
                           std::vector<Simplex>& out) {
  if (face.size() == face_dim + 1) {
    out.push_back(face);
    return;
  }
  const std::size_t apex = face.front();
  std::set<std::vector<std::size_t>> facets;
  for (const auto& tight : tight_sets) {
    std::vector<std::size_t> sub;
    std::set_intersection(face.begin(), face.end(), tight.begin(), tight.end(), std::back_inserter(sub));
    if (sub.size() == face.size() || sub.size() < face_dim) continue;
    if (std::binary_search(sub.begin(), sub.end(), apex)) continue;
    std::vector<RationalVector> sub_points;
    for (std::size_t idx : sub) sub_points.push_back(points[idx]);
    if (detail::affine_rank(sub_points) + 1 != face_dim) continue;
    facets.insert(std::move(sub));
  }
  for (const auto& facet : facets) {
    std::vector<Simplex> below;
    pulling_triangulation(points, tight_sets, facet, face_dim - 1, below);
    for (auto& s : below) {
      s.insert(s.begin(), apex);
      out.push_back(std::move(s));
    }
  }
}

}  // namespace

VolumeResult volume(const Polytope& poly) {
  VolumeResult result;
  const std::size_t dim = poly.dimension;
  EqualityBasis basis = equality_basis(poly.equalities, dim);
  std::set<std::size_t> pivots(basis.pivots.begin(), basis.pivots.end());
  for (std::size_t c = 0; c < dim; ++c) {
    if (!pivots.count(c)) result.chart.push_back(c);
  }
  const std::size_t d = result.chart.size();
  result.value = 0;

  std::vector<RationalVector> vertices = enumerate_vertices(poly);
  if (vertices.empty()) return result;
  result.affine_dimension = detail::affine_rank(vertices);
  if (result.affine_dimension < d) return result;
  result.full_dimensional = true;
  if (d == 0) {
    result.value = 1;
    return result;
  }

  Polytope reduced = remove_redundant(poly);
  std::vector<std::vector<std::size_t>> tight_sets;
  for (const auto& h : reduced.inequalities) {
    std::vector<std::size_t> tight;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (dot(h.normal, vertices[i]) == h.bound) tight.push_back(i);
    }
    tight_sets.push_back(std::move(tight));
  }
  std::vector<std::size_t> all(vertices.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<Simplex> simplices;
  pulling_triangulation(vertices, tight_sets, all, d, simplices);

  Rational total = 0;
  for (const auto& s : simplices) {
    Matrix m;
    for (std::size_t i = 1; i < s.size(); ++i) {
      RationalVector row;
      for (std::size_t c : result.chart) row.push_back(vertices[s[i]][c] - vertices[s[0]][c]);
      m.push_back(std::move(row));
    }
    total += abs(detail::determinant(std::move(m)));
  }
  Rational factorial = 1;
  for (std::size_t i = 2; i <= d; ++i) factorial *= static_cast<long>(i);
  result.value = total / factorial;
  return result;
}

// --- constraint systems ----------------------------------------------------

namespace {

RationalVector joined(const Inequality& row) {
  RationalVector v = row.orbital;
  v.insert(v.end(), row.spin.begin(), row.spin.end());
  return v;
}

void check_row_shape(const ConstraintSystem& system, const Inequality& row) {
  if (row.orbital.size() != static_cast<std::size_t>(system.shell.orbital_dim) ||
      row.spin.size() != system.shell.spin_multiplicity()) {
    throw Error(ErrorCode::DimensionMismatch, "row " + to_string(row) + " does not match shell " +
                                                  system.shell.name());
  }
}

std::vector<std::string> variable_names(const ConstraintSystem& system) {
  std::vector<std::string> names;
  for (int i = 0; i < system.shell.orbital_dim; ++i) names.push_back("nu" + std::to_string(i + 1));
  for (std::size_t j = 0; j < system.shell.spin_multiplicity(); ++j) names.push_back("mu" + std::to_string(j + 1));
  return names;
}

}  // namespace

Polytope to_polytope(const ConstraintSystem& system) {
  Polytope poly;
  poly.dimension = system.variable_count();
  poly.variables = variable_names(system);
  auto add = [&](const Inequality& row) {
    check_row_shape(system, row);
    if (row.sense == Sense::Equal) {
      poly.add_equality(joined(row), row.bound, row.origin);
    } else {
      poly.add_inequality(joined(row), row.bound, row.origin);
    }
  };
  for (const auto& row : system.inequalities) add(row);
  for (const auto& row : system.equalities) add(row);
  for (const auto& row : system.structural_rows()) add(row);
  return poly;
}

Polytope spin_polytope(const ConstraintSystem& system, const OccupancyVector& orbital) {
  if (orbital.values.size() != static_cast<std::size_t>(system.shell.orbital_dim)) {
    throw Error(ErrorCode::DimensionMismatch, "orbital occupancy length does not match shell");
  }
  const std::size_t k = system.shell.spin_multiplicity();
  Polytope poly;
  poly.dimension = k;
  for (std::size_t j = 0; j < k; ++j) poly.variables.push_back("mu" + std::to_string(j + 1));
  auto add = [&](const Inequality& row) {
    check_row_shape(system, row);
    Rational bound = row.bound - dot(row.orbital, orbital.values);
    const bool constant = all_zero(row.spin);
    if (constant) {
      const bool holds = row.sense == Sense::Equal ? bound.is_zero() : bound >= 0;
      if (holds) return;
    }
    if (row.sense == Sense::Equal) {
      poly.add_equality(row.spin, bound, row.origin);
    } else {
      poly.add_inequality(row.spin, bound, row.origin);
    }
  };
  for (const auto& row : system.inequalities) add(row);
  for (const auto& row : system.equalities) add(row);
  for (const auto& row : system.structural_rows()) add(row);
  return poly;
}

SystemCheck feasible(const ConstraintSystem& system, const OccupancyVector& orbital,
                     const OccupancyVector& spin) {
  if (orbital.values.size() != static_cast<std::size_t>(system.shell.orbital_dim) ||
      spin.values.size() != system.shell.spin_multiplicity()) {
    throw Error(ErrorCode::DimensionMismatch,
                "occupancy lengths (" + std::to_string(orbital.values.size()) + ", " +
                    std::to_string(spin.values.size()) + ") do not match shell " + system.shell.name());
  }
  OccupancyVector nu = OccupancyVector::orbital(orbital.values);
  OccupancyVector mu = OccupancyVector::spin(spin.values);
  SystemCheck check;
  auto test = [&](const Inequality& row) {
    Rational lhs = dot(row.orbital, nu.values) + dot(row.spin, mu.values);
    bool ok = row.sense == Sense::Equal ? lhs == row.bound : lhs <= row.bound;
    if (!ok) {
      check.feasible = false;
      check.violated.push_back(row.origin.empty() ? to_string(row) : row.origin + " " + to_string(row));
    }
  };
  for (const auto& row : system.inequalities) test(row);
  for (const auto& row : system.equalities) test(row);
  for (const auto& row : system.structural_rows()) test(row);
  return check;
}

Polytope project_out(const ConstraintSystem& system, const std::vector<std::size_t>& eliminate,
                     const std::optional<DerivedVariable>& introduce) {
  Polytope poly = to_polytope(system);
  if (introduce) {
    if (introduce->coefficients.size() != poly.dimension) {
      throw Error(ErrorCode::DimensionMismatch, "derived variable coefficients do not match the system");
    }
    const std::size_t extra = poly.dimension;
    Polytope widened;
    widened.dimension = extra + 1;
    widened.variables = poly.variables;
    widened.variables.push_back(introduce->name);
    auto widen = [&](const Halfspace& h) {
      Halfspace w = h;
      w.normal.push_back(Rational(0));
      return w;
    };
    for (const auto& h : poly.inequalities) widened.inequalities.push_back(widen(h));
    for (const auto& h : poly.equalities) widened.equalities.push_back(widen(h));
    RationalVector definition(extra + 1);
    for (std::size_t j = 0; j < extra; ++j) definition[j] = -introduce->coefficients[j];
    definition[extra] = 1;
    widened.add_equality(definition, Rational(0), introduce->name + " definition");
    if (introduce->fixed) {
      RationalVector pin(extra + 1, Rational(0));
      pin[extra] = 1;
      widened.add_equality(pin, *introduce->fixed, introduce->name + " fixed");
    }
    poly = std::move(widened);
  }
  return project_out(poly, eliminate);
}

}  // namespace paulimag
