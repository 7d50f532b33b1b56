#include "doctest.h"
#include "oracles.hpp"

#include "paulimag/catalog.hpp"
#include "paulimag/error.hpp"
#include "paulimag/magnetics.hpp"
#include "paulimag/polytope.hpp"

#include <algorithm>
#include <set>

using namespace paulimag;

namespace {

RationalVector ints(std::initializer_list<long> xs) {
  RationalVector v;
  for (long x : xs) v.push_back(Rational(x));
  return v;
}

// Row scaled so that its first nonzero entry has absolute value one.
RationalVector normalized(const Inequality& row) {
  RationalVector v = row.orbital;
  v.insert(v.end(), row.spin.begin(), row.spin.end());
  v.push_back(row.bound);
  v.push_back(row.sense == Sense::Equal ? 1 : 0);
  auto lead = std::find_if(v.begin(), v.end() - 1, [](const Rational& q) { return q != 0; });
  if (lead == v.end() - 1) return v;
  Rational s = abs(*lead);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) v[i] /= s;
  return v;
}

std::set<RationalVector> row_set(const ConstraintSystem& s) {
  std::set<RationalVector> out;
  for (const auto& r : s.inequalities) out.insert(normalized(r));
  for (const auto& r : s.equalities) out.insert(normalized(r));
  return out;
}

bool has_row(const ConstraintSystem& s, const RationalVector& orbital, const RationalVector& spin, const Rational& c) {
  return std::any_of(s.inequalities.begin(), s.inequalities.end(), [&](const Inequality& r) {
    return r.orbital == orbital && r.spin == spin && r.bound == c;
  });
}

Rational max_over(const Polytope& p, const RationalVector& c) {
  LPResult r = lp_optimize(p, c, Direction::Maximize);
  REQUIRE(r.status == LPStatus::Optimal);
  return r.value;
}

// (constant, slope) pairs of the printed nine-row BCC list.
struct PrintedRow {
  RationalVector constant;
  RationalVector slope;
};

std::vector<PrintedRow> printed_bcc_rows() {
  return {
      {ints({3, 3, 2, 2}), ints({-2, -2, -2, -2})},
      {ints({-3, -3, -4, -3}), ints({2, 2, 2, 2})},
      {ints({11, 9, 7, 9}), ints({-7, -7, -7, -7})},
      {ints({-11, -13, -11, -9}), ints({7, 7, 7, 7})},
      {ints({-1, -3, -2, -2}), ints({1, 1, 1, 1})},
      {ints({2, 0, 1, 0}), ints({-1, -1, -1, -1})},
      {ints({-4, -6, -5, -6}), ints({3, 3, 3, 3})},
      {ints({-17, -15, -13, -11}), ints({9, 9, 9, 9})},
      {ints({23, 17, 19, 21}), ints({-15, -15, -15, -15})},
  };
}

bool proportional(const ParametricRow& row, const PrintedRow& printed) {
  RationalVector x = row.constant;
  x.insert(x.end(), row.slope.begin(), row.slope.end());
  RationalVector y = printed.constant;
  y.insert(y.end(), printed.slope.begin(), printed.slope.end());
  std::optional<Rational> k;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((x[i] == 0) != (y[i] == 0)) return false;
    if (y[i] == 0) continue;
    Rational ratio = x[i] / y[i];
    if (ratio <= 0 || (k && *k != ratio)) return false;
    k = ratio;
  }
  return k.has_value();
}

}  // namespace

TEST_CASE("embedded tables are frozen") {
  CHECK(table_checksum("d7_high") == 0x41bea585cd94a11eULL);
  CHECK(table_checksum("d8_high") == 0xe6c29dda397421d6ULL);
  CHECK(table_checksum("d7_low") == 0x2edf3b6f2f56845aULL);
  CHECK(load_catalog(d_shell(7)).inequalities.size() == 56);
  CHECK(load_catalog(d_shell(8)).inequalities.size() == 30);
  CHECK(load_catalog(d_shell(7, SpinSector::Low)).inequalities.size() == 5);
}

TEST_CASE("table rows appear as printed") {
  ConstraintSystem d7 = load_catalog(d_shell(7));
  CHECK(has_row(d7, ints({1, 0, 0, 0, 0}), ints({0, 0, 0, 0}), 2));
  CHECK(has_row(d7, ints({0, 0, 1, -1, -2}), ints({0, 1, 0, 2}), -1));
  CHECK(has_row(d7, ints({1, 0, 0, 1, -1}), ints({-1, 0, 0, 1}), 2));
  CHECK(has_row(d7, ints({0, 0, 1, -1, 1}), ints({1, -1, 0, 0}), 2));

  // M = mu1 - mu2 <= 3 - 2(nu3 - nu4) and nu3 + nu4 - nu5 <= 3.
  ConstraintSystem low = load_catalog(d_shell(7, SpinSector::Low));
  CHECK(low.shell.spin_multiplicity() == 2);
  CHECK(has_row(low, ints({0, 0, 2, -2, 0}), ints({1, -1}), 3));
  CHECK(has_row(low, ints({0, 0, 1, 1, -1}), ints({0, 0}), 3));
}

TEST_CASE("cubicle self-check") {
  CubicleReport d7 = cubicle_self_check(load_catalog(d_shell(7)));
  std::vector<std::string> outliers;
  for (const auto& g : d7.groups) outliers.insert(outliers.end(), g.outliers.begin(), g.outliers.end());
  CHECK(outliers == std::vector<std::string>{"L1.7"});

  CubicleReport d8 = cubicle_self_check(load_catalog(d_shell(8)));
  CHECK(d8.consistent());
  std::size_t rows = 0;
  for (const auto& g : d8.groups) rows += g.rows;
  CHECK(rows == 30);
}

TEST_CASE("witnesses satisfy every row exactly") {
  std::vector<ShellConfig> shells{d_shell(7), d_shell(8), d_shell(7, SpinSector::Low), d_shell(3), d_shell(2),
                                  d_shell(1), d_shell(4), d_shell(5), d_shell(6), d_shell(9)};
  for (const auto& shell : shells) {
    CAPTURE(shell.name());
    ConstraintSystem s = load_catalog(shell);
    REQUIRE(s.witness_orbital.size() == 5);
    REQUIRE(s.witness_spin.size() == shell.spin_multiplicity());
    SystemCheck c = feasible(s, OccupancyVector::orbital(s.witness_orbital), OccupancyVector::spin(s.witness_spin));
    CHECK(c.feasible);
    CHECK(c.violated.empty());
  }
}

TEST_CASE("saturated iron configuration is admissible") {
  ConstraintSystem d7 = load_catalog(d_shell(7));
  OccupancyVector nu = OccupancyVector::bcc(Rational(35, 24));
  OccupancyVector mu = OccupancyVector::spin({Rational(11, 16), Rational(11, 48), Rational(1, 12), Rational(0)});
  CHECK(feasible(d7, nu, mu).feasible);
  CHECK(check_point(spin_polytope(d7, nu), mu.values).feasible);
}

TEST_CASE("unsupported shells") {
  CHECK_THROWS_AS(load_catalog(d_shell(8, SpinSector::Low)), Error);
  CHECK_THROWS_AS(load_spinless_catalog(4, 7), Error);
  try {
    load_catalog(d_shell(6, SpinSector::Low));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedShell);
  }
}

TEST_CASE("derived consequences of the d7 table") {
  Polytope p = to_polytope(load_catalog(d_shell(7)));
  REQUIRE(p.dimension == 9);
  // Sum of +-e_i over signed 1-based positions.
  auto form = [](std::initializer_list<int> terms) {
    RationalVector v(9, Rational(0));
    for (int t : terms) v[std::abs(t) - 1] += t > 0 ? 1 : -1;
    return v;
  };
  CHECK(max_over(p, form({1})) == 2);
  CHECK(max_over(p, form({-5})) == -1);
  for (int i = 1; i <= 4; ++i) {
    CAPTURE(i);
    // mu_i <= 1 - nu1 + nu_{i+1}
    CHECK(max_over(p, form({5 + i, 1, -(1 + i)})) <= 1);
    // nu1 + nu_{i+1} - 3 <= mu_i
    CHECK(max_over(p, form({1, 1 + i, -(5 + i)})) <= 3);
  }
  CHECK(max_over(p, form({3, 4, -5})) <= 3);
}

TEST_CASE("low spin d7 in a BCC field") {
  ConstraintSystem low = load_catalog(d_shell(7, SpinSector::Low));
  for (Rational a : {Rational(19, 10), Rational(39, 20), Rational(2)}) {
    CAPTURE(a);
    MomentBound b = moment_bound(low, OccupancyVector::bcc(a));
    CHECK(b.value == 10 - 5 * a);
  }
  CHECK(moment_bound(low, OccupancyVector::bcc(Rational(17, 10))).value == 1);
}

TEST_CASE("degenerate shells are equality systems") {
  struct Case {
    int n;
    RationalVector nu;
    RationalVector mu;
  };
  Rational h(1, 2);
  std::vector<Case> cases{
      {1, {h, h, 0, 0, 0}, {h, h}},                                // mu_i = nu_i
      {4, {1, 1, 1, h, h}, {h, h, 0, 0, 0}},                       // mu_i = 1 - nu_{6-i}
      {6, {Rational(3, 2), Rational(3, 2), 1, 1, 1}, {h, h, 0, 0, 0}},  // mu_i = nu_i - 1
      {9, {2, 2, 2, Rational(3, 2), Rational(3, 2)}, {h, h}},       // mu_i = 2 - nu_{6-i}
      {5, {5, 0, 0, 0, 0}, {1, 0, 0, 0, 0, 0}},                    // mu1 = 1, nu1 = 5
  };
  for (const auto& c : cases) {
    CAPTURE(c.n);
    ConstraintSystem s = load_catalog(d_shell(c.n));
    CHECK(s.inequalities.empty());
    CHECK_FALSE(s.equalities.empty());
    Polytope p = spin_polytope(s, OccupancyVector::orbital(c.nu));
    CHECK(enumerate_vertices(p) == std::vector<RationalVector>{c.mu});
  }
}

TEST_CASE("spinless constraints") {
  ConstraintSystem f3 = load_spinless_catalog(3, 7);
  REQUIRE(f3.inequalities.size() == 4);
  std::set<RationalVector> printed{ints({0, 1, 1, 1, 1, 0, 0}), ints({1, 0, 1, 1, 0, 1, 0}),
                                   ints({1, 1, 0, 1, 0, 0, 1}), ints({1, 1, 0, 0, 1, 1, 0})};
  std::set<RationalVector> got;
  for (const auto& r : f3.inequalities) {
    CHECK(r.bound == 2);
    for (const auto& x : r.spin) CHECK(x == 0);
    got.insert(r.orbital);
  }
  CHECK(got == printed);

  ConstraintSystem six = load_spinless_catalog(3, 6);
  std::set<RationalVector> pairs;
  for (const auto& r : six.inequalities) {
    if (r.bound == 1 && std::count(r.orbital.begin(), r.orbital.end(), Rational(1)) == 2) pairs.insert(r.orbital);
  }
  CHECK(pairs == std::set<RationalVector>{ints({1, 0, 0, 0, 0, 1}), ints({0, 1, 0, 0, 1, 0}), ints({0, 0, 1, 1, 0, 0})});

  // Two electrons pair up: nu = (x, x, y, y, 0).
  Polytope two = to_polytope(load_spinless_catalog(2, 5));
  CHECK(check_point(two, {Rational(3, 5), Rational(3, 5), Rational(2, 5), Rational(2, 5), 0, 1}).feasible);
  CHECK_FALSE(check_point(two, {Rational(3, 5), Rational(2, 5), Rational(2, 5), Rational(2, 5), Rational(2, 5), 1}).feasible);

  // Polarized d3, d7, d8 shapes.
  Polytope d3 = to_polytope(load_spinless_catalog(3, 5));
  CHECK(check_point(d3, {1, Rational(3, 5), Rational(3, 5), Rational(2, 5), Rational(2, 5), 1}).feasible);
  CHECK_FALSE(check_point(d3, {Rational(3, 5), Rational(3, 5), Rational(3, 5), Rational(3, 5), Rational(3, 5), 1}).feasible);
  Polytope d7 = to_polytope(load_spinless_catalog(7, 5));
  CHECK(check_point(d7, {Rational(8, 5), Rational(8, 5), Rational(7, 5), Rational(7, 5), 1, 1}).feasible);
  CHECK_FALSE(check_point(d7, {Rational(7, 5), Rational(7, 5), Rational(7, 5), Rational(7, 5), Rational(7, 5), 1}).feasible);
  Polytope d8 = to_polytope(load_spinless_catalog(8, 5));
  CHECK(check_point(d8, {2, Rational(8, 5), Rational(8, 5), Rational(7, 5), Rational(7, 5), 1}).feasible);
  CHECK_FALSE(check_point(d8, {Rational(8, 5), Rational(8, 5), Rational(8, 5), Rational(8, 5), Rational(8, 5), 1}).feasible);
}

TEST_CASE("particle-hole duality") {
  for (int n : {7, 8}) {
    CAPTURE(n);
    ConstraintSystem s = load_catalog(d_shell(n));
    ConstraintSystem once = particle_hole_dual(s);
    CHECK(once.shell.electron_count == 10 - n);
    CHECK(row_set(once) != row_set(s));
    ConstraintSystem twice = particle_hole_dual(once);
    CHECK(twice.shell == s.shell);
    CHECK(row_set(twice) == row_set(s));
  }

  // nu1 <= 2 becomes 2 - nu5 <= 2.
  ConstraintSystem d3 = particle_hole_dual(load_catalog(d_shell(7)));
  CHECK(has_row(d3, ints({0, 0, 0, 0, -1}), ints({0, 0, 0, 0}), 0));

  // d2 through the dual of d8: maximum moment at the spherical point.
  ConstraintSystem d2 = particle_hole_dual(load_catalog(d_shell(8)));
  RationalVector sphere(5, Rational(2, 5));
  oracle::SpinRows rows = oracle::spin_rows(d2, sphere);
  RationalVector m = ints({2, 0, -2});
  auto expected = oracle::lp_max(rows.ineq, rows.eq, m);
  REQUIRE(expected);
  CHECK(moment_bound(d2, OccupancyVector::orbital(sphere)).value == *expected);
  CHECK(load_catalog(d_shell(2)).inequalities.size() == d2.inequalities.size());
}

TEST_CASE("dump and parse round trip") {
  for (const auto& shell : {d_shell(7), d_shell(8), d_shell(7, SpinSector::Low), d_shell(4), d_shell(5)}) {
    CAPTURE(shell.name());
    ConstraintSystem s = load_catalog(shell);
    ConstraintSystem back = parse_system(dump_system(s));
    CHECK(back.shell == s.shell);
    CHECK(back.inequalities == s.inequalities);
    CHECK(back.equalities == s.equalities);
    CHECK(back.witness_orbital == s.witness_orbital);
    CHECK(back.witness_spin == s.witness_spin);
    CHECK(back.orbital_cap == s.orbital_cap);
    CHECK(dump_system(back) == dump_system(s));
  }
  ConstraintSystem d7 = load_catalog(d_shell(7));
  ConstraintSystem back = parse_system(dump_system(d7));
  OccupancyVector nu = OccupancyVector::bcc(Rational(35, 24));
  CHECK(moment_bound(back, nu).value == moment_bound(d7, nu).value);
  CHECK_THROWS_AS(parse_system("1 2 3 | 4 | <= | x\n"), Error);
}

TEST_CASE("spherical d7 specialization") {
  SymmetrySpec sym{SymmetryKind::Spherical, {}};
  SpecializedSystem s = specialize(load_catalog(d_shell(7)), sym);
  CHECK(s.rows.size() == 3);

  // mu1 + mu2 <= 4/5, mu1 - mu3 <= 2/5, mu1 <= 2 mu2 + mu3, over the sorted simplex.
  oracle::SpinRows printed;
  printed.ineq = {{ints({1, 1, 0, 0}), Rational(4, 5)}, {ints({1, 0, -1, 0}), Rational(2, 5)},
                  {ints({1, -2, -1, 0}), Rational(0)}};
  ConstraintSystem empty;
  empty.shell = d_shell(7);
  oracle::SpinRows structural = oracle::spin_rows(empty, {});
  printed.ineq.insert(printed.ineq.end(), structural.ineq.begin(), structural.ineq.end());
  printed.eq = structural.eq;
  CHECK(enumerate_vertices(s.polytope()) == oracle::vertices(printed.ineq, printed.eq, 4));

  auto top = optimal_face_vertices(s.polytope(), ints({3, 1, -1, -3}));
  CHECK(top == std::vector<RationalVector>{{Rational(3, 5), Rational(1, 5), Rational(1, 5), Rational(0)}});
}

TEST_CASE("spherical d8 specialization") {
  SpecializedSystem s = specialize(load_catalog(d_shell(8)), {SymmetryKind::Spherical, {}});
  CHECK(max_over(s.polytope(), ints({2, 0, -2})) == Rational(4, 5));
}

TEST_CASE("symbolic BCC specialization gives the printed nine rows") {
  SymmetrySpec sym{SymmetryKind::BCC, {}};
  SpecializedSystem s = specialize(load_catalog(d_shell(7)), sym);
  REQUIRE(s.symbolic);
  CHECK(s.domain_min == Rational(7, 5));
  CHECK(s.domain_max == Rational(5, 3));
  REQUIRE(s.parametric_rows.size() == 9);
  auto printed = printed_bcc_rows();
  std::vector<int> hits(printed.size(), 0);
  for (const auto& row : s.parametric_rows) {
    int matched = 0;
    for (std::size_t i = 0; i < printed.size(); ++i) {
      if (proportional(row, printed[i])) {
        ++hits[i];
        ++matched;
      }
    }
    CHECK_MESSAGE(matched == 1, row.origin);
  }
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));

  auto reference = bcc_reference_rows();
  REQUIRE(reference.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(proportional(reference[i], printed[i]));
}

TEST_CASE("numeric BCC specialization agrees with the full system") {
  ConstraintSystem d7 = load_catalog(d_shell(7));
  for (Rational a : {Rational(7, 5), Rational(35, 24), Rational(3, 2), Rational(8, 5), Rational(5, 3)}) {
    CAPTURE(a);
    SpecializedSystem s = specialize(d7, {SymmetryKind::BCC, {{"a", a}}});
    CHECK_FALSE(s.symbolic);
    auto lhs = enumerate_vertices(s.polytope());
    auto rhs = enumerate_vertices(spin_polytope(d7, OccupancyVector::bcc(a)));
    CHECK(lhs == rhs);
    SpecializedSystem sym = specialize(d7, {SymmetryKind::BCC, {}});
    CHECK(enumerate_vertices(sym.polytope(a)) == rhs);
  }
}

TEST_CASE("infeasible symmetry parameters") {
  ShellConfig d7 = d_shell(7);
  auto code = [&](const SymmetrySpec& sym) {
    try {
      symmetry_occupancy(d7, sym);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Parse;
  };
  CHECK(code({SymmetryKind::BCC, {{"a", Rational(1)}}}) == ErrorCode::InfeasibleSymmetry);
  CHECK(code({SymmetryKind::BCC, {{"a", Rational(9, 4)}}}) == ErrorCode::InfeasibleSymmetry);
  CHECK(symmetry_occupancy(d7, {SymmetryKind::BCC, {{"a", Rational(3, 2)}}}).values ==
        RationalVector{Rational(3, 2), Rational(3, 2), Rational(3, 2), Rational(5, 4), Rational(5, 4)});
}
