#include "paulimag/magnetics.hpp"

#include "paulimag/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace paulimag {

MomentObjective MomentObjective::for_shell(const ShellConfig& shell) {
  if (shell.sector == SpinSector::Polarized) {
    throw Error(ErrorCode::UnsupportedShell, "polarized shells carry no spin moment objective");
  }
  const std::size_t k = shell.spin_multiplicity();
  MomentObjective m;
  for (std::size_t j = 0; j < k; ++j) {
    m.spin_coeffs.push_back(Rational(static_cast<long>(k) - 1 - 2 * static_cast<long>(j)));
  }
  return m;
}

std::vector<ProjectedBound> projected_bounds(const ShellConfig& shell) {
  auto row = [](std::string label, RationalVector orbital, long constant, bool upper = true) {
    return ProjectedBound{std::move(label), std::move(orbital), Rational(constant), upper};
  };
  if (shell.orbital_dim != 5) return {};
  if (shell.sector == SpinSector::High && shell.electron_count == 7) {
    return {
        row("M <= 2(nu2+nu4)-3", {0, 2, 0, 2, 0}, -3),
        row("Fe: M <= 2(nu1+nu3-nu5)-1", {2, 0, 2, 0, -2}, -1),
        row("M <= 9-2(2nu1-nu2+nu4)", {-4, 2, 0, -2, 0}, 9),
        row("M <= 9-2(nu2+2nu3-nu4)", {0, -2, -4, 2, 0}, 9),
        row("Co: M <= 3nu3+(nu4-nu5)-5(nu1-nu2)", {-5, 5, 3, 1, -1}, 0),
        row("M <= 3", {0, 0, 0, 0, 0}, 3),
        row("M >= 2(nu2+2nu3-nu4)-7", {0, 2, 4, -2, 0}, -7, false),
    };
  }
  if (shell.sector == SpinSector::High && shell.electron_count == 8) {
    return {
        row("M <= nu1-nu2+nu3-nu4+nu5", {1, -1, 1, -1, 1}, 0),
        row("M <= 2nu1-2nu3-2nu5+4", {2, 0, -2, 0, -2}, 4),
        row("M <= 2nu2-2nu4+4nu5-4", {0, 2, 0, -2, 4}, -4),
        row("M <= 4nu3+2nu4-2nu2-4", {0, -2, 4, 2, 0}, -4),
        row("M <= 2", {0, 0, 0, 0, 0}, 2),
    };
  }
  if (shell.sector == SpinSector::Low && shell.electron_count == 7) {
    return {
        row("M <= 3-2(nu3-nu4)", {0, 0, -2, 2, 0}, 3),
        row("M <= 3-2(nu4-nu5)", {0, 0, 0, -2, 2}, 3),
        row("M <= 1", {0, 0, 0, 0, 0}, 1),
        row("M >= 2(nu3-nu5)-3", {0, 0, 2, 0, -2}, -3, false),
        row("M >= 1-2(nu2-nu4+2nu5)", {0, -2, 0, 2, -4}, 1, false),
    };
  }
  return {};
}

namespace {

MomentBound moment_extremum(const ConstraintSystem& system, const OccupancyVector& nu_in, Direction direction) {
  const std::size_t n = static_cast<std::size_t>(system.shell.orbital_dim);
  if (nu_in.values.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "orbital occupancy has length " + std::to_string(nu_in.values.size()) +
                                                  ", shell " + system.shell.name() + " needs " + std::to_string(n));
  }
  OccupancyVector nu = OccupancyVector::orbital(nu_in.values);
  if (nu.normalization != system.shell.electron_count) {
    throw Error(ErrorCode::InvalidPopulations, "orbital occupancies sum to " + to_string(nu.normalization) +
                                                   ", expected " + std::to_string(system.shell.electron_count));
  }
  MomentObjective m = MomentObjective::for_shell(system.shell);
  Polytope poly = spin_polytope(system, nu);
  LPResult lp = lp_solve(poly, m.spin_coeffs, direction);
  if (lp.status == LPStatus::Infeasible) {
    throw Error(ErrorCode::HighSpinInfeasible,
                "no spin occupancy of " + system.shell.name() + " is compatible with nu = " + to_string(nu.values));
  }
  if (lp.status == LPStatus::Unbounded) throw Error(ErrorCode::Unbounded, "moment is unbounded");
  MomentBound out;
  out.value = lp.value;
  out.argmax = lp.argpoint;
  out.certificate_verified = verify_certificate(poly, m.spin_coeffs, direction, lp);
  for (std::size_t i = 0; i < poly.inequalities.size(); ++i) {
    if (lp.inequality_multipliers[i] > 0) {
      out.certificate.push_back({poly.inequalities[i].label, lp.inequality_multipliers[i]});
    }
  }
  const bool upper = direction == Direction::Maximize;
  for (const auto& bound : projected_bounds(system.shell)) {
    if (bound.upper == upper && bound.value(nu.values) == out.value) out.tight_bounds.push_back(bound.label);
  }
  return out;
}

}  // namespace

MomentBound moment_bound(const ConstraintSystem& system, const OccupancyVector& nu) {
  return moment_extremum(system, nu, Direction::Maximize);
}

MomentBound moment_floor(const ConstraintSystem& system, const OccupancyVector& nu) {
  return moment_extremum(system, nu, Direction::Minimize);
}

SpinIndependence spin_independence_check(const ShellConfig& shell, const OccupancyVector& nu_in) {
  if (shell.orbital_dim != 5 || nu_in.values.size() != 5) {
    throw Error(ErrorCode::UnsupportedShell, "spin independence criteria are stated for d-shells");
  }
  OccupancyVector nu = OccupancyVector::orbital(nu_in.values);
  const auto& v = nu.values;
  SpinIndependence out;
  if (shell.electron_count == 7) {
    out.quantity = v[2] + v[3] - v[4];
    if (out.quantity > 3) {
      out.consistent = false;
      out.violated.push_back("nu3+nu4-nu5 <= 3");
    }
    return out;
  }
  if (shell.electron_count == 8) {
    out.quantity = v[0] + v[4];
    if (out.quantity < 3) {
      out.collapse = true;
      out.consistent = false;
      out.violated.push_back("nu1+nu5 >= 3");
    }
    return out;
  }
  throw Error(ErrorCode::UnsupportedShell, "no spin independence criterion for " + shell.name());
}

// --- iron ----------------------------------------------------------------------

namespace {

using Point2 = std::pair<Rational, Rational>;

Rational cross(const Point2& o, const Point2& p, const Point2& q) {
  return (p.first - o.first) * (q.second - o.second) - (p.second - o.second) * (q.first - o.first);
}

/// Strict convex hull vertices, counter-clockwise starting at the lowest-left point.
std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// d7 high over (a, mu1..mu4) with nu = (a,a,a,b,b), b = (7-3a)/2.
Polytope lifted_bcc_polytope(const Rational& a_min, const Rational& a_max) {
  ConstraintSystem system = load_catalog(d_shell(7));
  const RationalVector u = {0, 0, 0, Rational(7, 2), Rational(7, 2)};
  const RationalVector v = {1, 1, 1, Rational(-3, 2), Rational(-3, 2)};
  Polytope poly;
  poly.dimension = 5;
  poly.variables = {"a", "mu1", "mu2", "mu3", "mu4"};
  auto add = [&](const Inequality& row) {
    RationalVector normal{dot(row.orbital, v)};
    normal.insert(normal.end(), row.spin.begin(), row.spin.end());
    Rational bound = row.bound - dot(row.orbital, u);
    if (std::all_of(normal.begin(), normal.end(), [](const Rational& x) { return x.is_zero(); })) return;
    if (row.sense == Sense::Equal) {
      poly.add_equality(normal, bound, row.origin);
    } else {
      poly.add_inequality(normal, bound, row.origin);
    }
  };
  for (const auto& row : system.inequalities) add(row);
  for (const auto& row : system.structural_rows()) add(row);
  poly.add_inequality({-1, 0, 0, 0, 0}, -a_min, "a >= a_min");
  poly.add_inequality({1, 0, 0, 0, 0}, a_max, "a <= a_max");
  return poly;
}

DiagramSegment make_segment(const DiagramVertex& p, const DiagramVertex& q, const RationalVector& mu_p,
                            const RationalVector& mu_q) {
  DiagramSegment s;
  s.from = p.label;
  s.to = q.label;
  s.a_from = p.a;
  s.a_to = q.a;
  s.slope = (q.moment - p.moment) / (q.a - p.a);
  s.intercept = p.moment - s.slope * p.a;
  for (std::size_t j = 0; j < mu_p.size(); ++j) {
    Rational slope = (mu_q[j] - mu_p[j]) / (q.a - p.a);
    s.mu_slope.push_back(slope);
    s.mu_constant.push_back(mu_p[j] - slope * p.a);
  }
  return s;
}

}  // namespace

IronDiagram iron_diagram(const Rational& a_min, const Rational& a_max) {
  if (a_min < Rational(7, 5) || a_max > Rational(5, 3) || a_min >= a_max) {
    throw Error(ErrorCode::Range, "iron diagram needs 7/5 <= a_min < a_max <= 5/3, got [" + to_string(a_min) + ", " +
                                      to_string(a_max) + "]");
  }
  const RationalVector m = {3, 1, -1, -3};
  std::vector<RationalVector> lifted = enumerate_vertices(lifted_bcc_polytope(a_min, a_max));
  std::map<Point2, RationalVector> preimage;
  std::vector<Point2> images;
  for (const auto& x : lifted) {
    RationalVector mu(x.begin() + 1, x.end());
    Point2 p{x[0], dot(m, mu)};
    images.push_back(p);
    preimage.emplace(p, mu);  // first in lexicographic order
  }
  std::vector<Point2> hull = convex_hull(images);

  // Clockwise order starting at the top-left vertex.
  std::reverse(hull.begin(), hull.end());
  auto top_left = std::min_element(hull.begin(), hull.end(), [](const Point2& x, const Point2& y) {
    return x.first != y.first ? x.first < y.first : x.second > y.second;
  });
  std::rotate(hull.begin(), top_left, hull.end());

  IronDiagram out;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    out.vertices.push_back({std::string(1, static_cast<char>('A' + i)), hull[i].first, hull[i].second});
  }
  // Upper chain runs clockwise from the top-left vertex to the top-right one.
  std::size_t right = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (hull[i].first > hull[right].first) right = i;
  }
  for (std::size_t i = 0; i < right; ++i) {
    out.upper.push_back(make_segment(out.vertices[i], out.vertices[i + 1], preimage[hull[i]], preimage[hull[i + 1]]));
  }
  // Lower chain: from the bottom-left vertex to the rightmost vertex.
  std::size_t bottom_left = hull.size() - 1;
  for (std::size_t i = right; i < hull.size(); ++i) {
    if (hull[i].first == hull[0].first) {
      bottom_left = i;
      break;
    }
  }
  for (std::size_t i = bottom_left; i > right; --i) {
    out.lower.push_back(make_segment(out.vertices[i], out.vertices[i - 1], preimage[hull[i]], preimage[hull[i - 1]]));
  }
  return out;
}

// --- cobalt --------------------------------------------------------------------

namespace {

RationalVector split_occupancies(const Rational& a, const Rational& b, const Rational& c, const Rational& e,
                                 const Rational& d) {
  RationalVector nu = {a, b + e, b - e, c + d, c - d};
  std::sort(nu.begin(), nu.end(), [](const Rational& x, const Rational& y) { return x > y; });
  return nu;
}

bool in_box(const RationalVector& nu) {
  return std::all_of(nu.begin(), nu.end(), [](const Rational& x) { return x >= 0 && x <= 2; });
}

}  // namespace

Rational cobalt_split_bound(const Rational& a, const Rational& b, const Rational& c, const Rational& epsilon,
                            const Rational& delta) {
  RationalVector nu = split_occupancies(a, b, c, epsilon, delta);
  return 3 * nu[2] + (nu[3] - nu[4]) - 5 * (nu[0] - nu[1]);
}

CobaltResult cobalt_bound(const Rational& a, const Rational& b, const Rational& c, const Rational& orbital_moment,
                          const std::optional<CobaltUncertainty>& uncertainty) {
  for (const Rational* x : {&a, &b, &c}) {
    if (*x < 0 || *x > 2) {
      throw Error(ErrorCode::InvalidPopulations, "subshell population " + to_string(*x) + " is outside [0,2]");
    }
  }
  if (a < b || b < c) {
    throw Error(ErrorCode::InvalidPopulations, "populations must satisfy a >= b >= c, got (" + to_string(a) + ", " +
                                                   to_string(b) + ", " + to_string(c) + ")");
  }
  if (orbital_moment < 0) throw Error(ErrorCode::InvalidPopulations, "orbital moment must be nonnegative");

  auto make_case = [&](const std::string& name, const Rational& e, const Rational& d) {
    return CobaltCase{name, e, d, cobalt_split_bound(a, b, c, e, d), split_occupancies(a, b, c, e, d)};
  };
  CobaltResult out;
  CobaltCase none = make_case("no-split", 0, 0);
  out.cases.push_back(none);
  out.best = none;
  const Rational& mo = orbital_moment;
  if (mo > 0) {
    // delta in [0, M/4], epsilon = (M - 4 delta)/2; the bound is piecewise
    // linear in delta with breaks where two adjusted occupancies cross.
    const std::vector<std::pair<Rational, Rational>> entries = {
        {a, 0}, {b + mo / 2, -2}, {b - mo / 2, 2}, {c, 1}, {c, -1}};
    std::set<Rational> breaks = {Rational(0), mo / 6, mo / 4};
    for (std::size_t i = 0; i < entries.size(); ++i) {
      for (std::size_t j = i + 1; j < entries.size(); ++j) {
        if (entries[i].second == entries[j].second) continue;
        Rational d = (entries[j].first - entries[i].first) / (entries[i].second - entries[j].second);
        if (d >= 0 && d <= mo / 4) breaks.insert(d);
      }
    }
    struct Window {
      const char* name;
      Rational lo, hi;
    };
    for (const Window& w : {Window{"eps<delta", mo / 6, mo / 4}, Window{"eps>delta", Rational(0), mo / 6}}) {
      std::optional<CobaltCase> best;
      for (const Rational& d : breaks) {
        if (d < w.lo || d > w.hi) continue;
        Rational e = (mo - 4 * d) / 2;
        CobaltCase candidate = make_case(w.name, e, d);
        if (!in_box(candidate.nu)) continue;
        if (!best || candidate.bound > best->bound) best = candidate;
      }
      if (best) out.cases.push_back(*best);
    }
    out.best = *std::max_element(out.cases.begin() + 1, out.cases.end(),
                                 [](const CobaltCase& x, const CobaltCase& y) { return x.bound < y.bound; });
  }
  if (uncertainty) {
    Interval image{out.best.bound, out.best.bound};
    for (int mask = 0; mask < 8; ++mask) {
      Rational ca = a + ((mask & 1) ? uncertainty->a : -uncertainty->a);
      Rational cb = b + ((mask & 2) ? uncertainty->b : -uncertainty->b);
      Rational cc = c + ((mask & 4) ? uncertainty->c : -uncertainty->c);
      if (ca < cb) std::swap(ca, cb);
      if (cb < cc) std::swap(cb, cc);
      if (ca < cb) std::swap(ca, cb);
      try {
        Rational value = cobalt_bound(ca, cb, cc, orbital_moment).best.bound;
        image.lo = std::min(image.lo, value);
        image.hi = std::max(image.hi, value);
      } catch (const Error&) {
        // corner outside the box
      }
    }
    out.image = image;
  }
  return out;
}

// --- nickel --------------------------------------------------------------------

NickelBounds nickel_bounds(const OccupancyVector& nu_in) {
  if (nu_in.values.size() != 5) throw Error(ErrorCode::DimensionMismatch, "nickel bounds need five occupancies");
  OccupancyVector nu = OccupancyVector::orbital(nu_in.values);
  const auto& v = nu.values;
  if (v[0] > 2) throw Error(ErrorCode::InvalidPopulations, "nu1 = " + to_string(v[0]) + " exceeds 2");
  if (v[0] + v[4] < 3) {
    throw Error(ErrorCode::CollapseToSingletState,
                "nu1 + nu5 = " + to_string(v[0] + v[4]) + " < 3: the d8 shell collapses to S = 0");
  }
  NickelBounds out;
  auto bounds = projected_bounds(d_shell(8));
  for (std::size_t i = 0; i < 4; ++i) out.rows.push_back(bounds[i].value(v));
  auto it = std::min_element(out.rows.begin(), out.rows.end());
  out.minimum = *it;
  out.attaining_row = static_cast<std::size_t>(it - out.rows.begin()) + 1;
  out.attribution_differs_from_first = out.attaining_row != 1;
  out.lp_value = moment_bound(load_catalog(d_shell(8)), nu).value;
  out.agrees_with_lp = std::min(out.minimum, Rational(2)) == out.lp_value;
  return out;
}

// --- d7 orbital regions ----------------------------------------------------------

Polytope zero_moment_region() {
  ConstraintSystem system = load_catalog(d_shell(7));
  DerivedVariable moment;
  moment.name = "M";
  moment.coefficients = {0, 0, 0, 0, 0, 3, 1, -1, -3};
  moment.fixed = Rational(0);
  return project_out(system, {5, 6, 7, 8, 9}, moment);
}

Polytope orbital_reference_region() {
  Polytope poly;
  poly.dimension = 5;
  poly.variables = {"nu1", "nu2", "nu3", "nu4", "nu5"};
  for (std::size_t i = 0; i + 1 < 5; ++i) {
    RationalVector row(5, Rational(0));
    row[i] = -1;
    row[i + 1] = 1;
    poly.add_inequality(row, 0, "order nu" + std::to_string(i + 1) + ">=nu" + std::to_string(i + 2));
  }
  poly.add_inequality({1, 0, 0, 0, 0}, 2, "nu1<=2");
  poly.add_equality({1, 1, 1, 1, 1}, 7, "normalization nu");
  return poly;
}

VolumeFraction zero_moment_fraction() {
  VolumeFraction out;
  out.region = volume(zero_moment_region()).value;
  out.reference = volume(orbital_reference_region()).value;
  out.fraction = out.region / out.reference;
  return out;
}

FreeSpinCheck free_spin_check(const Rational& nu1) {
  ConstraintSystem system = load_catalog(d_shell(7));
  FreeSpinCheck out;
  out.nu = OccupancyVector::orbital({nu1, nu1, 3 - nu1, 3 - nu1, 1});
  Polytope poly = spin_polytope(system, out.nu);
  for (std::size_t r = 1; r <= 4; ++r) {
    RationalVector vertex(4, Rational(0));
    for (std::size_t j = 0; j < r; ++j) vertex[j] = Rational(1, static_cast<long>(r));
    if (!check_point(poly, vertex).feasible) out.excluded.push_back(vertex);
  }
  out.ordered = nu1 >= 3 - nu1 && 3 - nu1 >= 1;
  out.free = out.ordered && out.excluded.empty();
  return out;
}

// --- presets -------------------------------------------------------------------

ElementPreset load_preset(const std::string& element) {
  std::string key;
  for (char ch : element) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  const auto doc = nlohmann::json::parse(table_text("presets"));
  if (!doc.contains(key)) throw Error(ErrorCode::Parse, "unknown preset '" + element + "' (fe, co, ni)");
  const auto& j = doc.at(key);
  ElementPreset p;
  p.element = j.at("element").get<std::string>();
  p.structure = j.at("structure").get<std::string>();
  p.shell = j.at("shell").get<std::string>();
  for (const auto& [name, entry] : j.at("occupancies").items()) {
    p.occupancies[name] = {parse_rational(entry.at("value").get<std::string>()),
                           parse_rational(entry.at("uncertainty").get<std::string>())};
  }
  p.moment_total = parse_rational(j.at("moments").at("total").get<std::string>());
  p.moment_spin = parse_rational(j.at("moments").at("spin").get<std::string>());
  p.moment_orbital = parse_rational(j.at("moments").at("orbital").get<std::string>());
  for (const auto& s : j.at("sources")) p.sources.push_back(s.get<std::string>());
  return p;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, entry] : nlohmann::json::parse(table_text("presets")).items()) names.push_back(name);
  return names;
}

}  // namespace paulimag
