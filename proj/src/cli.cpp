#include "paulimag/cli.hpp"

#include "paulimag/catalog.hpp"
#include "paulimag/error.hpp"
#include "paulimag/magnetics.hpp"
#include "paulimag/polytope.hpp"
#include "paulimag/thermostat.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

namespace paulimag::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Option values that do not parse are usage errors.
Rational arg_rational(const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

RationalVector arg_rational_list(const std::string& text) {
  try {
    return parse_rational_list(text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

Json rat(const Rational& q) { return Json{{"exact", to_string(q)}, {"decimal", to_double(q)}}; }

Json rat_list(const RationalVector& v) {
  Json out = Json::array();
  for (const auto& q : v) out.push_back(to_string(q));
  return out;
}

Json num_list(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Options shared by the commands that act on one constraint system.
struct SystemOptions {
  std::string shell = "d7-high";
  std::string system_file;

  void attach(CLI::App* app) {
    app->add_option("--shell", shell, "Shell: d7-high, d8-high, d7-low, d3-high, ...");
    app->add_option("--system-file", system_file, "Constraint table in the dump format");
  }

  ConstraintSystem load() const {
    if (!system_file.empty()) return parse_system(read_file(system_file));
    return load_catalog(parse_shell(shell));
  }
};

// Orbital occupancy selection: explicit list, symmetric families or a preset.
struct OrbitalOptions {
  std::string nu;
  std::string bcc_a;
  std::string fcc_a;
  bool spherical = false;
  std::string preset;

  void attach(CLI::App* app) {
    app->add_option("--nu", nu, "Orbital occupancies, comma separated (rationals allowed)");
    app->add_option("--bcc-a", bcc_a, "BCC t2g occupancy per orbital");
    app->add_option("--fcc-a", fcc_a, "FCC t2g occupancy per orbital");
    app->add_flag("--spherical", spherical, "Uniform occupancy N/5");
    app->add_option("--preset", preset, "Element preset: fe, co, ni");
  }

  bool given() const { return !nu.empty() || !bcc_a.empty() || !fcc_a.empty() || spherical || !preset.empty(); }

  OccupancyVector resolve(const ShellConfig& shell) const {
    int chosen = (!nu.empty()) + (!bcc_a.empty()) + (!fcc_a.empty()) + spherical + (!preset.empty());
    if (chosen != 1) throw UsageError("give exactly one of --nu, --bcc-a, --fcc-a, --spherical, --preset");
    if (!nu.empty()) return OccupancyVector::orbital(arg_rational_list(nu));
    if (!bcc_a.empty()) return symmetry_occupancy(shell, {SymmetryKind::BCC, {{"a", arg_rational(bcc_a)}}});
    if (!fcc_a.empty()) return symmetry_occupancy(shell, {SymmetryKind::FCC, {{"a", arg_rational(fcc_a)}}});
    if (spherical) return OccupancyVector::spherical(shell.electron_count, shell.orbital_dim);
    return preset_occupancy(load_preset(preset));
  }

  static OccupancyVector preset_occupancy(const ElementPreset& p) {
    const auto& occ = p.occupancies;
    if (p.structure == "bcc") return OccupancyVector::bcc(occ.at("a").value, 7);
    if (p.structure == "fcc") return OccupancyVector::fcc(occ.at("n_t").value / 3, 8);
    if (p.structure == "hexagonal") {
      const auto& b = occ.at("b").value;
      const auto& c = occ.at("c").value;
      return OccupancyVector::orbital({occ.at("a").value, b, b, c, c});
    }
    throw Error(ErrorCode::Parse, "preset structure '" + p.structure + "' has no occupancy rule");
  }
};

Json row_json(const Inequality& row) {
  Json j;
  j["origin"] = row.origin;
  j["orbital"] = rat_list(row.orbital);
  j["spin"] = rat_list(row.spin);
  j["sense"] = row.sense == Sense::Equal ? "=" : "<=";
  j["bound"] = to_string(row.bound);
  j["text"] = to_string(row);
  return j;
}

std::string halfspace_text(const Halfspace& h, const std::vector<std::string>& names, const std::string& sense) {
  std::ostringstream s;
  bool first = true;
  for (std::size_t i = 0; i < h.normal.size(); ++i) {
    const Rational& c = h.normal[i];
    if (c.is_zero()) continue;
    Rational mag = c < 0 ? Rational(-c) : c;
    if (first) {
      if (c < 0) s << "-";
    } else {
      s << (c < 0 ? " - " : " + ");
    }
    if (mag != 1) s << to_string(mag) << "*";
    s << (i < names.size() ? names[i] : "x" + std::to_string(i + 1));
    first = false;
  }
  if (first) s << "0";
  s << " " << sense << " " << to_string(h.bound);
  return s.str();
}

Json polytope_json(const Polytope& poly) {
  Json j;
  j["variables"] = poly.variables;
  Json rows = Json::array();
  for (const auto& h : poly.inequalities) {
    rows.push_back({{"label", h.label}, {"normal", rat_list(h.normal)}, {"bound", to_string(h.bound)},
                    {"text", halfspace_text(h, poly.variables, "<=")}});
  }
  j["inequalities"] = rows;
  Json eqs = Json::array();
  for (const auto& h : poly.equalities) {
    eqs.push_back({{"label", h.label}, {"normal", rat_list(h.normal)}, {"bound", to_string(h.bound)},
                   {"text", halfspace_text(h, poly.variables, "=")}});
  }
  j["equalities"] = eqs;
  return j;
}

Json bound_json(const MomentBound& b) {
  Json j;
  j["value"] = rat(b.value);
  j["argmax"] = rat_list(b.argmax);
  Json cert = Json::array();
  for (const auto& row : b.certificate) cert.push_back({{"row", row.label}, {"multiplier", to_string(row.multiplier)}});
  j["certificate"] = cert;
  j["certificate_verified"] = b.certificate_verified;
  j["tight_bounds"] = b.tight_bounds;
  return j;
}

Json state_json(const ThermalState& s, const ThermalFacets& facets) {
  Json j;
  j["beta"] = s.beta;
  j["mu"] = num_list(s.mu);
  Json labels = Json::array();
  for (std::size_t k : s.active) labels.push_back(facets.labels[k]);
  j["active"] = labels;
  j["multipliers"] = num_list(s.multipliers);
  j["regime"] = s.regime;
  j["moment"] = s.moment;
  j["entropy"] = s.entropy;
  j["residual"] = s.residual;
  return j;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2) throw UsageError("--points must be at least 2");
  std::vector<double> out;
  for (std::size_t i = 0; i < points; ++i) out.push_back(lo + (hi - lo) * static_cast<double>(i) / (points - 1));
  return out;
}

Rational resolve_a(const std::string& a, const std::string& preset) {
  if (!a.empty() && !preset.empty()) throw UsageError("give --a or --preset, not both");
  if (!a.empty()) return arg_rational(a);
  if (!preset.empty()) {
    ElementPreset p = load_preset(preset);
    if (!p.occupancies.count("a") || p.structure != "bcc") throw UsageError("preset has no BCC t2g occupancy");
    return p.occupancies.at("a").value;
  }
  throw UsageError("--a or --preset is required");
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(12) << x;
  return s.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spin-orbital Pauli constraints: moment bounds, polytopes and constrained thermal statistics"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "json";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  std::function<Json()> action;
  std::function<void()> csv_action;

  // catalog
  SystemOptions catalog_sys;
  bool catalog_dump = false;
  auto* catalog = app.add_subcommand("catalog", "Show a constraint table, its checksum and the cubicle check");
  catalog_sys.attach(catalog);
  catalog->add_flag("--dump", catalog_dump, "Print the table text instead of JSON");
  catalog->callback([&] {
    ConstraintSystem system = catalog_sys.load();
    if (catalog_dump) {
      csv_action = [&, system] { out << dump_system(system); };
      return;
    }
    action = [&, system] {
      Json j;
      j["shell"] = system.shell.name();
      j["rows"] = system.inequalities.size();
      j["equalities"] = system.equalities.size();
      std::string key = system.shell.name();
      std::replace(key.begin(), key.end(), '-', '_');
      if (catalog_sys.system_file.empty()) {
        try {
          j["checksum"] = hex(table_checksum(key));
        } catch (const Error&) {
        }
      }
      CubicleReport report = cubicle_self_check(system);
      Json groups = Json::array();
      for (const auto& g : report.groups) {
        groups.push_back({{"cubicle", g.label}, {"rows", g.rows}, {"keys", g.keys}, {"outliers", g.outliers}});
      }
      j["cubicles"] = groups;
      j["cubicles_consistent"] = report.consistent();
      Json rows = Json::array();
      for (const auto& row : system.inequalities) rows.push_back(row_json(row));
      for (const auto& row : system.equalities) rows.push_back(row_json(row));
      j["table"] = rows;
      return j;
    };
  });

  // dual
  SystemOptions dual_sys;
  auto* dual = app.add_subcommand("dual", "Particle-hole dual of a table (printed in the dump format)");
  dual_sys.attach(dual);
  dual->callback([&] {
    ConstraintSystem system = particle_hole_dual(dual_sys.load());
    csv_action = [&, system] { out << dump_system(system); };
  });

  // specialize
  SystemOptions spec_sys;
  std::string spec_kind = "bcc";
  std::string spec_a, spec_b, spec_c, spec_nu;
  auto* spec = app.add_subcommand("specialize", "Substitute a symmetric orbital occupancy and drop redundant rows");
  spec_sys.attach(spec);
  spec->add_option("--symmetry", spec_kind, "bcc, fcc, spherical, hexagonal, free");
  spec->add_option("--a", spec_a, "t2g (BCC/FCC) or a_g (hexagonal) occupancy; omit for symbolic BCC/FCC");
  spec->add_option("--b", spec_b, "hexagonal e_g occupancy");
  spec->add_option("--c", spec_c, "hexagonal e_g' occupancy");
  spec->add_option("--nu", spec_nu, "free: orbital occupancies");
  spec->callback([&] {
    action = [&] {
      ConstraintSystem system = spec_sys.load();
      SymmetrySpec sym;
      sym.kind = parse_symmetry_kind(spec_kind);
      if (!spec_a.empty()) sym.parameters["a"] = arg_rational(spec_a);
      if (!spec_b.empty()) sym.parameters["b"] = arg_rational(spec_b);
      if (!spec_c.empty()) sym.parameters["c"] = arg_rational(spec_c);
      if (!spec_nu.empty()) {
        RationalVector nu = arg_rational_list(spec_nu);
        for (std::size_t i = 0; i < nu.size(); ++i) sym.parameters["nu" + std::to_string(i + 1)] = nu[i];
      }
      SpecializedSystem s = specialize(system, sym);
      Json j;
      j["shell"] = s.shell.name();
      j["symmetry"] = to_string(s.symmetry.kind);
      j["symbolic"] = s.symbolic;
      Json rows = Json::array();
      if (s.symbolic) {
        j["domain"] = {to_string(s.domain_min), to_string(s.domain_max)};
        auto reference = bcc_reference_rows();
        for (const auto& row : s.parametric_rows) {
          Json r{{"origin", row.origin}, {"constant", rat_list(row.constant)}, {"slope", rat_list(row.slope)}};
          if (s.symmetry.kind == SymmetryKind::BCC && s.shell == d_shell(7)) {
            for (std::size_t k = 0; k < reference.size(); ++k) {
              if (same_up_to_scaling(row, reference[k])) r["reference_index"] = k + 1;
            }
          }
          rows.push_back(r);
        }
      } else {
        for (const auto& row : s.rows) rows.push_back(row_json(row));
      }
      j["rows"] = rows;
      j["count"] = rows.size();
      return j;
    };
  });

  // bound / floor
  SystemOptions bound_sys, floor_sys;
  OrbitalOptions bound_nu, floor_nu;
  auto* bound = app.add_subcommand("bound", "Maximum moment at fixed orbital occupancies");
  bound_sys.attach(bound);
  bound_nu.attach(bound);
  auto* floor = app.add_subcommand("floor", "Minimum moment at fixed orbital occupancies");
  floor_sys.attach(floor);
  floor_nu.attach(floor);
  auto make_bound = [&](SystemOptions& sys, OrbitalOptions& orb, bool upper) {
    return [&, upper] {
      ConstraintSystem system = sys.load();
      if (!orb.preset.empty() && sys.system_file.empty()) system = load_catalog(parse_shell(load_preset(orb.preset).shell));
      OccupancyVector nu = orb.resolve(system.shell);
      MomentBound b = upper ? moment_bound(system, nu) : moment_floor(system, nu);
      Json j;
      j["shell"] = system.shell.name();
      j["nu"] = rat_list(nu.values);
      j[upper ? "bound" : "floor"] = bound_json(b);
      return j;
    };
  };
  bound->callback([&] { action = make_bound(bound_sys, bound_nu, true); });
  floor->callback([&] { action = make_bound(floor_sys, floor_nu, false); });

  // project
  SystemOptions proj_sys;
  bool proj_moment = true;
  auto* proj = app.add_subcommand("project", "Eliminate the spin variables, keeping the moment M");
  proj_sys.attach(proj);
  proj->add_flag("--moment,!--no-moment", proj_moment, "Introduce M = m.mu before eliminating mu");
  proj->callback([&] {
    action = [&] {
      ConstraintSystem system = proj_sys.load();
      std::size_t n = static_cast<std::size_t>(system.shell.orbital_dim);
      std::size_t k = system.shell.spin_multiplicity();
      std::vector<std::size_t> eliminate;
      for (std::size_t i = 0; i < k; ++i) eliminate.push_back(n + i);
      std::optional<DerivedVariable> derived;
      if (proj_moment) {
        DerivedVariable m;
        m.name = "M";
        m.coefficients.assign(n, Rational(0));
        for (const auto& c : MomentObjective::for_shell(system.shell).spin_coeffs) m.coefficients.push_back(c);
        derived = m;
      }
      Polytope poly = project_out(system, eliminate, derived);
      Json j = polytope_json(poly);
      j["shell"] = system.shell.name();
      return j;
    };
  });

  // vertices
  SystemOptions vert_sys;
  OrbitalOptions vert_nu;
  bool vert_optimal = false;
  auto* vert = app.add_subcommand("vertices", "Vertices of the spin polytope at fixed orbital occupancies");
  vert_sys.attach(vert);
  vert_nu.attach(vert);
  vert->add_flag("--optimal", vert_optimal, "Only the vertices of the moment-maximizing face");
  vert->callback([&] {
    action = [&] {
      ConstraintSystem system = vert_sys.load();
      OccupancyVector nu = vert_nu.resolve(system.shell);
      Polytope poly = spin_polytope(system, nu);
      auto vs = vert_optimal ? optimal_face_vertices(poly, MomentObjective::for_shell(system.shell).spin_coeffs)
                             : enumerate_vertices(poly);
      Json list = Json::array();
      for (const auto& v : vs) list.push_back(rat_list(v));
      return Json{{"shell", system.shell.name()}, {"nu", rat_list(nu.values)}, {"vertices", list}, {"count", vs.size()}};
    };
  });

  // volume
  SystemOptions vol_sys;
  OrbitalOptions vol_nu;
  bool vol_zero = false;
  auto* vol = app.add_subcommand("volume", "Exact polytope volume");
  vol_sys.attach(vol);
  vol_nu.attach(vol);
  vol->add_flag("--zero-moment-fraction", vol_zero, "Volume fraction of d7 orbital occupancies allowing M = 0");
  vol->callback([&] {
    action = [&] {
      if (vol_zero) {
        VolumeFraction f = zero_moment_fraction();
        return Json{{"region", rat(f.region)}, {"reference", rat(f.reference)}, {"fraction", rat(f.fraction)}};
      }
      ConstraintSystem system = vol_sys.load();
      Polytope poly = vol_nu.given() ? spin_polytope(system, vol_nu.resolve(system.shell)) : to_polytope(system);
      VolumeResult v = volume(poly);
      Json chart = Json::array();
      for (std::size_t c : v.chart) chart.push_back(poly.variables.at(c));
      return Json{{"volume", rat(v.value)}, {"affine_dimension", v.affine_dimension},
                  {"full_dimensional", v.full_dimensional}, {"chart", chart}};
    };
  });

  // diagram
  std::string diag_lo = "7/5", diag_hi = "5/3";
  auto* diag = app.add_subcommand("diagram", "Admissible (a, M) region for BCC d7");
  diag->add_option("--a-min", diag_lo, "Smallest t2g occupancy");
  diag->add_option("--a-max", diag_hi, "Largest t2g occupancy");
  diag->callback([&] {
    action = [&] {
      IronDiagram d = iron_diagram(arg_rational(diag_lo), arg_rational(diag_hi));
      Json j;
      Json vs = Json::array();
      for (const auto& v : d.vertices) vs.push_back({{"label", v.label}, {"a", rat(v.a)}, {"M", rat(v.moment)}});
      j["vertices"] = vs;
      auto segs = [](const std::vector<DiagramSegment>& list) {
        Json out = Json::array();
        for (const auto& s : list) {
          out.push_back({{"from", s.from}, {"to", s.to}, {"a_range", {to_string(s.a_from), to_string(s.a_to)}},
                         {"intercept", to_string(s.intercept)}, {"slope", to_string(s.slope)},
                         {"mu_constant", rat_list(s.mu_constant)}, {"mu_slope", rat_list(s.mu_slope)}});
        }
        return out;
      };
      j["upper"] = segs(d.upper);
      j["lower"] = segs(d.lower);
      return j;
    };
  });

  // cobalt
  std::string co_a, co_b, co_c, co_morb;
  bool co_preset = false, co_uncertainty = false;
  auto* co = app.add_subcommand("cobalt", "Moment bound over orbital-moment splittings of hexagonal cobalt");
  co->add_option("--a", co_a, "a_g occupancy");
  co->add_option("--b", co_b, "e_g occupancy per orbital");
  co->add_option("--c", co_c, "e_g' occupancy per orbital");
  co->add_option("--m-orb", co_morb, "Orbital moment");
  co->add_flag("--preset", co_preset, "Use the cobalt preset occupancies and orbital moment");
  co->add_flag("--uncertainty", co_uncertainty, "Report the bound range over the preset uncertainty box");
  co->callback([&] {
    action = [&] {
      Rational a, b, c, morb;
      std::optional<CobaltUncertainty> box;
      if (co_preset) {
        ElementPreset p = load_preset("co");
        a = p.occupancies.at("a").value;
        b = p.occupancies.at("b").value;
        c = p.occupancies.at("c").value;
        morb = p.moment_orbital;
        if (co_uncertainty) {
          box = CobaltUncertainty{p.occupancies.at("a").uncertainty, p.occupancies.at("b").uncertainty,
                                  p.occupancies.at("c").uncertainty};
        }
      } else {
        if (co_a.empty() || co_b.empty() || co_c.empty() || co_morb.empty()) {
          throw UsageError("--a, --b, --c and --m-orb are required without --preset");
        }
        a = arg_rational(co_a);
        b = arg_rational(co_b);
        c = arg_rational(co_c);
        morb = arg_rational(co_morb);
      }
      CobaltResult r = cobalt_bound(a, b, c, morb, box);
      auto case_json = [](const CobaltCase& k) {
        return Json{{"case", k.name}, {"epsilon", rat(k.epsilon)}, {"delta", rat(k.delta)}, {"bound", rat(k.bound)},
                    {"nu", rat_list(k.nu)}};
      };
      Json j;
      j["best"] = case_json(r.best);
      Json cases = Json::array();
      for (const auto& k : r.cases) cases.push_back(case_json(k));
      j["cases"] = cases;
      if (r.image) j["image"] = {{"lo", rat(r.image->lo)}, {"hi", rat(r.image->hi)}};
      return j;
    };
  });

  // nickel
  OrbitalOptions ni_nu;
  auto* ni = app.add_subcommand("nickel", "Closed-form d8 bounds at the given occupancies");
  ni_nu.attach(ni);
  ni->callback([&] {
    action = [&] {
      OccupancyVector nu = ni_nu.given() ? ni_nu.resolve(d_shell(8)) : OrbitalOptions::preset_occupancy(load_preset("ni"));
      NickelBounds r = nickel_bounds(nu);
      Json rows = Json::array();
      for (const auto& q : r.rows) rows.push_back(rat(q));
      return Json{{"nu", rat_list(nu.values)},
                  {"rows", rows},
                  {"minimum", rat(r.minimum)},
                  {"attaining_row", r.attaining_row},
                  {"attribution_differs_from_first", r.attribution_differs_from_first},
                  {"lp_value", rat(r.lp_value)},
                  {"agrees_with_lp", r.agrees_with_lp}};
    };
  });

  // check
  SystemOptions check_sys;
  OrbitalOptions check_nu;
  std::string check_mu;
  std::string check_free;
  auto* check = app.add_subcommand("check", "Feasibility of (nu, mu) and spin-independence criteria");
  check_sys.attach(check);
  check_nu.attach(check);
  check->add_option("--mu", check_mu, "Spin occupancies");
  check->add_option("--free-spin", check_free, "nu1 for the free-spin test of d7 high");
  check->callback([&] {
    action = [&] {
      if (!check_free.empty()) {
        FreeSpinCheck f = free_spin_check(arg_rational(check_free));
        Json ex = Json::array();
        for (const auto& v : f.excluded) ex.push_back(rat_list(v));
        return Json{{"nu", rat_list(f.nu.values)}, {"ordered", f.ordered}, {"free", f.free}, {"excluded", ex}};
      }
      ConstraintSystem system = check_sys.load();
      OccupancyVector nu = check_nu.resolve(system.shell);
      Json j;
      j["shell"] = system.shell.name();
      j["nu"] = rat_list(nu.values);
      if (!check_mu.empty()) {
        SystemCheck c = feasible(system, nu, OccupancyVector::spin(arg_rational_list(check_mu)));
        j["feasible"] = c.feasible;
        j["violated"] = c.violated;
      }
      SpinIndependence s = spin_independence_check(system.shell, nu);
      j["spin_independence"] = {{"consistent", s.consistent}, {"collapse", s.collapse},
                                {"quantity", rat(s.quantity)}, {"violated", s.violated}};
      return j;
    };
  });

  // evolve
  std::string ev_a, ev_preset;
  double ev_max = 2.0;
  std::size_t ev_points = 201;
  auto* ev = app.add_subcommand("evolve", "Constrained Gibbs trajectory for BCC d7");
  ev->add_option("--a", ev_a, "t2g occupancy per orbital");
  ev->add_option("--preset", ev_preset, "Take a from an element preset");
  ev->add_option("--beta-max", ev_max, "Largest inverse temperature")->capture_default_str();
  ev->add_option("--points", ev_points, "Grid points on [0, beta-max]")->capture_default_str();
  ev->callback([&] {
    action = [&] {
      Rational a = resolve_a(ev_a, ev_preset);
      Trajectory t = evolve(a, linear_grid(0, ev_max, ev_points));
      Json j;
      j["a"] = rat(a);
      try {
        CriticalBetas c = critical_betas(a);
        j["critical"] = {{"beta1", c.beta1}, {"beta2", c.beta2}};
      } catch (const Error&) {
      }
      Json acts = Json::array();
      for (const auto& act : t.activations) {
        Json x{{"beta", act.beta}, {"facet", act.label}, {"regime", act.regime}};
        if (act.reference_index) x["reference_index"] = *act.reference_index;
        acts.push_back(x);
      }
      j["activations"] = acts;
      Json states = Json::array();
      for (const auto& s : t.states) states.push_back(state_json(s, t.facets));
      j["states"] = states;
      return j;
    };
    csv_action = [&] {
      Rational a = resolve_a(ev_a, ev_preset);
      Trajectory t = evolve(a, linear_grid(0, ev_max, ev_points));
      std::vector<std::vector<std::string>> rows;
      for (const auto& s : t.states) {
        rows.push_back({fmt(s.beta), fmt(s.mu[0]), fmt(s.mu[1]), fmt(s.mu[2]), fmt(s.mu[3]), fmt(s.moment),
                        fmt(s.entropy), std::to_string(s.regime)});
      }
      write_csv(out, {"beta", "mu1", "mu2", "mu3", "mu4", "moment", "entropy", "regime"}, rows);
    };
  });

  // curve
  std::string cu_a, cu_preset, cu_data;
  std::size_t cu_points = 200;
  double cu_tmax = 1.05;
  std::optional<double> cu_sat;
  auto* cu = app.add_subcommand("curve", "Self-consistent Weiss magnetization curve for BCC d7");
  cu->add_option("--a", cu_a, "t2g occupancy per orbital");
  cu->add_option("--preset", cu_preset, "Take a from an element preset");
  cu->add_option("--points", cu_points, "Reduced temperatures on (0, t-max]")->capture_default_str();
  cu->add_option("--t-max", cu_tmax, "Largest reduced temperature")->capture_default_str();
  cu->add_option("--saturation", cu_sat, "Moment used for M/M_sat (default: the constrained maximum)");
  cu->add_option("--data", cu_data, "Measured M/M_sat versus T (CSV) for the Kelvin conversion");
  auto curve_compute = [&] {
    Rational a = resolve_a(cu_a, cu_preset);
    std::vector<double> grid = linear_grid(0, cu_tmax, cu_points + 1);
    grid.erase(grid.begin());
    WeissOptions opts;
    opts.saturation = cu_sat;
    return std::make_pair(a, weiss_curve(a, grid, opts));
  };
  auto curve_summary = [&](const WeissCurve& w) {
    Json s{{"beta1", w.beta1}, {"beta2", w.beta2}, {"M1_over_Msat", w.m1}, {"M2_over_Msat", w.m2},
           {"t1", w.t1}, {"t2", w.t2}, {"M_sat", w.saturation}};
    if (!cu_data.empty()) {
      CrossoverTemperatures t = crossover_temperatures(w.m1, w.m2, load_data_series(cu_data));
      s["T1_kelvin"] = t.t1_kelvin;
      s["T2_kelvin"] = t.t2_kelvin;
    }
    return s;
  };
  cu->callback([&] {
    action = [&] {
      auto [a, w] = curve_compute();
      Json j;
      j["a"] = rat(a);
      j["summary"] = curve_summary(w);
      Json pts = Json::array();
      for (std::size_t i = 0; i < w.constrained.size(); ++i) {
        const auto& p = w.constrained[i];
        Json x{{"t_reduced", p.t_reduced}, {"m_reduced", p.m_reduced}, {"beta", p.beta}, {"regime", p.regime},
               {"m_unconstrained", w.unconstrained[i].m_reduced}};
        if (!p.marker.empty()) x["crossover"] = p.marker;
        if (!p.converged) x["converged"] = false;
        pts.push_back(x);
      }
      j["points"] = pts;
      return j;
    };
    csv_action = [&] {
      auto [a, w] = curve_compute();
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < w.constrained.size(); ++i) {
        const auto& p = w.constrained[i];
        rows.push_back({fmt(p.t_reduced), fmt(p.m_reduced), fmt(p.beta), std::to_string(p.regime),
                        fmt(w.unconstrained[i].m_reduced), p.marker});
      }
      write_csv(out, {"t_reduced", "m_reduced", "beta", "regime", "m_unconstrained", "crossover"}, rows);
      out << "# summary " << curve_summary(w).dump() << "\n";
    };
  });

  // crossover
  std::string cr_a, cr_preset, cr_data;
  std::optional<double> cr_m1, cr_m2;
  auto* cr = app.add_subcommand("crossover", "Convert the critical reduced moments to temperatures");
  cr->add_option("--a", cr_a, "t2g occupancy per orbital");
  cr->add_option("--preset", cr_preset, "Take a from an element preset");
  cr->add_option("--m1", cr_m1, "M1/M_sat (instead of computing it from a)");
  cr->add_option("--m2", cr_m2, "M2/M_sat");
  cr->add_option("--data", cr_data, "Measured M/M_sat versus T (CSV)")->required();
  cr->callback([&] {
    action = [&] {
      double m1, m2;
      if (cr_m1 && cr_m2) {
        m1 = *cr_m1;
        m2 = *cr_m2;
      } else {
        WeissCurve w = weiss_curve(resolve_a(cr_a, cr_preset), {});
        m1 = w.m1;
        m2 = w.m2;
      }
      CrossoverTemperatures t = crossover_temperatures(m1, m2, load_data_series(cr_data));
      return Json{{"M1_over_Msat", m1}, {"M2_over_Msat", m2}, {"T1_kelvin", t.t1_kelvin}, {"T2_kelvin", t.t2_kelvin}};
    };
  });

  // baseline
  std::string bl_data;
  std::optional<double> bl_lo, bl_hi, bl_feature_lo, bl_feature_hi;
  auto* bl = app.add_subcommand("baseline", "Quadratic baseline fit y ~ a2 T^2 + a0 and its residual");
  bl->add_option("--data", bl_data, "Series CSV")->required();
  bl->add_option("--fit-min", bl_lo, "Lowest temperature used in the fit");
  bl->add_option("--fit-max", bl_hi, "Highest temperature used in the fit");
  bl->add_option("--feature-min", bl_feature_lo, "Window for the largest residual-slope change");
  bl->add_option("--feature-max", bl_feature_hi, "Upper end of the feature window");
  bl->callback([&] {
    action = [&] {
      DataSeries data = load_data_series(bl_data, "susceptibility");
      QuadraticFit fit = fit_quadratic_baseline(data, bl_lo, bl_hi);
      Json j{{"a2", fit.a2}, {"a0", fit.a0}};
      Json res = Json::array();
      for (std::size_t i = 0; i < fit.residual.x.size(); ++i) res.push_back({fit.residual.x[i], fit.residual.y[i]});
      j["residual"] = res;
      if (fit.residual.x.size() >= 3) j["slope_change_at"] = largest_slope_change(fit.residual, bl_feature_lo, bl_feature_hi);
      return j;
    };
    csv_action = [&] {
      DataSeries data = load_data_series(bl_data, "susceptibility");
      QuadraticFit fit = fit_quadratic_baseline(data, bl_lo, bl_hi);
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < data.x.size(); ++i) {
        rows.push_back({fmt(data.x[i]), fmt(data.y[i]), fmt(fit.a2 * data.x[i] * data.x[i] + fit.a0),
                        fmt(fit.residual.y[i])});
      }
      write_csv(out, {"T_kelvin", "value", "baseline", "residual"}, rows);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (format == "csv" && csv_action) {
      csv_action();
    } else if (action) {
      out << action().dump(2) << "\n";
    } else if (csv_action) {
      csv_action();
    }
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << Json{{"error", std::string(error_code_name(e.code()))}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}

}  // namespace paulimag::cli
