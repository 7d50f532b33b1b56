#include "paulimag/catalog.hpp"

#include "paulimag/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace paulimag {

namespace detail {
const std::map<std::string, std::string>& embedded_tables();
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  parts.push_back(current);
  return parts;
}

std::string trim(std::string_view text) {
  std::size_t start = text.find_first_not_of(" \t\r");
  if (start == std::string_view::npos) return {};
  std::size_t end = text.find_last_not_of(" \t\r");
  return std::string(text.substr(start, end - start + 1));
}

RationalVector parse_fields(const std::string& text) {
  RationalVector values;
  std::istringstream in(text);
  std::string token;
  while (in >> token) values.push_back(parse_rational(token));
  return values;
}

std::string join(const RationalVector& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += to_string(values[i]);
  }
  return out;
}

std::string sector_word(SpinSector sector) {
  switch (sector) {
    case SpinSector::High:
      return "high";
    case SpinSector::Low:
      return "low";
    case SpinSector::Polarized:
      return "polarized";
  }
  return "high";
}

SpinSector parse_sector(const std::string& word) {
  if (word == "high") return SpinSector::High;
  if (word == "low") return SpinSector::Low;
  if (word == "polarized") return SpinSector::Polarized;
  throw Error(ErrorCode::Parse, "unknown spin sector '" + word + "'");
}

Inequality make_row(std::size_t n, std::size_t k) {
  Inequality row;
  row.orbital.assign(n, Rational(0));
  row.spin.assign(k, Rational(0));
  row.bound = 0;
  return row;
}

std::string cubicle_of(const std::string& origin) {
  auto dot = origin.find('.');
  return dot == std::string::npos ? std::string() : origin.substr(0, dot);
}

ConstraintSystem degenerate_high(int n_electrons) {
  ConstraintSystem system;
  system.shell = d_shell(n_electrons, SpinSector::High);
  const std::size_t k = system.shell.spin_multiplicity();
  auto equality = [&](const std::string& origin) {
    Inequality row = make_row(5, k);
    row.sense = Sense::Equal;
    row.origin = origin;
    return row;
  };
  switch (n_electrons) {
    case 1:
      for (std::size_t i = 0; i < 2; ++i) {
        Inequality row = equality("E1." + std::to_string(i + 1));
        row.spin[i] = 1;
        row.orbital[i] = -1;
        system.equalities.push_back(row);
      }
      for (std::size_t i = 2; i < 5; ++i) {
        Inequality row = equality("E1." + std::to_string(i + 1));
        row.orbital[i] = 1;
        system.equalities.push_back(row);
      }
      system.witness_orbital = {Rational(1, 2), Rational(1, 2), 0, 0, 0};
      system.witness_spin = {Rational(1, 2), Rational(1, 2)};
      break;
    case 4:
      for (std::size_t i = 0; i < 5; ++i) {
        Inequality row = equality("E1." + std::to_string(i + 1));
        row.spin[i] = 1;
        row.orbital[4 - i] = 1;
        row.bound = 1;
        system.equalities.push_back(row);
      }
      system.witness_orbital = {1, 1, 1, 1, 0};
      system.witness_spin = {1, 0, 0, 0, 0};
      break;
    case 5: {
      Inequality mu = equality("E1.1");
      mu.spin[0] = 1;
      mu.bound = 1;
      Inequality nu = equality("E1.2");
      nu.orbital[0] = 1;
      nu.bound = 5;
      system.equalities = {mu, nu};
      system.orbital_cap.reset();
      system.witness_orbital = {5, 0, 0, 0, 0};
      system.witness_spin = {1, 0, 0, 0, 0, 0};
      break;
    }
    case 6:
      for (std::size_t i = 0; i < 5; ++i) {
        Inequality row = equality("E1." + std::to_string(i + 1));
        row.spin[i] = 1;
        row.orbital[i] = -1;
        row.bound = -1;
        system.equalities.push_back(row);
      }
      system.witness_orbital = {2, 1, 1, 1, 1};
      system.witness_spin = {1, 0, 0, 0, 0};
      break;
    case 9:
      for (std::size_t i = 0; i < 2; ++i) {
        Inequality row = equality("E1." + std::to_string(i + 1));
        row.spin[i] = 1;
        row.orbital[4 - i] = 1;
        row.bound = 2;
        system.equalities.push_back(row);
      }
      for (std::size_t i = 0; i < 3; ++i) {
        Inequality row = equality("E1." + std::to_string(i + 3));
        row.orbital[i] = 1;
        row.bound = 2;
        system.equalities.push_back(row);
      }
      system.witness_orbital = {2, 2, 2, 2, 1};
      system.witness_spin = {1, 0};
      break;
    default:
      throw Error(ErrorCode::UnsupportedShell, "no degenerate table for d" + std::to_string(n_electrons));
  }
  return system;
}

ConstraintSystem embedded(const std::string& name) { return parse_system(table_text(name)); }

}  // namespace

const std::string& table_text(const std::string& name) {
  const auto& tables = detail::embedded_tables();
  auto it = tables.find(name);
  if (it == tables.end()) throw Error(ErrorCode::UnsupportedShell, "no embedded table '" + name + "'");
  return it->second;
}

std::uint64_t table_checksum(const std::string& name) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char ch : table_text(name)) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

ConstraintSystem load_catalog(const ShellConfig& shell) {
  if (shell.orbital_dim != 5) {
    throw Error(ErrorCode::UnsupportedShell, "only d-shells are catalogued, got " + shell.name());
  }
  const int n = shell.electron_count;
  if (shell.sector == SpinSector::Polarized) return load_spinless_catalog(n, 5);
  if (shell.sector == SpinSector::Low) {
    if (n != 7) throw Error(ErrorCode::UnsupportedShell, "low spin is only catalogued for d7");
    ConstraintSystem system = embedded("d7_low");
    system.witness_orbital = RationalVector(5, Rational(7, 5));
    system.witness_spin = {Rational(1, 2), Rational(1, 2)};
    return system;
  }
  switch (n) {
    case 7: {
      ConstraintSystem system = embedded("d7_high");
      system.witness_orbital = OccupancyVector::bcc(Rational(35, 24)).values;
      system.witness_spin = {Rational(11, 16), Rational(11, 48), Rational(1, 12), 0};
      return system;
    }
    case 8: {
      ConstraintSystem system = embedded("d8_high");
      system.witness_orbital = RationalVector(5, Rational(8, 5));
      system.witness_spin = {Rational(3, 5), Rational(1, 5), Rational(1, 5)};
      return system;
    }
    case 3:
      return particle_hole_dual(load_catalog(d_shell(7)));
    case 2:
      return particle_hole_dual(load_catalog(d_shell(8)));
    case 1:
    case 4:
    case 5:
    case 6:
    case 9:
      return degenerate_high(n);
    default:
      throw Error(ErrorCode::UnsupportedShell, "no table for " + shell.name());
  }
}

ConstraintSystem load_spinless_catalog(int electron_count, int orbital_dim) {
  const int n = orbital_dim;
  const int count = electron_count;
  if (n < 2 || count < 1 || count > 2 * n) {
    throw Error(ErrorCode::UnsupportedShell, "unsupported spinless shell (" + std::to_string(count) +
                                                 ", " + std::to_string(n) + ")");
  }
  ConstraintSystem system;
  system.shell.electron_count = count;
  system.shell.orbital_dim = n;
  system.shell.sector = SpinSector::Polarized;
  system.shell.total_spin = Rational(std::min(count, 2 * n - count), 2);
  system.orbital_cap = Rational(count <= n ? 1 : 2);
  const std::size_t dim = static_cast<std::size_t>(n);
  auto row_with = [&](std::initializer_list<int> ones, const Rational& bound, Sense sense,
                      const std::string& origin) {
    Inequality row = make_row(dim, 1);
    for (int i : ones) row.orbital[static_cast<std::size_t>(i - 1)] = 1;
    row.bound = bound;
    row.sense = sense;
    row.origin = origin;
    return row;
  };
  auto pair = [&](int i, int j, const std::string& origin) {
    Inequality row = make_row(dim, 1);
    row.orbital[static_cast<std::size_t>(i - 1)] = 1;
    row.orbital[static_cast<std::size_t>(j - 1)] = -1;
    row.sense = Sense::Equal;
    row.origin = origin;
    return row;
  };
  auto fixed = [&](int i, const Rational& value, const std::string& origin) {
    return row_with({i}, value, Sense::Equal, origin);
  };

  if (n == 5 && (count == 3 || count == 7 || count == 8)) {
    // (1,v2,v2,v4,v4), (v1,v1,v3,v3,1), (2,v2,v2,v4,v4)
    if (count == 7) {
      system.equalities = {pair(1, 2, "S1.1"), pair(3, 4, "S1.2"), fixed(5, 1, "S1.3")};
      system.witness_orbital = {Rational(3, 2), Rational(3, 2), Rational(3, 2), Rational(3, 2), 1};
    } else {
      system.equalities = {fixed(1, count == 3 ? 1 : 2, "S1.1"), pair(2, 3, "S1.2"), pair(4, 5, "S1.3")};
      system.witness_orbital = count == 3 ? RationalVector{1, Rational(1, 2), Rational(1, 2), Rational(1, 2),
                                                           Rational(1, 2)}
                                          : RationalVector{2, Rational(3, 2), Rational(3, 2), Rational(3, 2),
                                                           Rational(3, 2)};
    }
  } else if (count == 2) {
    for (int i = 1; i + 1 <= n; i += 2) {
      system.equalities.push_back(pair(i, i + 1, "S1." + std::to_string((i + 1) / 2)));
    }
    if (n % 2 == 1) system.equalities.push_back(fixed(n, 0, "S1." + std::to_string((n + 1) / 2)));
    system.witness_orbital.assign(dim, Rational(0));
    system.witness_orbital[0] = system.witness_orbital[1] = 1;
  } else if (count == 3 && n == 7) {
    system.inequalities = {row_with({2, 3, 4, 5}, 2, Sense::LessEqual, "S1.1"),
                           row_with({1, 3, 4, 6}, 2, Sense::LessEqual, "S1.2"),
                           row_with({1, 2, 4, 7}, 2, Sense::LessEqual, "S1.3"),
                           row_with({1, 2, 5, 6}, 2, Sense::LessEqual, "S1.4")};
    system.witness_orbital = {1, 1, 1, 0, 0, 0, 0};
  } else if (count == 3 && n % 2 == 0 && n >= 6) {
    for (int i = 1; i <= n / 2; ++i) {
      system.inequalities.push_back(
          row_with({i, n + 1 - i}, 1, Sense::LessEqual, "S1." + std::to_string(i)));
    }
    system.witness_orbital.assign(dim, Rational(0));
    for (std::size_t i = 0; i < 3; ++i) system.witness_orbital[i] = 1;
  } else {
    throw Error(ErrorCode::UnsupportedShell, "unsupported spinless shell (" + std::to_string(count) + ", " +
                                                 std::to_string(n) + ")");
  }
  system.witness_spin = {1};
  return system;
}

ConstraintSystem particle_hole_dual(const ConstraintSystem& system) {
  if (system.shell.orbital_dim != 5) {
    throw Error(ErrorCode::UnsupportedShell, "particle-hole duality is defined for d-shells");
  }
  ConstraintSystem out = system;
  out.shell.electron_count = 10 - system.shell.electron_count;
  auto flip = [](const Inequality& row) {
    Inequality r = row;
    const std::size_t n = row.orbital.size();
    for (std::size_t j = 0; j < n; ++j) r.orbital[j] = -row.orbital[n - 1 - j];
    r.bound = row.bound - 2 * sum(row.orbital);
    return r;
  };
  out.inequalities.clear();
  out.equalities.clear();
  for (const auto& row : system.inequalities) out.inequalities.push_back(flip(row));
  for (const auto& row : system.equalities) out.equalities.push_back(flip(row));
  if (!system.witness_orbital.empty()) {
    out.witness_orbital.clear();
    for (auto it = system.witness_orbital.rbegin(); it != system.witness_orbital.rend(); ++it) {
      out.witness_orbital.push_back(2 - *it);
    }
  }
  return out;
}

std::string dump_system(const ConstraintSystem& system) {
  std::ostringstream out;
  const auto& shell = system.shell;
  out << "# config " << shell.electron_count << ' ' << shell.orbital_dim << ' ' << sector_word(shell.sector)
      << ' ' << to_string(shell.total_spin) << '\n';
  out << "# shell " << shell.name() << '\n';
  out << "# ordered " << (system.ordered ? "yes" : "no") << '\n';
  out << "# cap " << (system.orbital_cap ? to_string(*system.orbital_cap) : std::string("none")) << '\n';
  if (!system.witness_orbital.empty()) out << "# witness nu " << join(system.witness_orbital) << '\n';
  if (!system.witness_spin.empty()) out << "# witness mu " << join(system.witness_spin) << '\n';
  std::string current = "\x01";
  auto emit = [&](const Inequality& row) {
    std::string cubicle = cubicle_of(row.origin);
    if (cubicle != current) {
      if (!cubicle.empty()) out << "# cubicle " << cubicle << '\n';
      current = cubicle;
    }
    out << join(row.orbital) << " | " << join(row.spin) << " | "
        << (row.sense == Sense::Equal ? "=" : "<=") << " | " << to_string(row.bound) << '\n';
  };
  for (const auto& row : system.inequalities) emit(row);
  for (const auto& row : system.equalities) emit(row);
  return out.str();
}

ConstraintSystem parse_system(std::string_view text) {
  ConstraintSystem system;
  bool have_shell = false;
  std::string cubicle;
  std::size_t in_cubicle = 0;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream in(line.substr(1));
      std::string key;
      in >> key;
      if (key == "shell") {
        std::string name;
        in >> name;
        if (!have_shell) system.shell = parse_shell(name);
        have_shell = true;
      } else if (key == "config") {
        int count = 0, dim = 0;
        std::string sector, spin;
        if (!(in >> count >> dim >> sector >> spin)) {
          throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": malformed config");
        }
        system.shell.electron_count = count;
        system.shell.orbital_dim = dim;
        system.shell.sector = parse_sector(sector);
        system.shell.total_spin = parse_rational(spin);
        have_shell = true;
      } else if (key == "ordered") {
        std::string flag;
        in >> flag;
        system.ordered = flag != "no";
      } else if (key == "cap") {
        std::string value;
        in >> value;
        if (value == "none") {
          system.orbital_cap.reset();
        } else {
          system.orbital_cap = parse_rational(value);
        }
      } else if (key == "witness") {
        std::string which, rest;
        in >> which;
        std::getline(in, rest);
        (which == "nu" ? system.witness_orbital : system.witness_spin) = parse_fields(rest);
      } else if (key == "cubicle") {
        in >> cubicle;
        in_cubicle = 0;
      }
      continue;
    }
    if (!have_shell) throw Error(ErrorCode::Parse, "table has no '# shell' header");
    auto fields = split(line, '|');
    if (fields.size() != 4) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 4 '|'-separated fields");
    }
    Inequality row;
    row.orbital = parse_fields(fields[0]);
    row.spin = parse_fields(fields[1]);
    std::string sense = trim(fields[2]);
    if (sense == "<=") {
      row.sense = Sense::LessEqual;
    } else if (sense == "=") {
      row.sense = Sense::Equal;
    } else {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": unknown sense '" + sense + "'");
    }
    row.bound = parse_rational(fields[3]);
    if (row.orbital.size() != static_cast<std::size_t>(system.shell.orbital_dim) ||
        row.spin.size() != system.shell.spin_multiplicity()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "line " + std::to_string(line_no) + ": row shape does not match " + system.shell.name());
    }
    ++in_cubicle;
    row.origin = cubicle.empty() ? "row " + std::to_string(line_no) : cubicle + "." + std::to_string(in_cubicle);
    (row.sense == Sense::Equal ? system.equalities : system.inequalities).push_back(std::move(row));
  }
  if (!have_shell) throw Error(ErrorCode::Parse, "table has no '# shell' header");
  return system;
}

bool CubicleReport::consistent() const {
  return std::all_of(groups.begin(), groups.end(), [](const CubicleGroup& g) { return g.outliers.empty(); });
}

CubicleReport cubicle_self_check(const ConstraintSystem& system) {
  using Key = std::tuple<RationalVector, RationalVector, Rational>;
  CubicleReport report;
  std::vector<std::pair<std::string, std::vector<const Inequality*>>> blocks;
  for (const auto& row : system.inequalities) {
    std::string label = cubicle_of(row.origin);
    if (blocks.empty() || blocks.back().first != label) blocks.push_back({label, {}});
    blocks.back().second.push_back(&row);
  }
  for (const auto& [label, rows] : blocks) {
    std::map<Key, std::size_t> counts;
    std::vector<Key> keys;
    for (const Inequality* row : rows) {
      RationalVector a = row->orbital, b = row->spin;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      keys.emplace_back(a, b, row->bound);
      ++counts[keys.back()];
    }
    auto majority = std::max_element(counts.begin(), counts.end(),
                                      [](const auto& x, const auto& y) { return x.second < y.second; });
    CubicleGroup group;
    group.label = label;
    group.rows = rows.size();
    group.keys = counts.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (keys[i] != majority->first) group.outliers.push_back(rows[i]->origin);
    }
    report.groups.push_back(std::move(group));
  }
  return report;
}

// --- specialization ---------------------------------------------------------

std::string to_string(SymmetryKind kind) {
  switch (kind) {
    case SymmetryKind::BCC:
      return "bcc";
    case SymmetryKind::FCC:
      return "fcc";
    case SymmetryKind::Spherical:
      return "spherical";
    case SymmetryKind::Hexagonal:
      return "hexagonal";
    case SymmetryKind::Free:
      return "free";
  }
  return "free";
}

SymmetryKind parse_symmetry_kind(const std::string& text) {
  for (SymmetryKind kind : {SymmetryKind::BCC, SymmetryKind::FCC, SymmetryKind::Spherical,
                            SymmetryKind::Hexagonal, SymmetryKind::Free}) {
    if (to_string(kind) == text) return kind;
  }
  throw Error(ErrorCode::Parse, "unknown symmetry '" + text + "'");
}

namespace {

const Rational& parameter(const SymmetrySpec& sym, const std::string& name) {
  auto it = sym.parameters.find(name);
  if (it == sym.parameters.end()) {
    throw Error(ErrorCode::InfeasibleSymmetry, "symmetry " + to_string(sym.kind) + " needs parameter '" + name + "'");
  }
  return it->second;
}

/// nu = u + v * a for the one-parameter cubic cases.
std::pair<RationalVector, RationalVector> affine_occupancy(const ShellConfig& shell, SymmetryKind kind) {
  const Rational half_n = Rational(shell.electron_count, 2);
  const Rational m32 = Rational(-3, 2);
  if (kind == SymmetryKind::BCC) {
    return {{0, 0, 0, half_n, half_n}, {1, 1, 1, m32, m32}};
  }
  return {{half_n, half_n, 0, 0, 0}, {m32, m32, 1, 1, 1}};
}

}  // namespace

OccupancyVector symmetry_occupancy(const ShellConfig& shell, const SymmetrySpec& sym) {
  const std::size_t n = static_cast<std::size_t>(shell.orbital_dim);
  RationalVector nu;
  switch (sym.kind) {
    case SymmetryKind::BCC:
    case SymmetryKind::FCC: {
      if (n != 5) throw Error(ErrorCode::InfeasibleSymmetry, "cubic symmetry needs a d-shell");
      auto [u, v] = affine_occupancy(shell, sym.kind);
      const Rational& a = parameter(sym, "a");
      for (std::size_t i = 0; i < 5; ++i) nu.push_back(u[i] + v[i] * a);
      break;
    }
    case SymmetryKind::Spherical:
      nu.assign(n, Rational(shell.electron_count, shell.orbital_dim));
      break;
    case SymmetryKind::Hexagonal: {
      if (n != 5) throw Error(ErrorCode::InfeasibleSymmetry, "hexagonal symmetry needs a d-shell");
      const Rational& a = parameter(sym, "a");
      const Rational& b = parameter(sym, "b");
      const Rational& c = parameter(sym, "c");
      nu = {a, b, b, c, c};
      break;
    }
    case SymmetryKind::Free:
      for (std::size_t i = 0; i < n; ++i) nu.push_back(parameter(sym, "nu" + std::to_string(i + 1)));
      std::sort(nu.begin(), nu.end(), [](const Rational& x, const Rational& y) { return x > y; });
      break;
  }
  for (std::size_t i = 0; i + 1 < nu.size(); ++i) {
    if (nu[i] < nu[i + 1]) {
      throw Error(ErrorCode::InfeasibleSymmetry, to_string(sym.kind) + " occupancy " + to_string(nu) +
                                                     " is not weakly decreasing");
    }
  }
  for (const auto& x : nu) {
    if (x < 0 || x > 2) {
      throw Error(ErrorCode::InfeasibleSymmetry, to_string(sym.kind) + " occupancy " + to_string(nu) +
                                                     " leaves the box [0,2]");
    }
  }
  if (sum(nu) != shell.electron_count) {
    throw Error(ErrorCode::InfeasibleSymmetry, to_string(sym.kind) + " occupancy " + to_string(nu) +
                                                   " does not sum to " + std::to_string(shell.electron_count));
  }
  return OccupancyVector::orbital(nu);
}

RationalVector ParametricRow::at(const Rational& a) const {
  RationalVector out(constant.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = constant[j] + slope[j] * a;
  return out;
}

Polytope SpecializedSystem::polytope(const std::optional<Rational>& a) const {
  const std::size_t k = shell.spin_multiplicity();
  Polytope poly;
  poly.dimension = k;
  for (std::size_t j = 0; j < k; ++j) poly.variables.push_back("mu" + std::to_string(j + 1));
  auto add = [&](const Inequality& row) {
    if (row.sense == Sense::Equal) {
      poly.add_equality(row.spin, row.bound, row.origin);
    } else {
      poly.add_inequality(row.spin, row.bound, row.origin);
    }
  };
  if (symbolic) {
    if (!a) throw Error(ErrorCode::Range, "symbolic specialization needs a parameter value");
    if (*a < domain_min || *a > domain_max) {
      throw Error(ErrorCode::Range, "a = " + to_string(*a) + " is outside [" + to_string(domain_min) + ", " +
                                        to_string(domain_max) + "]");
    }
    for (const auto& row : parametric_rows) poly.add_inequality(row.at(*a), Rational(0), row.origin);
  } else {
    for (const auto& row : rows) add(row);
  }
  for (const auto& row : structural) add(row);
  return poly;
}

namespace {

std::vector<Inequality> spin_structural_rows(const ConstraintSystem& system) {
  std::vector<Inequality> out;
  for (const auto& row : system.structural_rows()) {
    bool orbital_free = std::all_of(row.orbital.begin(), row.orbital.end(),
                                    [](const Rational& x) { return x.is_zero(); });
    if (!orbital_free) continue;
    Inequality r = row;
    r.orbital.clear();
    out.push_back(std::move(r));
  }
  return out;
}

/// True if row `target` (normal . mu <= bound) is implied by `others`.
bool implied(const Polytope& others, const RationalVector& normal, const Rational& bound) {
  LPResult r = lp_solve(others, normal, Direction::Maximize);
  if (r.status == LPStatus::Infeasible) return true;
  if (r.status == LPStatus::Unbounded) return false;
  return r.value <= bound;
}

Polytope base_polytope(std::size_t k, const std::vector<Inequality>& structural) {
  Polytope poly;
  poly.dimension = k;
  for (const auto& row : structural) {
    if (row.sense == Sense::Equal) {
      poly.add_equality(row.spin, row.bound, row.origin);
    } else {
      poly.add_inequality(row.spin, row.bound, row.origin);
    }
  }
  return poly;
}

void specialize_numeric(const ConstraintSystem& system, const OccupancyVector& nu, SpecializedSystem& out) {
  const std::size_t k = system.shell.spin_multiplicity();
  std::vector<Inequality> candidates;
  std::vector<Inequality> equalities;
  auto substitute = [&](const Inequality& row) {
    Inequality r;
    r.spin = row.spin;
    r.bound = row.bound - dot(row.orbital, nu.values);
    r.sense = row.sense;
    r.origin = row.origin;
    bool constant = std::all_of(r.spin.begin(), r.spin.end(), [](const Rational& x) { return x.is_zero(); });
    if (constant) {
      bool holds = r.sense == Sense::Equal ? r.bound.is_zero() : r.bound >= 0;
      if (!holds) {
        throw Error(ErrorCode::InfeasibleSymmetry,
                    "orbital occupancy " + to_string(nu.values) + " violates " + row.origin + " " + to_string(row));
      }
      return;
    }
    (r.sense == Sense::Equal ? equalities : candidates).push_back(std::move(r));
  };
  for (const auto& row : system.inequalities) substitute(row);
  for (const auto& row : system.equalities) substitute(row);

  Polytope base = base_polytope(k, out.structural);
  for (const auto& e : equalities) base.add_equality(e.spin, e.bound, e.origin);
  Polytope all = base;
  for (const auto& c : candidates) all.add_inequality(c.spin, c.bound, c.origin);
  if (!is_feasible(all)) {
    throw Error(ErrorCode::Infeasible, "no spin occupancy is compatible with nu = " + to_string(nu.values));
  }

  // Merge rows equal modulo the equalities, then drop the implied ones.
  std::vector<Inequality> unique;
  std::set<RationalVector> seen;
  for (const auto& c : candidates) {
    Halfspace h = canonical_row(Halfspace{c.spin, c.bound, c.origin}, base.equalities);
    RationalVector key = h.normal;
    key.push_back(h.bound);
    if (seen.insert(key).second) unique.push_back(c);
  }
  std::vector<bool> alive(unique.size(), true);
  for (std::size_t i = 0; i < unique.size(); ++i) {
    Polytope others = base;
    for (std::size_t j = 0; j < unique.size(); ++j) {
      if (j != i && alive[j]) others.add_inequality(unique[j].spin, unique[j].bound, unique[j].origin);
    }
    if (implied(others, unique[i].spin, unique[i].bound)) alive[i] = false;
  }
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (alive[i]) out.rows.push_back(unique[i]);
  }
  out.rows.insert(out.rows.end(), equalities.begin(), equalities.end());
}

void specialize_symbolic(const ConstraintSystem& system, SpecializedSystem& out, std::size_t grid_points) {
  if (!system.equalities.empty()) {
    throw Error(ErrorCode::UnsupportedShell, "symbolic specialization needs an inequality-only table");
  }
  const std::size_t k = system.shell.spin_multiplicity();
  auto [u, v] = affine_occupancy(system.shell, out.symmetry.kind);

  // Conditions p + q a <= 0 on the parameter.
  std::vector<std::pair<Rational, Rational>> conditions;
  std::vector<ParametricRow> candidates;
  for (const auto& row : system.inequalities) {
    const Rational r0 = row.bound - dot(row.orbital, u);
    const Rational r1 = -dot(row.orbital, v);
    bool uniform = std::all_of(row.spin.begin(), row.spin.end(), [&](const Rational& x) { return x == row.spin[0]; });
    if (uniform) {
      conditions.emplace_back(row.spin[0] - r0, -r1);
      continue;
    }
    ParametricRow p;
    p.origin = row.origin;
    for (std::size_t j = 0; j < k; ++j) {
      p.constant.push_back(row.spin[j] - r0);
      p.slope.push_back(-r1);
    }
    candidates.push_back(std::move(p));
  }
  for (const auto& row : system.structural_rows()) {
    if (row.sense == Sense::Equal) continue;
    bool spin_free = std::all_of(row.spin.begin(), row.spin.end(), [](const Rational& x) { return x.is_zero(); });
    if (!spin_free) continue;
    conditions.emplace_back(dot(row.orbital, u) - row.bound, dot(row.orbital, v));
  }

  std::optional<Rational> lo, hi;
  for (const auto& [p, q] : conditions) {
    if (q.is_zero()) {
      if (p > 0) throw Error(ErrorCode::InfeasibleSymmetry, "symmetry is incompatible with " + system.shell.name());
      continue;
    }
    Rational edge = -p / q;
    if (q > 0) {
      if (!hi || edge < *hi) hi = edge;
    } else {
      if (!lo || edge > *lo) lo = edge;
    }
  }
  if (!lo || !hi || *lo > *hi) {
    throw Error(ErrorCode::InfeasibleSymmetry, to_string(out.symmetry.kind) + " has an empty parameter domain for " +
                                                   system.shell.name());
  }
  out.domain_min = *lo;
  out.domain_max = *hi;

  std::vector<ParametricRow> unique;
  std::set<RationalVector> seen;
  for (const auto& c : candidates) {
    RationalVector key = c.constant;
    key.insert(key.end(), c.slope.begin(), c.slope.end());
    if (seen.insert(primitive(key)).second) unique.push_back(c);
  }

  std::vector<Rational> samples;
  const std::size_t steps = std::max<std::size_t>(grid_points, 1);
  for (std::size_t s = 0; s <= steps; ++s) {
    samples.push_back(*lo + (*hi - *lo) * Rational(static_cast<long>(s), static_cast<long>(steps)));
  }
  Polytope base = base_polytope(k, out.structural);
  std::vector<bool> alive(unique.size(), true);
  for (std::size_t i = 0; i < unique.size(); ++i) {
    bool redundant_everywhere = true;
    for (const Rational& a : samples) {
      Polytope others = base;
      for (std::size_t j = 0; j < unique.size(); ++j) {
        if (j != i && alive[j]) others.add_inequality(unique[j].at(a), Rational(0));
      }
      if (!implied(others, unique[i].at(a), Rational(0))) {
        redundant_everywhere = false;
        break;
      }
    }
    if (redundant_everywhere) alive[i] = false;
  }
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (alive[i]) out.parametric_rows.push_back(unique[i]);
  }
}

}  // namespace

SpecializedSystem specialize(const ConstraintSystem& system, const SymmetrySpec& sym, std::size_t grid_points) {
  SpecializedSystem out;
  out.shell = system.shell;
  out.symmetry = sym;
  out.structural = spin_structural_rows(system);
  const bool cubic = sym.kind == SymmetryKind::BCC || sym.kind == SymmetryKind::FCC;
  if (cubic && !sym.parameters.count("a")) {
    if (system.shell.orbital_dim != 5) throw Error(ErrorCode::InfeasibleSymmetry, "cubic symmetry needs a d-shell");
    out.symbolic = true;
    specialize_symbolic(system, out, grid_points);
    return out;
  }
  specialize_numeric(system, symmetry_occupancy(system.shell, sym), out);
  return out;
}

std::vector<ParametricRow> bcc_reference_rows() {
  struct Entry {
    int c[4];
    int s;
  };
  static const Entry entries[] = {
      {{3, 3, 2, 2}, -2},         {{-3, -3, -4, -3}, 2},   {{11, 9, 7, 9}, -7},
      {{-11, -13, -11, -9}, 7},   {{-1, -3, -2, -2}, 1},   {{2, 0, 1, 0}, -1},
      {{-4, -6, -5, -6}, 3},      {{-17, -15, -13, -11}, 9}, {{23, 17, 19, 21}, -15},
  };
  std::vector<ParametricRow> rows;
  int index = 0;
  for (const auto& e : entries) {
    ParametricRow row;
    for (int j = 0; j < 4; ++j) {
      row.constant.push_back(e.c[j]);
      row.slope.push_back(e.s);
    }
    row.origin = "bcc." + std::to_string(++index);
    rows.push_back(std::move(row));
  }
  return rows;
}

bool same_up_to_scaling(const ParametricRow& lhs, const ParametricRow& rhs) {
  RationalVector x = lhs.constant, y = rhs.constant;
  x.insert(x.end(), lhs.slope.begin(), lhs.slope.end());
  y.insert(y.end(), rhs.slope.begin(), rhs.slope.end());
  return x.size() == y.size() && primitive(x) == primitive(y);
}

}  // namespace paulimag
