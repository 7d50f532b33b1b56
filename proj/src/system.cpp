#include "paulimag/system.hpp"

#include "paulimag/error.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace paulimag {

std::size_t ShellConfig::spin_multiplicity() const {
  if (sector == SpinSector::Polarized) return 1;
  Rational twice = total_spin * 2;
  return static_cast<std::size_t>(numerator(twice).convert_to<long>()) + 1;
}

std::string ShellConfig::name() const {
  std::string sector_name = sector == SpinSector::High  ? "high"
                            : sector == SpinSector::Low ? "low"
                                                        : "polarized";
  if (orbital_dim == 5) return "d" + std::to_string(electron_count) + "-" + sector_name;
  if (orbital_dim == 7) return "f" + std::to_string(electron_count) + "-" + sector_name;
  return "n" + std::to_string(orbital_dim) + "-" + std::to_string(electron_count) + "-" +
         sector_name;
}

ShellConfig d_shell(int electron_count, SpinSector sector) {
  if (electron_count < 1 || electron_count > 9) {
    throw Error(ErrorCode::UnsupportedShell,
                "d-shell electron count must be in 1..9, got " + std::to_string(electron_count));
  }
  ShellConfig shell;
  shell.electron_count = electron_count;
  shell.orbital_dim = 5;
  shell.sector = sector;
  switch (sector) {
    case SpinSector::High:
    case SpinSector::Polarized:
      shell.total_spin = Rational(std::min(electron_count, 10 - electron_count), 2);
      break;
    case SpinSector::Low:
      shell.total_spin = Rational(electron_count % 2, 2);
      break;
  }
  return shell;
}

ShellConfig parse_shell(const std::string& text) {
  std::string lower;
  for (char ch : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (lower.size() < 2 || lower[0] != 'd') {
    throw Error(ErrorCode::UnsupportedShell, "unrecognised shell '" + text + "'");
  }
  std::size_t pos = 1;
  while (pos < lower.size() && std::isdigit(static_cast<unsigned char>(lower[pos]))) ++pos;
  if (pos == 1) throw Error(ErrorCode::UnsupportedShell, "unrecognised shell '" + text + "'");
  int count = std::stoi(lower.substr(1, pos - 1));
  SpinSector sector = SpinSector::High;
  std::string rest = lower.substr(pos);
  if (rest.empty() || rest == "-high" || rest == "high") {
    sector = SpinSector::High;
  } else if (rest == "-low" || rest == "low") {
    sector = SpinSector::Low;
  } else if (rest == "-polarized" || rest == "polarized") {
    sector = SpinSector::Polarized;
  } else {
    throw Error(ErrorCode::UnsupportedShell, "unrecognised spin sector in '" + text + "'");
  }
  return d_shell(count, sector);
}

namespace {

RationalVector sorted_desc(RationalVector values) {
  std::sort(values.begin(), values.end(), [](const Rational& a, const Rational& b) { return a > b; });
  return values;
}

}  // namespace

OccupancyVector OccupancyVector::orbital(RationalVector values) {
  OccupancyVector out;
  out.values = sorted_desc(std::move(values));
  out.kind = Kind::Orbital;
  out.normalization = sum(out.values);
  return out;
}

OccupancyVector OccupancyVector::spin(RationalVector values) {
  OccupancyVector out;
  out.values = sorted_desc(std::move(values));
  out.kind = Kind::Spin;
  out.normalization = sum(out.values);
  return out;
}

OccupancyVector OccupancyVector::bcc(const Rational& a, int electron_count) {
  Rational b = (Rational(electron_count) - 3 * a) / 2;
  return orbital({a, a, a, b, b});
}

OccupancyVector OccupancyVector::fcc(const Rational& a, int electron_count) {
  Rational b = (Rational(electron_count) - 3 * a) / 2;
  return orbital({b, b, a, a, a});
}

OccupancyVector OccupancyVector::spherical(int electron_count, int orbital_dim) {
  return orbital(RationalVector(static_cast<std::size_t>(orbital_dim),
                                Rational(electron_count, orbital_dim)));
}

std::vector<Inequality> ConstraintSystem::structural_rows() const {
  const std::size_t n = static_cast<std::size_t>(shell.orbital_dim);
  const std::size_t k = shell.spin_multiplicity();
  std::vector<Inequality> rows;
  auto blank = [&]() {
    Inequality row;
    row.orbital.assign(n, Rational(0));
    row.spin.assign(k, Rational(0));
    row.bound = 0;
    return row;
  };
  if (ordered) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      Inequality row = blank();
      row.orbital[i] = -1;
      row.orbital[i + 1] = 1;
      row.origin = "order nu" + std::to_string(i + 1) + ">=nu" + std::to_string(i + 2);
      rows.push_back(row);
    }
    for (std::size_t j = 0; j + 1 < k; ++j) {
      Inequality row = blank();
      row.spin[j] = -1;
      row.spin[j + 1] = 1;
      row.origin = "order mu" + std::to_string(j + 1) + ">=mu" + std::to_string(j + 2);
      rows.push_back(row);
    }
  }
  if (orbital_cap) {
    for (std::size_t i = 0; i < n; ++i) {
      Inequality lower = blank();
      lower.orbital[i] = -1;
      lower.origin = "box nu" + std::to_string(i + 1) + ">=0";
      rows.push_back(lower);
      Inequality upper = blank();
      upper.orbital[i] = 1;
      upper.bound = *orbital_cap;
      upper.origin = "box nu" + std::to_string(i + 1) + "<=" + to_string(*orbital_cap);
      rows.push_back(upper);
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    Inequality row = blank();
    row.spin[j] = -1;
    row.origin = "box mu" + std::to_string(j + 1) + ">=0";
    rows.push_back(row);
  }
  Inequality nu_norm = blank();
  nu_norm.orbital.assign(n, Rational(1));
  nu_norm.bound = shell.electron_count;
  nu_norm.sense = Sense::Equal;
  nu_norm.origin = "normalization nu";
  rows.push_back(nu_norm);
  Inequality mu_norm = blank();
  mu_norm.spin.assign(k, Rational(1));
  mu_norm.bound = 1;
  mu_norm.sense = Sense::Equal;
  mu_norm.origin = "normalization mu";
  rows.push_back(mu_norm);
  return rows;
}

std::string to_string(const Inequality& row) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < row.orbital.size(); ++i) {
    if (i) out << ',';
    out << to_string(row.orbital[i]);
  }
  out << " | ";
  for (std::size_t j = 0; j < row.spin.size(); ++j) {
    if (j) out << ',';
    out << to_string(row.spin[j]);
  }
  out << "] " << (row.sense == Sense::Equal ? "=" : "<=") << ' ' << to_string(row.bound);
  return out.str();
}

}  // namespace paulimag
