#include "paulimag/rational.hpp"

#include "paulimag/error.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace paulimag {

namespace {

using boost::multiprecision::mpz_int;

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

[[noreturn]] void bad(std::string_view text) {
  throw Error(ErrorCode::Parse, "cannot parse rational '" + std::string(text) + "'");
}

mpz_int parse_integer(std::string_view digits, std::string_view original) {
  if (digits.empty()) bad(original);
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) bad(original);
  }
  std::size_t first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return mpz_int(0);
  return mpz_int(std::string(digits.substr(first)));
}

mpz_int pow10(long exponent) {
  mpz_int result = 1;
  for (long i = 0; i < exponent; ++i) result *= 10;
  return result;
}

}  // namespace

Rational parse_rational(std::string_view raw) {
  std::string_view text = trim(raw);
  if (text.empty()) bad(raw);

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  Rational value;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_int num = parse_integer(trim(text.substr(0, slash)), raw);
    mpz_int den = parse_integer(trim(text.substr(slash + 1)), raw);
    if (den == 0) bad(raw);
    value = Rational(num, den);
  } else {
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view exp_text = text.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (exp_text.empty() || exp_text.size() > 6) bad(raw);
      exponent = std::stol(std::string(parse_integer(exp_text, raw).str()));
      if (exp_negative) exponent = -exponent;
      text = text.substr(0, e);
    }
    std::string_view int_part = text;
    std::string_view frac_part;
    if (auto dot_pos = text.find('.'); dot_pos != std::string_view::npos) {
      int_part = text.substr(0, dot_pos);
      frac_part = text.substr(dot_pos + 1);
    }
    if (int_part.empty() && frac_part.empty()) bad(raw);
    std::string digits = std::string(int_part) + std::string(frac_part);
    mpz_int num = parse_integer(digits, raw);
    exponent -= static_cast<long>(frac_part.size());
    if (exponent >= 0) {
      value = Rational(num * pow10(exponent));
    } else {
      value = Rational(num, pow10(-exponent));
    }
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& value) {
  if (denominator(value) == 1) return numerator(value).str();
  return numerator(value).str() + "/" + denominator(value).str();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

Rational from_double(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::Parse, "non-finite value cannot be made rational");
  }
  return Rational(value);
}

Rational dot(const RationalVector& lhs, const RationalVector& rhs) {
  if (lhs.size() != rhs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "dot product of vectors with different lengths");
  }
  Rational total = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (!lhs[i].is_zero() && !rhs[i].is_zero()) total += lhs[i] * rhs[i];
  }
  return total;
}

Rational sum(const RationalVector& values) {
  Rational total = 0;
  for (const auto& v : values) total += v;
  return total;
}

RationalVector parse_rational_list(std::string_view text) {
  RationalVector out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    out.push_back(parse_rational(text.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::string to_string(const RationalVector& values) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ", ";
    out << to_string(values[i]);
  }
  out << ')';
  return out.str();
}

std::vector<double> to_double(const RationalVector& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(to_double(v));
  return out;
}

RationalVector primitive(const RationalVector& values) {
  mpz_int den_lcm = 1;
  for (const auto& v : values) {
    if (!v.is_zero()) den_lcm = lcm(den_lcm, mpz_int(denominator(v)));
  }
  mpz_int num_gcd = 0;
  for (const auto& v : values) {
    if (v.is_zero()) continue;
    mpz_int scaled = mpz_int(numerator(v)) * (den_lcm / mpz_int(denominator(v)));
    num_gcd = gcd(num_gcd, abs(scaled));
  }
  if (num_gcd == 0) return values;
  RationalVector out;
  out.reserve(values.size());
  Rational factor(den_lcm, num_gcd);
  for (const auto& v : values) out.push_back(v * factor);
  return out;
}

}  // namespace paulimag
