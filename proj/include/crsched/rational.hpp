#pragma once

// Exact rational arithmetic helpers shared by every module.

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crsched {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw DomainError("zero denominator");
  return Rational(Integer(num), Integer(den));
}

inline Integer numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }

/// Integer power, exponent may be negative.
inline Rational pow(const Rational& base, long long e) {
  if (e < 0) {
    if (base == 0) throw DomainError("negative power of zero");
    return Rational(1) / pow(base, -e);
  }
  Rational result(1);
  Rational b = base;
  while (e > 0) {
    if (e & 1) result *= b;
    b *= b;
    e >>= 1;
  }
  return result;
}

inline Integer floor_div(const Rational& q) {
  Integer n = numerator_of(q);
  Integer d = denominator_of(q);
  Integer r = n / d;
  if (n < 0 && r * d != n) r -= 1;
  return r;
}

inline Integer ceil_div(const Rational& q) {
  Integer f = floor_div(q);
  if (Rational(f) == q) return f;
  return f + 1;
}

inline long long to_ll(const Integer& z) { return z.convert_to<long long>(); }
inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// "3/2", "-7", "0.125", "1e-3" are accepted. Returns nullopt for "inf".
inline std::optional<Rational> parse_rational_or_inf(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& t) {
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
  };
  trim(s);
  if (s.empty()) throw ParseError("empty rational");
  if (s == "inf" || s == "+inf" || s == "infinity") return std::nullopt;

  auto parse_integer = [&](const std::string& t) -> Integer {
    if (t.empty()) throw ParseError("malformed rational \"" + s + "\"");
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) throw ParseError("malformed rational \"" + s + "\"");
    for (std::size_t k = i; k < t.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(t[k])))
        throw ParseError("malformed rational \"" + s + "\"");
    return Integer(t[0] == '+' ? t.substr(1) : t);
  };

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Integer num = parse_integer(s.substr(0, slash));
    Integer den = parse_integer(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in \"" + s + "\"");
    return Rational(num, den);
  }

  // decimal with optional exponent
  std::string mant = s;
  long long exp10 = 0;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    mant = s.substr(0, e);
    exp10 = to_ll(parse_integer(s.substr(e + 1)));
  }
  bool neg = false;
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
    neg = mant[0] == '-';
    mant.erase(mant.begin());
  }
  std::string digits;
  long long frac_len = 0;
  bool seen_dot = false;
  for (char c : mant) {
    if (c == '.') {
      if (seen_dot) throw ParseError("malformed rational \"" + s + "\"");
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_len;
    } else {
      throw ParseError("malformed rational \"" + s + "\"");
    }
  }
  if (digits.empty()) throw ParseError("malformed rational \"" + s + "\"");
  Rational value{Integer(digits)};
  value *= pow(Rational(10), exp10 - frac_len);
  return neg ? Rational(-value) : value;
}

inline Rational parse_rational(std::string_view text) {
  auto v = parse_rational_or_inf(text);
  if (!v) throw ParseError("infinite value not allowed here");
  return *v;
}

/// Canonical text form: "n" or "n/d".
inline std::string to_string(const Rational& q) {
  Integer d = denominator_of(q);
  if (d == 1) return numerator_of(q).str();
  return numerator_of(q).str() + "/" + d.str();
}

/// Largest x with base^x <= v, for v > 0 and base > 1.
inline long long floor_log(const Rational& v, const Rational& base) {
  if (v <= 0) throw DomainError("floor_log of non-positive value");
  long long x = 0;
  Rational p(1);
  if (v >= 1) {
    while (p * base <= v) {
      p *= base;
      ++x;
    }
  } else {
    while (p > v) {
      p /= base;
      --x;
    }
  }
  return x;
}

/// Smallest x with base^x >= v, for v > 0 and base > 1.
inline long long ceil_log(const Rational& v, const Rational& base) {
  long long x = floor_log(v, base);
  return pow(base, x) == v ? x : x + 1;
}

/// If v is exactly base^x returns x.
inline std::optional<long long> exact_log(const Rational& v, const Rational& base) {
  if (v <= 0) return std::nullopt;
  long long x = floor_log(v, base);
  if (pow(base, x) == v) return x;
  return std::nullopt;
}

}  // namespace crsched
