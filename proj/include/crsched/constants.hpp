#pragma once

// Closed-form constants of the scheme, evaluated for a given eps and m.

#include "crsched/config.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace crsched {

struct ConstantsReport {
  Rational eps;
  int m = 1;
  int d = 4;
  long long distinct_large = 0;       // distinct large sizes per date
  long long large_per_type = 0;       // large jobs of one size kept per date
  long long max_large_per_type = 0;   // large jobs per date over all sizes
  long long distinct_small = 0;       // distinct small sizes per date
  long long small_per_date = 0;       // small jobs per date after packing
  long long Delta = 0;                // jobs per release date
  long long s = 0;
  long long K = 0;
  long long Gamma = 0;
  long long M = 0;                    // offset modulus for randomization
  Rational pack_lower;                // as a fraction of |I_x|
  Rational pack_upper;
  std::string domination_log10;       // log10 of eps / (Delta Gamma (1+eps)^(Gamma+s))
  std::vector<std::string> warnings;
};

namespace detail {

using Big = boost::multiprecision::mpfr_float_100;

inline Big to_big(const Rational& q) {
  Big n(numerator_of(q).str());
  return n / Big(denominator_of(q).str());
}

/// Least s >= 1 with m (eps + 8/eps^3 log_{1+eps}(1/eps)) <= eps^2 (1+eps)^(s-1).
inline long long least_net_span(const Rational& eps, int m) {
  Big e = to_big(eps);
  Big lhs = m * (e + 8 / (e * e * e) * boost::multiprecision::log(1 / e) / boost::multiprecision::log(1 + e));
  long long s = 1;
  Big rhs = e * e;
  while (rhs < lhs) {
    rhs *= 1 + e;
    ++s;
  }
  return s;
}

/// Least K with q^K / (1 - q^K) <= eps, q = 1 - d'/(1+d'), d' = eps/(1+eps)^s.
/// Equivalent to q^K <= eps/(1+eps); the estimate from logarithms is
/// confirmed with exact rational powers.
inline long long least_period_count(const Rational& eps, long long s) {
  const Rational dp = eps / pow(1 + eps, s);
  const Rational q = 1 - dp / (1 + dp);
  const Rational target = eps / (1 + eps);
  Big estimate = boost::multiprecision::log(to_big(target)) / boost::multiprecision::log(to_big(q));
  long long K = std::max<long long>(1, boost::multiprecision::ceil(estimate).convert_to<long long>());
  while (K > 1 && pow(q, K - 1) <= target) --K;
  while (pow(q, K) > target) ++K;
  return K;
}

}  // namespace detail

inline ConstantsReport theoretical_constants(const Rational& eps_value, int m, int d = 4) {
  Epsilon eps(eps_value);
  if (m < 1) throw DomainError("m must be positive");
  ConstantsReport r;
  r.eps = eps_value;
  r.m = m;
  r.d = d;
  const Rational& e = eps.value();
  r.distinct_large = ceil_log(pow(1 / e, 4), eps.base());
  r.large_per_type = to_ll(ceil_div(Rational(m) / (e * e) + m));
  r.max_large_per_type = r.large_per_type * r.distinct_large;
  r.distinct_small = ceil_log(Rational(2 * d) / pow(e, 4), eps.base());
  r.small_per_date = to_ll(ceil_div(Rational(2 * d * m) / e));
  r.Delta = r.max_large_per_type + r.small_per_date;
  r.s = detail::least_net_span(e, m);
  r.K = detail::least_period_count(e, r.s);
  r.Gamma = r.K * r.s;
  r.M = to_ll(ceil_div(pow(eps.base(), r.s) / e));
  r.pack_lower = e / (2 * d);
  r.pack_upper = e / d;

  using boost::multiprecision::log10;
  detail::Big lg = log10(detail::to_big(e)) - log10(detail::Big(r.Delta)) - log10(detail::Big(r.Gamma)) -
                   (r.Gamma + r.s) * log10(detail::to_big(eps.base()));
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << lg;
  r.domination_log10 = os.str();

  if (r.Gamma > 64) r.warnings.push_back("Gamma = " + std::to_string(r.Gamma) + " is far beyond desk scale");
  if (r.Delta > 8) r.warnings.push_back("Delta = " + std::to_string(r.Delta) + " makes universes intractable");
  if (r.s > 8) r.warnings.push_back("s = " + std::to_string(r.s) + " exceeds practical horizons");
  return r;
}

/// The domination factor for a desk configuration, exactly.
inline Rational desk_domination_factor(const SchemeConfig& cfg) {
  return cfg.eps.value() / (Rational(cfg.Delta) * cfg.Gamma() * pow(cfg.eps.base(), cfg.Gamma() + cfg.s));
}

}  // namespace crsched
