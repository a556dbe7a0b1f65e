#pragma once

#include "crsched/core.hpp"

#include <string>

namespace crsched {

enum class SchemeMode { desk, theoretical };

/// Scheme constants. In desk mode every constant used by the engine comes
/// from here; theoretical mode only changes what is reported and the caps
/// the simplification steps apply.
struct SchemeConfig {
  Epsilon eps;
  int s = 2;              // safety-net span in intervals
  int Delta = 2;          // max jobs per release date
  int K = 2;              // period-domination constant
  Rational mu{1, 2};      // large-job atom = mu * p_j
  int d = 4;              // tiny-job pack constant
  Rational delta{1, 8};   // probability quantum of randomized maps
  int G = 4;              // grid slots per interval (refined oracle)
  int X_max = 4;          // last release interval of the universe
  int E_cap = 32;         // BFS depth cap
  SchemeMode mode = SchemeMode::desk;

  int large_per_type = 2;           // desk cap for prune_large_jobs
  int offset_modulus = 0;           // M for offset_split; 0 = derive from (1+eps)^s/eps
  std::size_t oracle_job_cap = 7;
  std::size_t oracle_state_cap = 10'000'000;
  std::size_t universe_cap = 1'000'000;
  std::size_t class_cap = 200'000;
  std::size_t rand_enum_cap = 64;
  std::size_t rand_tree_cap = 5'000'000;

  int Gamma() const { return K * s; }
  int atoms() const { return to_ll(denominator_of(mu)) / to_ll(numerator_of(mu)); }

  void validate() const {
    auto positive = [](long long v, const char* name) {
      if (v <= 0) throw DomainError(std::string("scheme.") + name + " must be positive");
    };
    positive(s, "s");
    if (Delta < 0) throw DomainError("scheme.Delta must be non-negative");
    positive(K, "K");
    positive(d, "d");
    positive(G, "G");
    positive(E_cap, "E_cap");
    positive(large_per_type, "large_per_type");
    if (X_max < 0) throw DomainError("scheme.X_max must be non-negative");
    if (mu <= 0 || mu > 1 || numerator_of(mu) != 1) throw DomainError("scheme.mu must be 1/k for a positive integer k");
    if (delta <= 0 || delta > 1 || numerator_of(delta) != 1)
      throw DomainError("scheme.delta must be 1/k for a positive integer k");
    if (offset_modulus < 0) throw DomainError("scheme.M must be non-negative");
  }
};

}  // namespace crsched
