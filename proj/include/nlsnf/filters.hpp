#pragma once

/*
  Phase-size gates for the normal-form expansion.

  Level 0 separates summands by the absolute size of the first expansion
  phase: |mu_1| <= N.  Level J >= 1 compares the accumulated phase after
  J + 1 steps against the accumulated phase one step earlier,

      |mu_tilde_{J+1}| <= lead_constant * (2J + 3)^3 * max(|mu_tilde_J|, |mu_1|)^{1 - alpha}.

  A summand passing the level-J test is "near-resonant" at that level and is
  kept under the time integral; the rest feed the next differentiation by
  parts, whose denominators the failed test then bounds away from zero.
*/

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace nlsnf {

struct ThresholdConfig {
  double N = 0.0;              // level-0 cut on |mu_1|
  double alpha = 0.01;         // exponent deficit in the level comparison
  double lead_constant = 1.0;  // scale factor on the level comparison

  void validate() const {
    if (!(N >= 0.0)) throw std::invalid_argument("ThresholdConfig: N must be >= 0");
    if (!(alpha >= 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("ThresholdConfig: alpha must lie in [0, 1)");
    }
    if (!(lead_constant > 0.0)) {
      throw std::invalid_argument("ThresholdConfig: lead_constant must be > 0");
    }
  }
};

// Membership in the level-0 set: n = n1 - n2 + n3 with n1, n3 != n and
// |2 (n - n1)(n - n3)| <= N.
inline bool in_A_N(int n, int n1, int n2, int n3, const ThresholdConfig& cfg) {
  if (n != n1 - n2 + n3) {
    throw std::invalid_argument("in_A_N: frequencies violate n = n1 - n2 + n3");
  }
  if (n == n1 || n == n3) {
    throw std::invalid_argument("in_A_N: degenerate quadruple (n equals an outer child)");
  }
  const std::int64_t phi =
      2 * static_cast<std::int64_t>(n - n1) * static_cast<std::int64_t>(n - n3);
  return std::abs(static_cast<double>(phi)) <= cfg.N;
}

// Level-J near-resonance test, J >= 1.
inline bool in_C(int J, std::int64_t mu_tilde_next, std::int64_t mu_tilde_J,
                 std::int64_t mu_1, const ThresholdConfig& cfg) {
  if (J < 1) throw std::invalid_argument("in_C: level must be >= 1");
  const double lvl = static_cast<double>(2 * J + 3);
  const double base = std::max(std::abs(static_cast<double>(mu_tilde_J)),
                               std::abs(static_cast<double>(mu_1)));
  const double bound = cfg.lead_constant * lvl * lvl * lvl * std::pow(base, 1.0 - cfg.alpha);
  return std::abs(static_cast<double>(mu_tilde_next)) <= bound;
}

// Uniform view of the level gates: level 0 is the |mu_1| <= N cut, higher
// levels delegate to in_C.  `mu_tilde_next` is the accumulated phase after
// level + 1 steps, `mu_tilde_here` after level steps (ignored at level 0).
inline bool in_level_set(int level, std::int64_t mu_tilde_next, std::int64_t mu_tilde_here,
                         std::int64_t mu_1, const ThresholdConfig& cfg) {
  if (level == 0) return std::abs(static_cast<double>(mu_tilde_next)) <= cfg.N;
  return in_C(level, mu_tilde_next, mu_tilde_here, mu_1, cfg);
}

}  // namespace nlsnf
