#pragma once

/*
  Tree-indexed multilinear operators.

  The building blocks of the normal-form expansion of the cubic flow.  All
  evaluators return bare operator values: the outer prefactor of the equation
  (see equation.hpp) is applied by the caller assembling a right side.  The
  constants that arise inside the expansion itself (one unit-modulus factor
  per substitution step, one reciprocal phase per differentiation by parts,
  one global sign per generation) are part of the operator and are applied
  here.

  Kinds, with G the tree generation being summed over and g = spec.gen:

    Full       all quadruples n = n1 - n2 + n3, resonant ones included,
               with the outer prefactor (this one is the literal right side)
    R1         diagonal resonant part |v_n|^2 v_n
    R2         total-intensity resonant part 2 (sum_k |v_k|^2) v_n
    Near(g)    G = g + 1, last-generation phase inside the level-g set
    Residual(g) G = g + 1, last-generation phase outside the level-g set
    Remainder(g) G = g + 1, last generation unconstrained
    Boundary(g) G = g, the total-derivative boundary term of the next
               differentiation by parts (one extra reciprocal phase)
    Resonant(g) G = g, same weight as Boundary(g), with the resonant
               correction (R1 - R2) inserted at one terminal, summed over
               terminals

  Every kind with tree generation G restricts generations 1..G' (G' = G for
  Boundary/Resonant, G - 1 otherwise) to the complement of the level sets,
  which keeps every divided phase non-zero; a zero divided phase therefore
  signals a defect and evaluation aborts.

  Cost grows like (2M+1)^(2G) per output mode; keep windows small for G >= 2
  (the verification suite uses M <= 8 there) and use the probe pass in
  harness.hpp for wide-window scans.
*/

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlsnf/equation.hpp"
#include "nlsnf/filters.hpp"
#include "nlsnf/mode_vector.hpp"
#include "nlsnf/parallel.hpp"
#include "nlsnf/tree.hpp"

namespace nlsnf {

enum class OperatorKind { Full, R1, R2, Near, Residual, Remainder, Boundary, Resonant };

inline const char* operator_kind_name(OperatorKind k) {
  switch (k) {
    case OperatorKind::Full: return "full";
    case OperatorKind::R1: return "R1";
    case OperatorKind::R2: return "R2";
    case OperatorKind::Near: return "near";
    case OperatorKind::Residual: return "residual";
    case OperatorKind::Remainder: return "remainder";
    case OperatorKind::Boundary: return "boundary";
    case OperatorKind::Resonant: return "resonant";
  }
  return "?";
}

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Full;
  int gen = 1;
  ThresholdConfig thresholds;
  SignConvention sign = SignConvention::Defocusing;

  // Tree generation the kind sums over, and the number of divided phases.
  int tree_generation() const {
    return (kind == OperatorKind::Boundary || kind == OperatorKind::Resonant) ? gen : gen + 1;
  }
  int divided_phases() const {
    return (kind == OperatorKind::Boundary || kind == OperatorKind::Resonant)
               ? tree_generation()
               : tree_generation() - 1;
  }

  void validate() const {
    thresholds.validate();
    switch (kind) {
      case OperatorKind::Full:
      case OperatorKind::R1:
      case OperatorKind::R2:
        return;
      case OperatorKind::Near:
      case OperatorKind::Residual:
      case OperatorKind::Remainder:
        if (gen < 0) throw std::invalid_argument("OperatorSpec: gen must be >= 0");
        return;
      case OperatorKind::Boundary:
      case OperatorKind::Resonant:
        if (gen < 1) throw std::invalid_argument("OperatorSpec: gen must be >= 1");
        return;
    }
  }
};

inline ModeVector resonant_r1(const ModeVector& v) {
  ModeVector out(v.window());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.coeffs()[i] = std::norm(v.coeffs()[i]) * v.coeffs()[i];
  }
  return out;
}

inline ModeVector resonant_r2(const ModeVector& v) {
  ModeVector out(v.window());
  const double intensity = mean_intensity(v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.coeffs()[i] = 2.0 * intensity * v.coeffs()[i];
  }
  return out;
}

// Literal right side: prefactor * sum over every quadruple in the window.
inline ModeVector full_nonlinearity(const ModeVector& v, double t, SignConvention sign) {
  const int M = v.window();
  ModeVector out(M);
  for (int n1 = -M; n1 <= M; ++n1) {
    for (int n2 = -M; n2 <= M; ++n2) {
      for (int n3 = -M; n3 <= M; ++n3) {
        const int n = n1 - n2 + n3;
        if (n < -M || n > M) continue;
        const std::int64_t phi = 2 * static_cast<std::int64_t>(n2 - n1) *
                                 static_cast<std::int64_t>(n2 - n3);
        const cplx osc = std::polar(1.0, -static_cast<double>(phi) * t);
        out.at(n) += osc * v.at(n1) * std::conj(v.at(n2)) * v.at(n3);
      }
    }
  }
  const cplx c = nonlinearity_prefactor(sign);
  for (cplx& z : out.coeffs()) z *= c;
  return out;
}

namespace detail {

struct EngineGate {
  OperatorKind kind;
  int G;
  const ThresholdConfig* cfg;

  bool operator()(int j, std::int64_t mt, std::int64_t prev, std::int64_t mu1) const {
    const bool last = (j == G);
    if (kind == OperatorKind::Boundary || kind == OperatorKind::Resonant || !last) {
      return !in_level_set(j - 1, mt, prev, mu1, *cfg);
    }
    if (kind == OperatorKind::Remainder) return true;
    const bool inside = in_level_set(G - 1, mt, prev, mu1, *cfg);
    return (kind == OperatorKind::Near) ? inside : !inside;
  }
};

// Unit-modulus constant collected from the substitution steps of a tree:
// one prefactor per step after the first, conjugated when the expanded node
// was conjugated.
inline cplx substitution_constant(const OrderedTree& tree, SignConvention sign) {
  const cplx c = nonlinearity_prefactor(sign);
  cplx k{1.0, 0.0};
  const auto& chron = tree.chronicle();
  for (std::size_t j = 1; j < chron.size(); ++j) {
    const Parity p = tree.node(chron[j]).parity;
    k *= (p == Parity::Plain) ? c : std::conj(c);
  }
  return k;
}

}  // namespace detail

/*
  Core scan.  For every tree of the spec's generation and every surviving
  assignment with root frequency `root`, calls

      fn(tree_index, freq, mu, mu_tilde, weight, value)

  where `weight` carries the generation sign, the substitution constant, the
  oscillatory factor e^{-i mu_tilde_G t} and the reciprocal divided phases,
  and `value` is the full summand including amplitudes (and, for the resonant
  kind, the terminal-inserted corrections).
*/
template <class Fn>
void scan_operator(const OperatorSpec& spec, const std::vector<OrderedTree>& trees,
                   const ModeVector& v, double t, int root, Fn&& fn) {
  spec.validate();
  const int G = spec.tree_generation();
  const int D = spec.divided_phases();
  const double eps_sign = (G % 2 == 1) ? 1.0 : -1.0;
  const cplx c = nonlinearity_prefactor(spec.sign);
  const int M = v.window();

  // Resonant correction (R1 - R2) per mode, reused across summands.
  std::vector<cplx> rho;
  if (spec.kind == OperatorKind::Resonant) {
    const double intensity = mean_intensity(v);
    rho.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      rho[i] = (std::norm(v.coeffs()[i]) - 2.0 * intensity) * v.coeffs()[i];
    }
  }

  detail::EngineGate gate{spec.kind, G, &spec.thresholds};
  std::vector<cplx> prefix, suffix;

  for (std::size_t ti = 0; ti < trees.size(); ++ti) {
    const OrderedTree& tree = trees[ti];
    if (tree.generations() != G) {
      throw std::invalid_argument("scan_operator: tree generation mismatch");
    }
    const cplx subst = detail::substitution_constant(tree, spec.sign);
    const std::vector<int> terms = tree.terminals();
    const std::size_t nt = terms.size();
    prefix.assign(nt + 1, cplx{1.0, 0.0});
    suffix.assign(nt + 1, cplx{1.0, 0.0});

    for_each_assignment(
        tree, root, M, gate,
        [&](const std::vector<int>& freq, const std::vector<std::int64_t>& mu,
            const std::vector<std::int64_t>& mu_tilde) {
          cplx w = eps_sign * subst;
          for (int j = 0; j < D; ++j) {
            const std::int64_t mt = mu_tilde[static_cast<std::size_t>(j)];
            if (mt == 0) {
              throw std::logic_error("scan_operator: zero divided phase (defect)");
            }
            w *= cplx{0.0, 1.0 / static_cast<double>(mt)};
          }
          const double theta = -static_cast<double>(mu_tilde[static_cast<std::size_t>(G - 1)]) * t;
          w *= std::polar(1.0, theta);

          cplx value;
          if (spec.kind != OperatorKind::Resonant) {
            cplx amp{1.0, 0.0};
            for (std::size_t k = 0; k < nt; ++k) {
              const int id = terms[k];
              const cplx z = v.at(freq[static_cast<std::size_t>(id)]);
              amp *= (tree.node(id).parity == Parity::Plain) ? z : std::conj(z);
            }
            value = w * amp;
          } else {
            for (std::size_t k = 0; k < nt; ++k) {
              const int id = terms[k];
              const cplx z = v.at(freq[static_cast<std::size_t>(id)]);
              const cplx f = (tree.node(id).parity == Parity::Plain) ? z : std::conj(z);
              prefix[k + 1] = prefix[k] * f;
            }
            suffix[nt] = cplx{1.0, 0.0};
            for (std::size_t k = nt; k-- > 0;) {
              const int id = terms[k];
              const cplx z = v.at(freq[static_cast<std::size_t>(id)]);
              const cplx f = (tree.node(id).parity == Parity::Plain) ? z : std::conj(z);
              suffix[k] = f * suffix[k + 1];
            }
            cplx inserted{0.0, 0.0};
            for (std::size_t k = 0; k < nt; ++k) {
              const int id = terms[k];
              const bool plain = tree.node(id).parity == Parity::Plain;
              const cplx kappa = plain ? c : std::conj(c);
              const cplx r = rho[static_cast<std::size_t>(
                  freq[static_cast<std::size_t>(id)] + M)];
              const cplx ins = plain ? r : std::conj(r);
              inserted += kappa * ins * prefix[k] * suffix[k + 1];
            }
            value = w * inserted;
          }
          fn(ti, freq, mu, mu_tilde, w, value);
        });
  }
}

// Tree-indexed operator evaluation on the whole window.
inline ModeVector eval_term(const OperatorSpec& spec, const ModeVector& v, double t,
                            int jobs = 1) {
  spec.validate();
  switch (spec.kind) {
    case OperatorKind::Full: return full_nonlinearity(v, t, spec.sign);
    case OperatorKind::R1: return resonant_r1(v);
    case OperatorKind::R2: return resonant_r2(v);
    default: break;
  }
  const int M = v.window();
  const std::vector<OrderedTree> trees = enumerate_trees(spec.tree_generation());
  ModeVector out(M);
  parallel_for(static_cast<std::size_t>(2 * M + 1), jobs, [&](std::size_t idx) {
    const int n = static_cast<int>(idx) - M;
    cplx acc{0.0, 0.0};
    scan_operator(spec, trees, v, t, n,
                  [&](std::size_t, const std::vector<int>&, const std::vector<std::int64_t>&,
                      const std::vector<std::int64_t>&, cplx, cplx value) { acc += value; });
    out.at(n) = acc;
  });
  return out;
}

inline std::uint64_t count_operator_assignments(const OperatorSpec& spec, int M, int root) {
  spec.validate();
  const std::vector<OrderedTree> trees = enumerate_trees(spec.tree_generation());
  detail::EngineGate gate{spec.kind, spec.tree_generation(), &spec.thresholds};
  std::uint64_t n = 0;
  for (const OrderedTree& tree : trees) {
    for_each_assignment(tree, root, M, gate,
                        [&](const std::vector<int>&, const std::vector<std::int64_t>&,
                            const std::vector<std::int64_t>&) { ++n; });
  }
  return n;
}

// CSV stream of the summand set of one output mode (or all modes when
// `root_or_all` is past the window).  Columns: root, tree, per-node
// frequencies and per-generation phases joined by ';', then weight and value.
inline void dump_assignments(const OperatorSpec& spec, const ModeVector& v, double t,
                             std::ostream& os) {
  spec.validate();
  if (spec.kind == OperatorKind::Full || spec.kind == OperatorKind::R1 ||
      spec.kind == OperatorKind::R2) {
    throw std::invalid_argument("dump_assignments: tree-indexed kinds only");
  }
  const std::vector<OrderedTree> trees = enumerate_trees(spec.tree_generation());
  os << "root,tree,freqs,mu,weight_re,weight_im,value_re,value_im\n";
  const int M = v.window();
  char buf[64];
  const auto num = [&buf](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (int n = -M; n <= M; ++n) {
    scan_operator(spec, trees, v, t, n,
                  [&](std::size_t ti, const std::vector<int>& freq,
                      const std::vector<std::int64_t>& mu, const std::vector<std::int64_t>&,
                      cplx w, cplx value) {
                    os << n << ',' << ti << ',';
                    for (std::size_t k = 0; k < freq.size(); ++k) {
                      if (k) os << ';';
                      os << freq[k];
                    }
                    os << ',';
                    for (std::size_t k = 0; k < mu.size(); ++k) {
                      if (k) os << ';';
                      os << mu[k];
                    }
                    os << ',' << num(w.real()) << ',' << num(w.imag()) << ','
                       << num(value.real()) << ',' << num(value.imag()) << '\n';
                  });
  }
}

// Split of the non-resonant sum by the level-0 cut.
struct N1Split {
  ModeVector below;  // |mu_1| <= N
  ModeVector above;  // |mu_1| >  N
};

inline N1Split decompose_N1(const ModeVector& v, double t, const ThresholdConfig& cfg,
                            SignConvention sign = SignConvention::Defocusing, int jobs = 1) {
  OperatorSpec near{OperatorKind::Near, 0, cfg, sign};
  OperatorSpec residual{OperatorKind::Residual, 0, cfg, sign};
  return N1Split{eval_term(near, v, t, jobs), eval_term(residual, v, t, jobs)};
}

// Residual of the exact resonant split: the literal right side minus
// prefactor * (non-resonant sum - R1 + R2).  The non-resonant sum is
// re-evaluated through the tree scan, which walks the quadruples in a
// different order than full_nonlinearity does.
inline double gauge_decomposition_check(const ModeVector& v, double t, SignConvention sign,
                                        int jobs = 1) {
  const ModeVector full = full_nonlinearity(v, t, sign);
  OperatorSpec n1{OperatorKind::Remainder, 0, ThresholdConfig{}, sign};
  const ModeVector nonres = eval_term(n1, v, t, jobs);
  const ModeVector r1 = resonant_r1(v);
  const ModeVector r2 = resonant_r2(v);
  const cplx c = nonlinearity_prefactor(sign);
  double acc = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const cplx d = full.coeffs()[i] -
                   c * (nonres.coeffs()[i] - r1.coeffs()[i] + r2.coeffs()[i]);
    acc += std::norm(d);
  }
  return std::sqrt(acc);
}

}  // namespace nlsnf
