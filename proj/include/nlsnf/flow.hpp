#pragma once

/*
  Partial-sum solution map and its fixed point.

  The map sends a candidate trajectory v(.) to

      v0 + prefactor * sum_g [Boundary(g)(v(t), t) - Boundary(g)(v0, 0)]
         + integral_0^t prefactor * (-R1 + R2 + sum_g Near(g) + sum_g Resonant(g)) ds

  with boundary and resonant sums over g = 1 .. J-1 and near sums over
  g = 0 .. J-1, J the truncation order.  Its fixed point solves the windowed
  cubic system with the level-(J-1) residual tail dropped; Picard iteration
  from the constant trajectory contracts for parameters from
  select_parameters.

  The time integral is a cumulative composite Simpson rule on the uniform
  grid, with a trapezoid closing any trailing odd interval.  The all-trapezoid
  result is kept alongside; a large disagreement between the two flags a grid
  too coarse for the requested tolerance.
*/

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlsnf/equation.hpp"
#include "nlsnf/filters.hpp"
#include "nlsnf/mode_vector.hpp"
#include "nlsnf/operators.hpp"
#include "nlsnf/parallel.hpp"

namespace nlsnf {

inline constexpr int kGenerationCap = 4;

struct SolverConfig {
  int M = 4;
  int J_max = 2;
  double T = 0.1;
  int grid_points = 65;
  double picard_tol = 1e-10;
  int picard_max_iters = 60;
  double C_lemma = 1.0;
  ThresholdConfig thresholds;
  SignConvention sign = SignConvention::Defocusing;
  int jobs = 1;

  void validate() const {
    if (M < 0) throw std::invalid_argument("SolverConfig: M must be >= 0");
    if (J_max < 1 || J_max > kGenerationCap) {
      throw std::invalid_argument("SolverConfig: J_max must be in [1, " +
                                  std::to_string(kGenerationCap) + "]");
    }
    if (!(T > 0)) throw std::invalid_argument("SolverConfig: T must be positive");
    if (grid_points < 2) throw std::invalid_argument("SolverConfig: grid_points must be >= 2");
    if (!(picard_tol > 0)) throw std::invalid_argument("SolverConfig: picard_tol must be positive");
    if (picard_max_iters < 1) {
      throw std::invalid_argument("SolverConfig: picard_max_iters must be >= 1");
    }
    if (!(C_lemma > 0)) throw std::invalid_argument("SolverConfig: C_lemma must be positive");
    thresholds.validate();
  }

  std::vector<double> grid() const {
    std::vector<double> g(static_cast<std::size_t>(grid_points));
    const int P = grid_points - 1;
    for (int k = 0; k <= P; ++k) {
      g[static_cast<std::size_t>(k)] = (k == P) ? T : T * k / P;
    }
    return g;
  }
};

struct SelectedParameters {
  double N = 0.0;
  double T = 0.0;
};

/*
  Threshold and horizon from the data bound R (R >= 1): with Rt = 4R, N is
  the larger of (2 Rt^2)^3 and the smallest power of two whose inverse sixth
  root beats 1/(10C); T fills 90% of the smallness budget

      C T { (1 + N^{1/2}) Rt^2 + 2 N^{-1/2} Rt^4 + 2 N^{-1/200} Rt^4 } < 1/10.

  The returned pair is re-substituted into both inequalities before returning;
  a violation is a defect, not an input error.
*/
inline SelectedParameters select_parameters(double R, double C = 1.0) {
  if (!(R >= 1.0)) throw std::invalid_argument("select_parameters: R must be >= 1");
  if (!(C > 0.0)) throw std::invalid_argument("select_parameters: C must be positive");
  const double Rt = 4.0 * R;
  const double Rt2 = Rt * Rt;
  const double Rt4 = Rt2 * Rt2;

  const double n_floor = std::pow(2.0 * Rt2, 3.0);
  double n_pow2 = 2.0;
  while (!(C * std::pow(n_pow2, -1.0 / 6.0) < 0.1)) n_pow2 *= 2.0;
  const double N = std::max(n_floor, n_pow2);

  const double budget = C * ((1.0 + std::sqrt(N)) * Rt2 + 2.0 / std::sqrt(N) * Rt4 +
                             2.0 * std::pow(N, -1.0 / 200.0) * Rt4);
  const double T = 0.9 * 0.1 / budget;

  if (!(N >= n_floor) || !(C * std::pow(n_pow2, -1.0 / 6.0) < 0.1) ||
      !(C * T * ((1.0 + std::sqrt(N)) * Rt2 + 2.0 / std::sqrt(N) * Rt4 +
                 2.0 * std::pow(N, -1.0 / 200.0) * Rt4) < 0.1)) {
    throw std::logic_error("select_parameters: self-check failed (defect)");
  }
  return SelectedParameters{N, T};
}

namespace detail {

inline void add_scaled(ModeVector& acc, cplx a, const ModeVector& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc.coeffs()[i] += a * x.coeffs()[i];
}

}  // namespace detail

/*
  Cumulative quadrature of a grid-sampled integrand: out[k] approximates the
  integral from grid[0] to grid[k].  Composite Simpson over pairs of
  intervals, trapezoid on a trailing odd interval; if trap_gap is non-null it
  receives the largest norm gap to the all-trapezoid rule (a grid-resolution
  diagnostic).
*/
inline std::vector<ModeVector> cumulative_integral(const std::vector<double>& grid,
                                                   const std::vector<ModeVector>& f,
                                                   double* trap_gap = nullptr) {
  if (grid.size() != f.size() || grid.empty()) {
    throw std::invalid_argument("cumulative_integral: grid/integrand size mismatch");
  }
  const std::size_t P = grid.size();
  const int M = f[0].window();
  std::vector<ModeVector> out(P, ModeVector(M));
  std::vector<ModeVector> trap(trap_gap ? P : 0, ModeVector(M));
  double gap = 0.0;
  for (std::size_t k = 1; k < P; ++k) {
    if (k >= 2 && (k % 2 == 0)) {
      const double h2 = grid[k] - grid[k - 2];
      out[k] = out[k - 2];
      detail::add_scaled(out[k], h2 / 6.0, f[k - 2]);
      detail::add_scaled(out[k], 4.0 * h2 / 6.0, f[k - 1]);
      detail::add_scaled(out[k], h2 / 6.0, f[k]);
    } else {
      const double h = grid[k] - grid[k - 1];
      out[k] = out[k - 1];
      detail::add_scaled(out[k], h / 2.0, f[k - 1]);
      detail::add_scaled(out[k], h / 2.0, f[k]);
    }
    if (trap_gap) {
      const double h = grid[k] - grid[k - 1];
      trap[k] = trap[k - 1];
      detail::add_scaled(trap[k], h / 2.0, f[k - 1]);
      detail::add_scaled(trap[k], h / 2.0, f[k]);
      gap = std::max(gap, l2_distance(out[k], trap[k]));
    }
  }
  if (trap_gap) *trap_gap = gap;
  return out;
}

struct GammaResult {
  Trajectory traj;
  double quad_disagreement = 0.0;
  bool grid_too_coarse = false;
};

inline GammaResult gamma_map(const Trajectory& vtraj, const ModeVector& v0,
                             const SolverConfig& cfg) {
  cfg.validate();
  validate_trajectory(vtraj);
  const std::vector<double> grid = cfg.grid();
  if (vtraj.grid.size() != grid.size()) {
    throw std::invalid_argument("gamma_map: trajectory grid does not match config");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (std::abs(vtraj.grid[k] - grid[k]) > 1e-12 * (1.0 + cfg.T)) {
      throw std::invalid_argument("gamma_map: trajectory grid does not match config");
    }
  }
  if (vtraj.states[0].window() != cfg.M || v0.window() != cfg.M) {
    throw std::invalid_argument("gamma_map: window mismatch");
  }

  const int J = cfg.J_max;
  const cplx c = nonlinearity_prefactor(cfg.sign);
  const std::size_t P = grid.size();

  // Integrand and boundary sum at every grid node.
  std::vector<ModeVector> integrand(P, ModeVector(cfg.M));
  std::vector<ModeVector> boundary(P, ModeVector(cfg.M));
  parallel_for(P, cfg.jobs, [&](std::size_t k) {
    const ModeVector& vk = vtraj.states[k];
    const double tk = grid[k];
    ModeVector f(cfg.M);
    detail::add_scaled(f, -c, resonant_r1(vk));
    detail::add_scaled(f, c, resonant_r2(vk));
    for (int g = 0; g < J; ++g) {
      OperatorSpec near{OperatorKind::Near, g, cfg.thresholds, cfg.sign};
      detail::add_scaled(f, c, eval_term(near, vk, tk));
    }
    for (int g = 1; g < J; ++g) {
      OperatorSpec res{OperatorKind::Resonant, g, cfg.thresholds, cfg.sign};
      detail::add_scaled(f, c, eval_term(res, vk, tk));
    }
    integrand[k] = std::move(f);

    ModeVector b(cfg.M);
    for (int g = 1; g < J; ++g) {
      OperatorSpec bnd{OperatorKind::Boundary, g, cfg.thresholds, cfg.sign};
      detail::add_scaled(b, c, eval_term(bnd, vk, tk));
    }
    boundary[k] = std::move(b);
  });

  ModeVector boundary0(cfg.M);
  for (int g = 1; g < J; ++g) {
    OperatorSpec bnd{OperatorKind::Boundary, g, cfg.thresholds, cfg.sign};
    detail::add_scaled(boundary0, c, eval_term(bnd, v0, 0.0));
  }

  GammaResult result;
  std::vector<ModeVector> integral = cumulative_integral(grid, integrand,
                                                         &result.quad_disagreement);
  result.grid_too_coarse = result.quad_disagreement > cfg.picard_tol / 10.0;

  result.traj.grid = grid;
  result.traj.states.reserve(P);
  for (std::size_t k = 0; k < P; ++k) {
    ModeVector out = v0;
    detail::add_scaled(out, cplx{1.0, 0.0}, boundary[k]);
    detail::add_scaled(out, cplx{-1.0, 0.0}, boundary0);
    detail::add_scaled(out, cplx{1.0, 0.0}, integral[k]);
    result.traj.states.push_back(std::move(out));
  }
  return result;
}

struct PicardDiagnostics {
  std::vector<double> residuals;  // sup-in-time distance between iterates
  std::vector<double> ratios;     // successive residual ratios
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  double quad_disagreement = 0.0;
  bool grid_too_coarse = false;

  double contraction_ratio() const {
    double r = 0.0;
    for (double x : ratios) r = std::max(r, x);
    return r;
  }
};

struct PicardResult {
  Trajectory traj;
  PicardDiagnostics diag;
};

inline PicardResult picard_solve(const ModeVector& v0, const SolverConfig& cfg) {
  cfg.validate();
  PicardResult result;
  Trajectory cur;
  cur.grid = cfg.grid();
  cur.states.assign(cur.grid.size(), v0);

  int growth_streak = 0;
  for (int it = 1; it <= cfg.picard_max_iters; ++it) {
    GammaResult g = gamma_map(cur, v0, cfg);
    result.diag.quad_disagreement =
        std::max(result.diag.quad_disagreement, g.quad_disagreement);
    result.diag.grid_too_coarse |= g.grid_too_coarse;
    const double res = sup_l2_distance(g.traj, cur);
    if (!result.diag.residuals.empty() && result.diag.residuals.back() > 0.0) {
      result.diag.ratios.push_back(res / result.diag.residuals.back());
    }
    result.diag.residuals.push_back(res);
    result.diag.iterations = it;
    cur = std::move(g.traj);

    if (res < cfg.picard_tol) {
      result.diag.converged = true;
      break;
    }
    if (result.diag.residuals.size() >= 2 &&
        res > result.diag.residuals[result.diag.residuals.size() - 2]) {
      if (++growth_streak >= 3) {
        result.diag.diverged = true;
        break;
      }
    } else {
      growth_streak = 0;
    }
  }
  result.traj = std::move(cur);
  return result;
}

struct LipschitzResult {
  double ratio = 0.0;
  bool identical_inputs = false;
  PicardDiagnostics diag_a, diag_b;
};

inline LipschitzResult lipschitz_probe(const ModeVector& v0, const ModeVector& w0,
                                       const SolverConfig& cfg) {
  LipschitzResult out;
  const double d0 = l2_distance(v0, w0);
  if (d0 == 0.0) {
    out.identical_inputs = true;
    return out;
  }
  PicardResult a = picard_solve(v0, cfg);
  PicardResult b = picard_solve(w0, cfg);
  out.diag_a = a.diag;
  out.diag_b = b.diag;
  out.ratio = sup_l2_distance(a.traj, b.traj) / d0;
  return out;
}

/*
  Doubles the quadrature grid until one application of the map to the constant
  trajectory moves by less than picard_tol/10 between resolutions (compared on
  the shared coarse nodes).  Returns the accepted node count.
*/
inline int refine_grid_points(const ModeVector& v0, SolverConfig cfg,
                              int max_doublings = 6) {
  cfg.validate();
  auto run = [&](int points) {
    SolverConfig c = cfg;
    c.grid_points = points;
    Trajectory constant;
    constant.grid = c.grid();
    constant.states.assign(constant.grid.size(), v0);
    return gamma_map(constant, v0, c).traj;
  };
  Trajectory coarse = run(cfg.grid_points);
  int points = cfg.grid_points;
  for (int d = 0; d < max_doublings; ++d) {
    const int finer = 2 * points - 1;
    Trajectory fine = run(finer);
    double delta = 0.0;
    for (std::size_t k = 0; k < coarse.states.size(); ++k) {
      delta = std::max(delta, l2_distance(coarse.states[k], fine.states[2 * k]));
    }
    if (delta < cfg.picard_tol / 10.0) return finer;
    coarse = std::move(fine);
    points = finer;
  }
  return points;
}

}  // namespace nlsnf
