#pragma once

/*
  Reference ODE solver: Dormand-Prince 5(4) with the classic dense-output
  interpolant and first-same-as-last stage reuse.

  Step control is error-per-unit-step: a step of size h is accepted when the
  scaled error estimate is at most h / span, so the accumulated error over the
  whole integration stays near the requested tolerance instead of growing with
  the step count.  That is what makes the solver usable as a ground-truth
  oracle for identity checks: with rtol = 1e-10 the endpoint error of a
  well-conditioned problem lands around 1e-10, not 1e-10 times the number of
  steps.

  Right sides are written here with their own loops (solved middle index, no
  shared code with the operator engine), so agreement between this solver and
  the tree-indexed machinery is a genuine cross-check.  Both mode formulations
  are available:

    Interaction  d/dt v_n = prefactor * sum e^{-i phase t} v v~ v
    Original     d/dt u_n = i n^2 u_n + prefactor * sum u u~ u

  and integrate_modes always reports interaction-picture states, converting on
  evaluation when the underlying run used the original picture.
*/

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nlsnf/equation.hpp"
#include "nlsnf/mode_vector.hpp"

namespace nlsnf {

using State = std::vector<cplx>;

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 5.0;
  std::uint64_t max_steps = 20'000'000;

  void validate() const {
    if (!(rtol > 0) || !(atol >= 0)) {
      throw std::invalid_argument("IntegratorOptions: tolerances out of range");
    }
    if (!(safety > 0 && safety < 1) || !(min_factor > 0) ||
        !(max_factor > 1) || max_steps == 0) {
      throw std::invalid_argument("IntegratorOptions: control parameters out of range");
    }
  }
};

namespace detail {

// Dormand-Prince coefficients, error weights, and dense-output weights.
inline constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA21 = 1.0 / 5;
inline constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
inline constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
inline constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                        kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
inline constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                        kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                        kA65 = -5103.0 / 18656;
inline constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                        kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
inline constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                        kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
inline constexpr double kD1 = -12715105075.0 / 11282082432.0,
                        kD3 = 87487479700.0 / 32700410799.0,
                        kD4 = -10690763975.0 / 1880347072.0,
                        kD5 = 701980252875.0 / 199316789632.0,
                        kD6 = -1453857185.0 / 822651844.0,
                        kD7 = 69997945.0 / 29380423.0;

}  // namespace detail

// One accepted step's interpolation data: on [t, t + h],
// y(t + s h) = r1 + s (r2 + (1 - s)(r3 + s (r4 + (1 - s) r5))).
struct DenseSegment {
  double t = 0.0;
  double h = 0.0;
  State r1, r2, r3, r4, r5;
};

class DenseOde {
 public:
  DenseOde() = default;
  DenseOde(double t0, double t1, std::vector<DenseSegment> segments)
      : t0_(t0), t1_(t1), segments_(std::move(segments)) {
    if (segments_.empty()) throw std::invalid_argument("DenseOde: no segments");
  }

  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }
  std::size_t steps() const { return segments_.size(); }

  State eval(double t) const {
    const double slack = 1e-12 * (std::abs(t0_) + std::abs(t1_) + std::abs(t1_ - t0_));
    if (t < t0_ - slack || t > t1_ + slack) {
      throw std::out_of_range("DenseOde: time outside the integrated span");
    }
    const double tc = std::clamp(t, t0_, t1_);
    // First segment whose start lies past tc, then step back one.
    auto it = std::upper_bound(segments_.begin(), segments_.end(), tc,
                               [](double x, const DenseSegment& s) { return x < s.t; });
    if (it != segments_.begin()) --it;
    const DenseSegment& s = *it;
    const double theta = s.h > 0 ? std::clamp((tc - s.t) / s.h, 0.0, 1.0) : 0.0;
    State out(s.r1.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = s.r1[i] +
               theta * (s.r2[i] + (1.0 - theta) *
                                      (s.r3[i] + theta * (s.r4[i] + (1.0 - theta) * s.r5[i])));
    }
    return out;
  }

 private:
  double t0_ = 0.0, t1_ = 0.0;
  std::vector<DenseSegment> segments_;
};

/*
  Adaptive integration of dy/dt = rhs(t, y) from t0 to t1 (t1 >= t0).
  rhs(t, y, dy) must fill dy; it may not resize y.  Throws on step-size
  underflow or when max_steps is exceeded.
*/
template <class Rhs>
DenseOde integrate_ode(Rhs&& rhs, State y0, double t0, double t1,
                       const IntegratorOptions& opt = {}) {
  using namespace detail;
  opt.validate();
  if (!(t1 >= t0)) throw std::invalid_argument("integrate_ode: t1 must be >= t0");
  const std::size_t n = y0.size();
  if (n == 0) throw std::invalid_argument("integrate_ode: empty state");
  const double span = t1 - t0;

  std::vector<DenseSegment> segments;
  if (span == 0.0) {
    DenseSegment s;
    s.t = t0;
    s.h = 0.0;
    s.r1 = y0;
    s.r2.assign(n, cplx{});
    s.r3.assign(n, cplx{});
    s.r4.assign(n, cplx{});
    s.r5.assign(n, cplx{});
    segments.push_back(std::move(s));
    return DenseOde(t0, t1, std::move(segments));
  }

  State y = std::move(y0);
  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), work(n), ynew(n);
  rhs(t0, y, k1);

  // Initial step from the size of the right side; the controller corrects it
  // within a few steps either way.
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = opt.atol + opt.rtol * std::abs(y[i]);
    d0 += std::norm(y[i] / sc);
    d1 += std::norm(k1[i] / sc);
  }
  double h = (d1 > 0.0 && d0 > 0.0) ? 0.01 * std::sqrt(d0 / d1) : span * 1e-6;
  h = std::clamp(h, span * 1e-12, span);

  double t = t0;
  std::uint64_t steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps) {
      throw std::runtime_error("integrate_ode: step budget exhausted");
    }
    h = std::min(h, t1 - t);
    if (!(h > std::abs(t) * 1e-15 + span * 1e-15)) {
      throw std::runtime_error("integrate_ode: step size underflow");
    }

    for (std::size_t i = 0; i < n; ++i) work[i] = y[i] + h * (kA21 * k1[i]);
    rhs(t + kC[1] * h, work, k2);
    for (std::size_t i = 0; i < n; ++i) {
      work[i] = y[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
    }
    rhs(t + kC[2] * h, work, k3);
    for (std::size_t i = 0; i < n; ++i) {
      work[i] = y[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
    }
    rhs(t + kC[3] * h, work, k4);
    for (std::size_t i = 0; i < n; ++i) {
      work[i] = y[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
    }
    rhs(t + kC[4] * h, work, k5);
    for (std::size_t i = 0; i < n; ++i) {
      work[i] = y[i] + h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] + kA64 * k4[i] +
                            kA65 * k5[i]);
    }
    rhs(t + h, work, k6);
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] + kB5 * k5[i] +
                            kB6 * k6[i]);
    }
    rhs(t + h, ynew, k7);

    double errsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                          kE6 * k6[i] + kE7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      errsq += std::norm(e / sc);
    }
    const double err = std::sqrt(errsq / static_cast<double>(n));
    const double threshold = h / span;
    const double factor =
        opt.safety * std::pow(threshold / std::max(err, 1e-300), 0.25);

    if (err <= threshold) {
      DenseSegment s;
      s.t = t;
      s.h = h;
      s.r1 = y;
      s.r2.resize(n);
      s.r3.resize(n);
      s.r4.resize(n);
      s.r5.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const cplx ydiff = ynew[i] - y[i];
        const cplx bspl = h * k1[i] - ydiff;
        s.r2[i] = ydiff;
        s.r3[i] = bspl;
        s.r4[i] = ydiff - h * k7[i] - bspl;
        s.r5[i] = h * (kD1 * k1[i] + kD3 * k3[i] + kD4 * k4[i] + kD5 * k5[i] +
                       kD6 * k6[i] + kD7 * k7[i]);
      }
      segments.push_back(std::move(s));
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // first-same-as-last
      h *= std::clamp(factor, opt.min_factor, opt.max_factor);
    } else {
      h *= std::clamp(factor, opt.min_factor, opt.safety);
    }
  }
  return DenseOde(t0, t1, std::move(segments));
}

enum class Formulation { Interaction, Original };

namespace detail {

// Plain-loop right sides with the middle index solved from the other two.
inline void interaction_rhs(const State& y, double t, int M, cplx prefactor, State& dy) {
  std::fill(dy.begin(), dy.end(), cplx{});
  for (int n = -M; n <= M; ++n) {
    cplx acc{};
    for (int n1 = -M; n1 <= M; ++n1) {
      for (int n3 = -M; n3 <= M; ++n3) {
        const int n2 = n1 + n3 - n;
        if (n2 < -M || n2 > M) continue;
        const double phi = 2.0 * (n - n1) * (n - n3);
        acc += std::polar(1.0, -phi * t) * y[static_cast<std::size_t>(n1 + M)] *
               std::conj(y[static_cast<std::size_t>(n2 + M)]) *
               y[static_cast<std::size_t>(n3 + M)];
      }
    }
    dy[static_cast<std::size_t>(n + M)] = prefactor * acc;
  }
}

inline void original_rhs(const State& y, int M, cplx prefactor, State& dy) {
  for (int n = -M; n <= M; ++n) {
    cplx acc{};
    for (int n1 = -M; n1 <= M; ++n1) {
      for (int n3 = -M; n3 <= M; ++n3) {
        const int n2 = n1 + n3 - n;
        if (n2 < -M || n2 > M) continue;
        acc += y[static_cast<std::size_t>(n1 + M)] *
               std::conj(y[static_cast<std::size_t>(n2 + M)]) *
               y[static_cast<std::size_t>(n3 + M)];
      }
    }
    const double nsq = static_cast<double>(n) * n;
    dy[static_cast<std::size_t>(n + M)] =
        cplx(0.0, nsq) * y[static_cast<std::size_t>(n + M)] + prefactor * acc;
  }
}

}  // namespace detail

// Mode-space trajectory with dense evaluation, always reported in the
// interaction picture.
class DenseTrajectory {
 public:
  DenseTrajectory(DenseOde ode, int window, Formulation form)
      : ode_(std::move(ode)), window_(window), form_(form) {}

  double t_begin() const { return ode_.t_begin(); }
  double t_end() const { return ode_.t_end(); }
  std::size_t steps() const { return ode_.steps(); }
  int window() const { return window_; }

  ModeVector eval(double t) const {
    ModeVector v(window_, ode_.eval(t));
    if (form_ == Formulation::Original) {
      return interaction_transform(v, t, Direction::ToInteraction);
    }
    return v;
  }

  Trajectory sample(const std::vector<double>& grid) const {
    Trajectory tr;
    tr.grid = grid;
    tr.states.reserve(grid.size());
    for (double t : grid) tr.states.push_back(eval(t));
    validate_trajectory(tr);
    return tr;
  }

 private:
  DenseOde ode_;
  int window_;
  Formulation form_;
};

/*
  Integrate the windowed cubic system from interaction-picture data v0 at t0.
  The original-picture run converts the data on entry and converts back on
  evaluation, so both formulations expose the same quantity.
*/
inline DenseTrajectory integrate_modes(const ModeVector& v0, double t0, double t1,
                                       SignConvention sign, Formulation form,
                                       const IntegratorOptions& opt = {}) {
  const int M = v0.window();
  const cplx c = nonlinearity_prefactor(sign);
  if (form == Formulation::Interaction) {
    auto rhs = [M, c](double t, const State& y, State& dy) {
      detail::interaction_rhs(y, t, M, c, dy);
    };
    return DenseTrajectory(integrate_ode(rhs, v0.coeffs(), t0, t1, opt), M, form);
  }
  const ModeVector u0 = interaction_transform(v0, t0, Direction::FromInteraction);
  auto rhs = [M, c](double, const State& y, State& dy) {
    detail::original_rhs(y, M, c, dy);
  };
  return DenseTrajectory(integrate_ode(rhs, u0.coeffs(), t0, t1, opt), M, form);
}

}  // namespace nlsnf
