#pragma once

/*
  Frequency-side states for the cubic Schrodinger flow on the circle.

  A ModeVector holds complex coefficients v_n on the symmetric window
  n in [-M, M].  All operators in this library act on such windows; the
  window plays the role of a spectral truncation, and every consumer is
  expected to use one fixed M per computation.

  The interaction transform v_n = e^{-i n^2 t} u_n removes the free
  evolution; `interaction_transform` applies it in either direction.
*/

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsnf {

using cplx = std::complex<double>;

class ModeVector {
 public:
  ModeVector() : M_(0), c_(1, cplx{0.0, 0.0}) {}

  explicit ModeVector(int M) : M_(checked_window(M)), c_(2 * static_cast<std::size_t>(M) + 1) {}

  ModeVector(int M, std::vector<cplx> coeffs) : M_(checked_window(M)), c_(std::move(coeffs)) {
    if (c_.size() != 2 * static_cast<std::size_t>(M_) + 1) {
      throw std::invalid_argument("ModeVector: expected " + std::to_string(2 * M_ + 1) +
                                  " coefficients, got " + std::to_string(c_.size()));
    }
  }

  int window() const { return M_; }
  std::size_t size() const { return c_.size(); }

  // Coefficient at frequency n, bounds-checked.
  const cplx& at(int n) const { return c_[index_of(n)]; }
  cplx& at(int n) { return c_[index_of(n)]; }

  // Raw storage in increasing-n order (index 0 is n = -M).
  const std::vector<cplx>& coeffs() const { return c_; }
  std::vector<cplx>& coeffs() { return c_; }

  bool same_window(const ModeVector& other) const { return M_ == other.M_; }

 private:
  static int checked_window(int M) {
    if (M < 0) throw std::invalid_argument("ModeVector: window M must be non-negative");
    return M;
  }

  std::size_t index_of(int n) const {
    if (n < -M_ || n > M_) {
      throw std::out_of_range("ModeVector: frequency " + std::to_string(n) +
                              " outside window [-" + std::to_string(M_) + ", " +
                              std::to_string(M_) + "]");
    }
    return static_cast<std::size_t>(n + M_);
  }

  int M_;
  std::vector<cplx> c_;
};

inline double l2_norm_sq(const ModeVector& v) {
  double s = 0.0;
  for (const cplx& z : v.coeffs()) s += std::norm(z);
  return s;
}

inline double l2_norm(const ModeVector& v) { return std::sqrt(l2_norm_sq(v)); }

// Sobolev norm with the smoothed weight <n> = 1 + |n|.
inline double hs_norm(const ModeVector& v, double s) {
  double acc = 0.0;
  const int M = v.window();
  for (int n = -M; n <= M; ++n) {
    const double w = std::pow(1.0 + std::abs(n), 2.0 * s);
    acc += w * std::norm(v.at(n));
  }
  return std::sqrt(acc);
}

// Total intensity sum_n |v_n|^2.  This is the quantity the resonant part of
// the nonlinearity couples to; keeping it as a plain coefficient sum (no
// normalising factor) is what makes the resonant split below an exact
// identity.
inline double mean_intensity(const ModeVector& v) { return l2_norm_sq(v); }

enum class Direction {
  ToInteraction,    // u -> v: multiply mode n by e^{-i n^2 t}
  FromInteraction,  // v -> u: multiply mode n by e^{+i n^2 t}
};

inline ModeVector interaction_transform(const ModeVector& v, double t, Direction dir) {
  ModeVector out(v.window());
  const int M = v.window();
  const double sign = (dir == Direction::ToInteraction) ? -1.0 : 1.0;
  for (int n = -M; n <= M; ++n) {
    const double theta = sign * static_cast<double>(n) * static_cast<double>(n) * t;
    out.at(n) = std::polar(1.0, theta) * v.at(n);
  }
  return out;
}

// Time samples of a mode-vector path on a shared window.
struct Trajectory {
  std::vector<double> grid;
  std::vector<ModeVector> states;
};

inline void validate_trajectory(const Trajectory& traj) {
  if (traj.grid.size() != traj.states.size()) {
    throw std::invalid_argument("Trajectory: grid and states lengths differ");
  }
  if (traj.grid.empty()) throw std::invalid_argument("Trajectory: empty");
  for (std::size_t i = 0; i + 1 < traj.grid.size(); ++i) {
    if (!(traj.grid[i] < traj.grid[i + 1])) {
      throw std::invalid_argument("Trajectory: grid must be strictly increasing");
    }
  }
  for (const ModeVector& s : traj.states) {
    if (!s.same_window(traj.states.front())) {
      throw std::invalid_argument("Trajectory: states on mismatched windows");
    }
  }
}

inline double l2_distance(const ModeVector& a, const ModeVector& b) {
  if (!a.same_window(b)) throw std::invalid_argument("l2_distance: window mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.coeffs()[i] - b.coeffs()[i]);
  return std::sqrt(s);
}

// sup-in-time L^2 distance of two trajectories sampled on the same grid.
inline double sup_l2_distance(const Trajectory& a, const Trajectory& b) {
  if (a.grid.size() != b.grid.size()) {
    throw std::invalid_argument("sup_l2_distance: grids have different lengths");
  }
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    if (std::abs(a.grid[i] - b.grid[i]) > 1e-12 * (1.0 + std::abs(a.grid[i]))) {
      throw std::invalid_argument("sup_l2_distance: grids differ");
    }
  }
  double best = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    best = std::max(best, l2_distance(a.states[i], b.states[i]));
  }
  return best;
}

}  // namespace nlsnf
