#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nlsnf/operators.hpp"
#include "nlsnf/rng.hpp"

using namespace nlsnf;

namespace {

// Independent oracles: plain nested loops over quadruples, no tree machinery.
// Root parity is plain; the three children carry (plain, conj, plain).

ModeVector gen1_family_oracle(const ModeVector& v, double t, double N, int mode) {
  // mode 0: |phase| <= N, mode 1: |phase| > N, mode 2: no cut.
  const int M = v.window();
  ModeVector out(M);
  for (int n1 = -M; n1 <= M; ++n1) {
    for (int n2 = -M; n2 <= M; ++n2) {
      for (int n3 = -M; n3 <= M; ++n3) {
        if (n2 == n1 || n2 == n3) continue;
        const int n = n1 - n2 + n3;
        if (n < -M || n > M) continue;
        const double phi = 2.0 * (n - n1) * (n - n3);
        if (mode == 0 && !(std::abs(phi) <= N)) continue;
        if (mode == 1 && !(std::abs(phi) > N)) continue;
        out.at(n) += std::polar(1.0, -phi * t) * v.at(n1) * std::conj(v.at(n2)) * v.at(n3);
      }
    }
  }
  return out;
}

ModeVector boundary1_oracle(const ModeVector& v, double t, double N) {
  const int M = v.window();
  ModeVector out(M);
  for (int n1 = -M; n1 <= M; ++n1) {
    for (int n2 = -M; n2 <= M; ++n2) {
      for (int n3 = -M; n3 <= M; ++n3) {
        if (n2 == n1 || n2 == n3) continue;
        const int n = n1 - n2 + n3;
        if (n < -M || n > M) continue;
        const double phi = 2.0 * (n - n1) * (n - n3);
        if (!(std::abs(phi) > N)) continue;
        const cplx w = cplx(0.0, 1.0 / phi) * std::polar(1.0, -phi * t);
        out.at(n) += w * v.at(n1) * std::conj(v.at(n2)) * v.at(n3);
      }
    }
  }
  return out;
}

ModeVector resonant1_oracle(const ModeVector& v, double t, double N, SignConvention sign) {
  const int M = v.window();
  const cplx c = nonlinearity_prefactor(sign);
  const double intensity = mean_intensity(v);
  const auto rho = [&](int m) {
    return (std::norm(v.at(m)) - 2.0 * intensity) * v.at(m);
  };
  ModeVector out(M);
  for (int n1 = -M; n1 <= M; ++n1) {
    for (int n2 = -M; n2 <= M; ++n2) {
      for (int n3 = -M; n3 <= M; ++n3) {
        if (n2 == n1 || n2 == n3) continue;
        const int n = n1 - n2 + n3;
        if (n < -M || n > M) continue;
        const double phi = 2.0 * (n - n1) * (n - n3);
        if (!(std::abs(phi) > N)) continue;
        const cplx w = cplx(0.0, 1.0 / phi) * std::polar(1.0, -phi * t);
        cplx ins = c * rho(n1) * std::conj(v.at(n2)) * v.at(n3);
        ins += std::conj(c) * std::conj(rho(n2)) * v.at(n1) * v.at(n3);
        ins += c * rho(n3) * v.at(n1) * std::conj(v.at(n2));
        out.at(n) += w * ins;
      }
    }
  }
  return out;
}

// Two-generation sums: expand each child of the first quadruple in turn.
// mode 0: stage-1 window test on the running sum, mode 1: its complement,
// mode 2: no last-stage cut.
ModeVector gen2_family_oracle(const ModeVector& v, double t, const ThresholdConfig& cfg,
                              SignConvention sign, int mode) {
  const int M = v.window();
  const cplx c = nonlinearity_prefactor(sign);
  ModeVector out(M);
  const auto amp = [&](int m, bool plain) {
    return plain ? v.at(m) : std::conj(v.at(m));
  };
  for (int n1 = -M; n1 <= M; ++n1) {
    for (int n2 = -M; n2 <= M; ++n2) {
      for (int n3 = -M; n3 <= M; ++n3) {
        if (n2 == n1 || n2 == n3) continue;
        const int n = n1 - n2 + n3;
        if (n < -M || n > M) continue;
        const double mu1 = 2.0 * (n - n1) * (n - n3);
        if (!(std::abs(mu1) > cfg.N)) continue;
        for (int slot = 1; slot <= 3; ++slot) {
          const int e = slot == 1 ? n1 : (slot == 2 ? n2 : n3);
          const bool parent_plain = (slot != 2);
          for (int a = -M; a <= M; ++a) {
            for (int b = -M; b <= M; ++b) {
              const int mid = a + b - e;
              if (mid < -M || mid > M || mid == a || mid == b) continue;
              const double raw = 2.0 * (e - a) * (e - b);
              const double mu2 = parent_plain ? raw : -raw;
              const double mt2 = mu1 + mu2;
              if (mode != 2) {
                const bool inside =
                    std::abs(mt2) <= cfg.lead_constant * 125.0 *
                                         std::pow(std::abs(mu1), 1.0 - cfg.alpha);
                if (mode == 0 && !inside) continue;
                if (mode == 1 && inside) continue;
              }
              const cplx kappa = parent_plain ? c : std::conj(c);
              cplx w = -kappa * cplx(0.0, 1.0 / mu1) * std::polar(1.0, -mt2 * t);
              cplx prod;
              if (slot == 1) {
                prod = amp(a, true) * amp(mid, false) * amp(b, true) *
                       std::conj(v.at(n2)) * v.at(n3);
              } else if (slot == 2) {
                prod = amp(a, false) * amp(mid, true) * amp(b, false) *
                       v.at(n1) * v.at(n3);
              } else {
                prod = amp(a, true) * amp(mid, false) * amp(b, true) *
                       v.at(n1) * std::conj(v.at(n2));
              }
              out.at(n) += w * prod;
            }
          }
        }
      }
    }
  }
  return out;
}

double max_mode_diff(const ModeVector& a, const ModeVector& b) {
  REQUIRE(a.window() == b.window());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  }
  return m;
}

ModeVector two_mode_vector() {
  ModeVector v(2);
  v.at(0) = cplx(1.0, 0.0);
  v.at(1) = cplx(1.0, 0.0);
  return v;
}

}  // namespace

TEST_CASE("literal right side on the two-mode example") {
  const ModeVector v = two_mode_vector();
  ModeVector f = full_nonlinearity(v, 0.0, SignConvention::Defocusing);
  REQUIRE(f.at(-2) == cplx(0.0, 0.0));
  REQUIRE(std::abs(f.at(-1) - cplx(0.0, 1.0)) < 1e-15);
  REQUIRE(std::abs(f.at(0) - cplx(0.0, 3.0)) < 1e-15);
  REQUIRE(std::abs(f.at(1) - cplx(0.0, 3.0)) < 1e-15);
  REQUIRE(std::abs(f.at(2) - cplx(0.0, 1.0)) < 1e-15);

  ModeVector g = full_nonlinearity(v, 0.0, SignConvention::Focusing);
  REQUIRE(std::abs(g.at(0) + cplx(0.0, 3.0)) < 1e-15);

  // Away from t = 0 only the phase-2 quadruples rotate.
  const double t = 0.25;
  ModeVector h = full_nonlinearity(v, t, SignConvention::Defocusing);
  const cplx expect = cplx(0.0, 1.0) * std::polar(1.0, -2.0 * t);
  REQUIRE(std::abs(h.at(-1) - expect) < 1e-15);
  REQUIRE(std::abs(h.at(2) - expect) < 1e-15);
  REQUIRE(std::abs(h.at(0) - cplx(0.0, 3.0)) < 1e-15);
}

TEST_CASE("diagonal and total-intensity resonant parts") {
  const ModeVector v = two_mode_vector();
  ModeVector r1 = resonant_r1(v);
  REQUIRE(r1.at(0) == cplx(1.0, 0.0));
  REQUIRE(r1.at(1) == cplx(1.0, 0.0));
  REQUIRE(r1.at(2) == cplx(0.0, 0.0));
  ModeVector r2 = resonant_r2(v);
  REQUIRE(r2.at(0) == cplx(4.0, 0.0));
  REQUIRE(r2.at(1) == cplx(4.0, 0.0));
  REQUIRE(r2.at(-1) == cplx(0.0, 0.0));

  ModeVector u(1);
  u.at(-1) = cplx(0.0, 2.0);
  REQUIRE(resonant_r1(u).at(-1) == cplx(0.0, 8.0));
  REQUIRE(resonant_r2(u).at(-1) == cplx(0.0, 16.0));
}

TEST_CASE("resonant split reproduces the literal right side") {
  Rng rng(11);
  for (SignConvention s : {SignConvention::Defocusing, SignConvention::Focusing}) {
    ModeVector v = random_l2_vector(4, 1.3, rng);
    const double r = gauge_decomposition_check(v, 0.45, s);
    REQUIRE(r < 1e-12);
  }
}

TEST_CASE("level-0 split on the two-mode example") {
  const ModeVector v = two_mode_vector();
  const double t = 0.3;
  ThresholdConfig cfg;
  cfg.N = 2;
  N1Split s = decompose_N1(v, t, cfg);
  const cplx osc = std::polar(1.0, -2.0 * t);
  REQUIRE(std::abs(s.below.at(-1) - osc) < 1e-15);
  REQUIRE(std::abs(s.below.at(2) - osc) < 1e-15);
  REQUIRE(std::abs(s.below.at(0)) < 1e-15);
  REQUIRE(l2_norm(s.above) < 1e-15);

  cfg.N = 1;
  N1Split s2 = decompose_N1(v, t, cfg);
  REQUIRE(l2_norm(s2.below) < 1e-15);
  REQUIRE(std::abs(s2.above.at(-1) - osc) < 1e-15);
  REQUIRE(std::abs(s2.above.at(2) - osc) < 1e-15);
}

TEST_CASE("first-generation family kinds against the loop oracle") {
  Rng rng(5);
  ModeVector v = random_l2_vector(4, 1.1, rng);
  const double t = 0.7;
  for (double N : {0.0, 2.0, 4.0, 8.0}) {
    ThresholdConfig cfg;
    cfg.N = N;
    OperatorSpec near{OperatorKind::Near, 0, cfg, SignConvention::Defocusing};
    OperatorSpec res{OperatorKind::Residual, 0, cfg, SignConvention::Defocusing};
    OperatorSpec rem{OperatorKind::Remainder, 0, cfg, SignConvention::Defocusing};
    REQUIRE(max_mode_diff(eval_term(near, v, t), gen1_family_oracle(v, t, N, 0)) < 1e-13);
    REQUIRE(max_mode_diff(eval_term(res, v, t), gen1_family_oracle(v, t, N, 1)) < 1e-13);
    REQUIRE(max_mode_diff(eval_term(rem, v, t), gen1_family_oracle(v, t, N, 2)) < 1e-13);
  }
}

TEST_CASE("boundary and resonant kinds against the loop oracles") {
  Rng rng(6);
  ModeVector v = random_l2_vector(4, 0.9, rng);
  const double t = 0.2;
  for (SignConvention s : {SignConvention::Defocusing, SignConvention::Focusing}) {
    for (double N : {0.0, 2.0, 6.0}) {
      ThresholdConfig cfg;
      cfg.N = N;
      OperatorSpec b{OperatorKind::Boundary, 1, cfg, s};
      OperatorSpec r{OperatorKind::Resonant, 1, cfg, s};
      REQUIRE(max_mode_diff(eval_term(b, v, t), boundary1_oracle(v, t, N)) < 1e-13);
      REQUIRE(max_mode_diff(eval_term(r, v, t), resonant1_oracle(v, t, N, s)) < 1e-13);
    }
  }
}

TEST_CASE("two-generation kinds against the nested loop oracle") {
  Rng rng(8);
  ModeVector v = random_l2_vector(3, 1.0, rng);
  const double t = 0.15;
  ThresholdConfig cfg;
  cfg.N = 2;
  cfg.alpha = 0.01;
  cfg.lead_constant = 0.02;
  for (SignConvention s : {SignConvention::Defocusing, SignConvention::Focusing}) {
    OperatorSpec near{OperatorKind::Near, 1, cfg, s};
    OperatorSpec res{OperatorKind::Residual, 1, cfg, s};
    OperatorSpec rem{OperatorKind::Remainder, 1, cfg, s};
    const ModeVector near_ev = eval_term(near, v, t);
    const ModeVector res_ev = eval_term(res, v, t);
    const ModeVector rem_ev = eval_term(rem, v, t);
    REQUIRE(max_mode_diff(near_ev, gen2_family_oracle(v, t, cfg, s, 0)) < 1e-12);
    REQUIRE(max_mode_diff(res_ev, gen2_family_oracle(v, t, cfg, s, 1)) < 1e-12);
    REQUIRE(max_mode_diff(rem_ev, gen2_family_oracle(v, t, cfg, s, 2)) < 1e-12);
    // The split is exact term by term, so the sum matches the uncut kind.
    REQUIRE(l2_norm(near_ev) > 1e-6);  // cut is non-trivial at this config
    REQUIRE(l2_norm(res_ev) > 1e-6);
    for (int n = -3; n <= 3; ++n) {
      REQUIRE(std::abs(near_ev.at(n) + res_ev.at(n) - rem_ev.at(n)) < 1e-12);
    }
  }
}

TEST_CASE("reciprocal phase weights on hand-picked assignments") {
  ModeVector v(2);
  v.at(0) = cplx(0.3, 0.1);
  v.at(1) = cplx(-0.2, 0.4);
  v.at(2) = cplx(0.1, -0.1);
  OperatorSpec spec{OperatorKind::Boundary, 1, ThresholdConfig{}, SignConvention::Defocusing};
  auto trees = enumerate_trees(1);
  std::map<std::vector<int>, cplx> weights;
  scan_operator(spec, trees, v, 0.0, 0,
                [&](std::size_t, const std::vector<int>& freq,
                    const std::vector<std::int64_t>&, const std::vector<std::int64_t>&,
                    cplx w, cplx) { weights[freq] = w; });
  REQUIRE(weights.count({0, 1, 2, 1}) == 1);
  REQUIRE(std::abs(weights[{0, 1, 2, 1}] - cplx(0.0, 0.5)) < 1e-15);
  REQUIRE(weights.count({0, -1, 0, 1}) == 1);
  REQUIRE(std::abs(weights[{0, -1, 0, 1}] - cplx(0.0, -0.5)) < 1e-15);
  // Same assignment under the oscillatory factor at t != 0.
  const double t = 0.4;
  scan_operator(spec, trees, v, t, 0,
                [&](std::size_t, const std::vector<int>& freq,
                    const std::vector<std::int64_t>&, const std::vector<std::int64_t>&,
                    cplx w, cplx) { weights[freq] = w; });
  const cplx expect = cplx(0.0, 0.5) * std::polar(1.0, -2.0 * t);
  REQUIRE(std::abs(weights[{0, 1, 2, 1}] - expect) < 1e-15);
}

TEST_CASE("boundary kind on the two-mode example carries half-weights") {
  const ModeVector v = two_mode_vector();
  ThresholdConfig cfg;
  cfg.N = 1;
  OperatorSpec spec{OperatorKind::Boundary, 1, cfg, SignConvention::Defocusing};
  ModeVector out = eval_term(spec, v, 0.0);
  REQUIRE(std::abs(out.at(-1) - cplx(0.0, 0.5)) < 1e-15);
  REQUIRE(std::abs(out.at(2) - cplx(0.0, 0.5)) < 1e-15);
  REQUIRE(std::abs(out.at(0)) < 1e-15);
  REQUIRE(std::abs(out.at(1)) < 1e-15);
}

TEST_CASE("assignment counts for the boundary kind at a tiny window") {
  ThresholdConfig cfg;  // N = 0
  OperatorSpec spec{OperatorKind::Boundary, 1, cfg, SignConvention::Defocusing};
  REQUIRE(count_operator_assignments(spec, 1, -1) == 1);
  REQUIRE(count_operator_assignments(spec, 1, 0) == 2);
  REQUIRE(count_operator_assignments(spec, 1, 1) == 1);
  cfg.N = 2;  // every first phase in the window has magnitude exactly 2
  spec.thresholds = cfg;
  REQUIRE(count_operator_assignments(spec, 1, 0) == 0);
}

TEST_CASE("kind dichotomy at the counting level") {
  ThresholdConfig cfg;
  cfg.N = 2;
  cfg.alpha = 0.01;
  cfg.lead_constant = 0.02;
  for (int g : {0, 1, 2}) {
    for (int M : {2, 3}) {
      if (g == 2 && M == 3) continue;  // keep the test quick
      for (int root = -M; root <= M; ++root) {
        OperatorSpec near{OperatorKind::Near, g, cfg, SignConvention::Defocusing};
        OperatorSpec res{OperatorKind::Residual, g, cfg, SignConvention::Defocusing};
        OperatorSpec rem{OperatorKind::Remainder, g, cfg, SignConvention::Defocusing};
        REQUIRE(count_operator_assignments(near, M, root) +
                    count_operator_assignments(res, M, root) ==
                count_operator_assignments(rem, M, root));
      }
    }
  }
}

TEST_CASE("phase rotation covariance of every tree-indexed kind") {
  Rng rng(17);
  ModeVector v = random_l2_vector(3, 1.2, rng);
  const double theta = 0.9;
  ModeVector w(v.window());
  for (std::size_t i = 0; i < v.size(); ++i) {
    w.coeffs()[i] = std::polar(1.0, theta) * v.coeffs()[i];
  }
  ThresholdConfig cfg;
  cfg.N = 2;
  cfg.lead_constant = 0.02;
  const double t = 0.35;
  const std::vector<OperatorSpec> specs = {
      {OperatorKind::Near, 1, cfg, SignConvention::Defocusing},
      {OperatorKind::Residual, 1, cfg, SignConvention::Defocusing},
      {OperatorKind::Remainder, 0, cfg, SignConvention::Defocusing},
      {OperatorKind::Boundary, 1, cfg, SignConvention::Defocusing},
      {OperatorKind::Boundary, 2, cfg, SignConvention::Focusing},
      {OperatorKind::Resonant, 1, cfg, SignConvention::Defocusing},
  };
  for (const OperatorSpec& spec : specs) {
    ModeVector base = eval_term(spec, v, t);
    ModeVector rotated = eval_term(spec, w, t);
    REQUIRE(l2_norm(base) > 1e-9);  // the comparison must not be vacuous
    for (std::size_t i = 0; i < base.size(); ++i) {
      REQUIRE(std::abs(rotated.coeffs()[i] - std::polar(1.0, theta) * base.coeffs()[i]) <
              1e-12);
    }
  }
}

TEST_CASE("homogeneity degree by kind") {
  Rng rng(19);
  ModeVector v = random_l2_vector(3, 0.8, rng);
  const double lam = 1.3;
  ModeVector w(v.window());
  for (std::size_t i = 0; i < v.size(); ++i) w.coeffs()[i] = lam * v.coeffs()[i];
  ThresholdConfig cfg;
  cfg.N = 2;
  cfg.lead_constant = 0.02;
  const double t = 0.5;

  struct Case {
    OperatorSpec spec;
    int degree;
  };
  const std::vector<Case> cases = {
      {{OperatorKind::Remainder, 0, cfg, SignConvention::Defocusing}, 3},
      {{OperatorKind::Near, 1, cfg, SignConvention::Defocusing}, 5},
      {{OperatorKind::Boundary, 1, cfg, SignConvention::Defocusing}, 3},
      {{OperatorKind::Boundary, 2, cfg, SignConvention::Defocusing}, 5},
      {{OperatorKind::Resonant, 1, cfg, SignConvention::Defocusing}, 5},
      {{OperatorKind::Resonant, 2, cfg, SignConvention::Defocusing}, 7},
  };
  for (const Case& c : cases) {
    ModeVector base = eval_term(c.spec, v, t);
    ModeVector scaled = eval_term(c.spec, w, t);
    REQUIRE(l2_norm(base) > 1e-9);
    const double factor = std::pow(lam, c.degree);
    for (std::size_t i = 0; i < base.size(); ++i) {
      REQUIRE(std::abs(scaled.coeffs()[i] - factor * base.coeffs()[i]) <
              1e-11 * factor);
    }
  }
}

TEST_CASE("conjugate-symmetric data keeps the right side conjugate-symmetric") {
  Rng rng(23);
  ModeVector v(4);
  v.at(0) = cplx(rng.normal(), 0.0);
  for (int n = 1; n <= 4; ++n) {
    v.at(n) = rng.cnormal();
    v.at(-n) = std::conj(v.at(n));
  }
  for (SignConvention s : {SignConvention::Defocusing, SignConvention::Focusing}) {
    ModeVector f = full_nonlinearity(v, 0.0, s);
    const cplx cbar = std::conj(nonlinearity_prefactor(s));
    for (int n = 0; n <= 4; ++n) {
      const cplx hn = cbar * f.at(n);
      const cplx hm = cbar * f.at(-n);
      REQUIRE(std::abs(hm - std::conj(hn)) < 1e-13);
    }
  }
}

TEST_CASE("parallel evaluation is bitwise identical to serial") {
  Rng rng(29);
  ModeVector v = random_l2_vector(3, 1.0, rng);
  ThresholdConfig cfg;
  cfg.N = 2;
  OperatorSpec spec{OperatorKind::Boundary, 2, cfg, SignConvention::Defocusing};
  ModeVector serial = eval_term(spec, v, 0.3, 1);
  ModeVector parallel = eval_term(spec, v, 0.3, 3);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    REQUIRE(serial.coeffs()[i] == parallel.coeffs()[i]);
  }
}

TEST_CASE("spec validation for each kind") {
  ThresholdConfig cfg;
  OperatorSpec spec{OperatorKind::Near, -1, cfg, SignConvention::Defocusing};
  REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {OperatorKind::Boundary, 0, cfg, SignConvention::Defocusing};
  REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {OperatorKind::Resonant, 0, cfg, SignConvention::Defocusing};
  REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {OperatorKind::Near, 0, cfg, SignConvention::Defocusing};
  REQUIRE_NOTHROW(spec.validate());
  spec = {OperatorKind::Boundary, 1, cfg, SignConvention::Defocusing};
  REQUIRE_NOTHROW(spec.validate());

  REQUIRE(OperatorSpec{OperatorKind::Near, 0}.tree_generation() == 1);
  REQUIRE(OperatorSpec{OperatorKind::Near, 0}.divided_phases() == 0);
  REQUIRE(OperatorSpec{OperatorKind::Boundary, 2}.tree_generation() == 2);
  REQUIRE(OperatorSpec{OperatorKind::Boundary, 2}.divided_phases() == 2);
  REQUIRE(OperatorSpec{OperatorKind::Remainder, 2}.tree_generation() == 3);
  REQUIRE(OperatorSpec{OperatorKind::Remainder, 2}.divided_phases() == 2);
}

TEST_CASE("assignment dump emits a stable table") {
  ModeVector v(1);
  v.at(0) = cplx(1.0, 0.0);
  v.at(1) = cplx(1.0, 0.0);
  OperatorSpec spec{OperatorKind::Boundary, 1, ThresholdConfig{}, SignConvention::Defocusing};
  std::ostringstream os;
  dump_assignments(spec, v, 0.0, os);
  std::istringstream is(os.str());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  REQUIRE(lines[0] == "root,tree,freqs,mu,weight_re,weight_im,value_re,value_im");
  REQUIRE(lines[1] == "-1,0,-1;0;1;0,2,0,0.5,0,0.5");

  OperatorSpec bad{OperatorKind::Full, 1, ThresholdConfig{}, SignConvention::Defocusing};
  REQUIRE_THROWS_AS(dump_assignments(bad, v, 0.0, os), std::invalid_argument);
}
