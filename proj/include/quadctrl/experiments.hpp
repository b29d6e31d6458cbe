#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "quadctrl/manifold.hpp"
#include "quadctrl/simulate.hpp"

namespace quadctrl {

/// Calibrated remainder allowance for cubic terms.
inline double tol_cubic(double amplitude) { return 10.0 * amplitude * amplitude * amplitude; }

struct DriftSeries {
  std::vector<double> t;
  std::vector<double> value;  // <P-perp x - G2(Px), d_k>
  std::vector<double> residual;  // |P-perp x - G2(Px)|
  double min = 0.0;
  double final = 0.0;
  double residual_sup = 0.0;
};

/// Evaluates the manifold gap along a trajectory.
inline DriftSeries manifold_gap(const Trajectory& tr, const QuadraticManifold& m, const RatVector& direction) {
  NumericField q(m.Q());
  Eigen::VectorXd dir(m.n);
  for (int i = 0; i < m.n; ++i) dir[i] = direction.empty() ? 0.0 : direction[i].get_d();
  DriftSeries s;
  s.min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.x.size(); ++i) {
    Eigen::VectorXd g = q(tr.x[i]);
    double v = g.dot(dir);
    s.t.push_back(tr.t[i]);
    s.value.push_back(v);
    s.residual.push_back(g.norm());
    s.min = std::min(s.min, v);
    s.residual_sup = std::max(s.residual_sup, g.norm());
  }
  s.final = s.value.back();
  return s;
}

inline DriftSeries drift_check(const ControlSystem& sys, const Classification& cls, const QuadraticManifold& m,
                               const ControlSignal& u, double dt) {
  if (!cls.is_drift()) throw PreconditionError("drift check needs a drift classification, got " + to_string(cls.verdict));
  auto tr = integrate(sys, Eigen::VectorXd::Zero(sys.n()), u, dt);
  return manifold_gap(tr, m, cls.direction);
}

// ---------------------------------------------------------------------------

/// Least-squares slope of log y against log x over the positive entries.
/// NaN when fewer than two usable points remain.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor = 0.0) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > floor) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

struct ScalingReport {
  std::vector<double> epsilon;
  std::vector<double> drift_final;
  std::vector<double> residual_sup;
  double drift_slope = std::numeric_limits<double>::quiet_NaN();
  double residual_slope = std::numeric_limits<double>::quiet_NaN();
  /// residual below the integrator floor for every amplitude
  bool residual_exact = false;
};

inline constexpr double kIntegratorFloor = 1e-12;

/// Runs the family at each amplitude from x(0) = 0 and regresses the final
/// drift and the sup of the manifold gap against the amplitude.
inline ScalingReport scaling_study(const ControlSystem& sys, const std::function<ControlSignal(double)>& family,
                                   const std::vector<double>& amplitudes, double dt) {
  if (amplitudes.size() < 3) throw PreconditionError("scaling study needs at least 3 amplitudes");
  auto qd = extract_quadratic_data(sys);
  auto r = analyze(qd);
  auto cls = classify(qd, r);
  auto m = build_m2(qd, r);
  ScalingReport rep;
  rep.epsilon = amplitudes;
  for (double a : amplitudes) {
    auto tr = integrate(sys, Eigen::VectorXd::Zero(sys.n()), family(a), dt);
    auto s = manifold_gap(tr, m, cls.is_drift() ? cls.direction : RatVector{});
    rep.drift_final.push_back(s.final);
    rep.residual_sup.push_back(s.residual_sup);
  }
  if (cls.is_drift()) {
    std::vector<double> mag;
    for (double v : rep.drift_final) mag.push_back(std::abs(v));
    rep.drift_slope = loglog_slope(rep.epsilon, mag);
  }
  rep.residual_exact = true;
  for (double v : rep.residual_sup) rep.residual_exact = rep.residual_exact && v <= kIntegratorFloor;
  if (!rep.residual_exact) rep.residual_slope = loglog_slope(rep.epsilon, rep.residual_sup, kIntegratorFloor);
  return rep;
}

// ---------------------------------------------------------------------------

struct DilationPoint {
  double lambda = 0, mu = 0;
  double l2_numeric = 0, l2_predicted = 0;      // int u_k^2 vs lambda^2 / mu
  double cube_numeric = 0, cube_predicted = 0;  // int u_1^3 vs a lambda^3 mu^{3k-4}
  double x_final = 0;                           // x_{k+1}(T)
  double wk = 0;                                // W^{m,inf} norm of u, m = 2k - 3 (at least 0)
};

struct DilationReport {
  int k = 0;
  double a = 0;  // int_0^1 (phi^{(k-1)})^3
  std::vector<DilationPoint> points;
  double max_rel_error_l2 = 0;
  double max_rel_error_cube = 0;
  bool sign_reversal = false;
};

/// Dilatation family on the x_{k+1} = x_k^2 + x_1^3 chain: u_k = lambda
/// phi(mu t). Compares both integrals with their scaling laws and records the
/// sign of x_{k+1}(T).
inline DilationReport dilation_experiment(const ControlSystem& sys, int k,
                                          const std::vector<std::pair<double, double>>& lambda_mu, double T = 1.0,
                                          int N = 8000) {
  if (k < 2) throw PreconditionError("dilatation experiment needs k >= 2");
  if (sys.n() != k + 1) throw DimensionMismatch("dilatation experiment expects the (k+1)-dimensional chain");
  DilationReport rep;
  rep.k = k;
  Shape phi = dilation_profile();
  rep.a = simpson01([&](double s) { double v = phi.derivative(s, k - 1); return v * v * v; });
  bool pos = false, neg = false;
  for (auto [lambda, mu] : lambda_mu) {
    DilationPoint p;
    p.lambda = lambda;
    p.mu = mu;
    auto u = dilation_control(T, N, k, lambda, mu);
    auto uk = primitive_poly(u, k);
    auto u1 = primitive_poly(u, 1);
    p.l2_numeric = uk.integral_abs_pow(2.0);
    p.l2_predicted = lambda * lambda / mu;
    p.cube_numeric = u1.integral_cube();
    p.cube_predicted = rep.a * lambda * lambda * lambda * std::pow(mu, 3 * k - 4);
    p.x_final = integrate(sys, Eigen::VectorXd::Zero(sys.n()), u, T / N).final_state()[k];
    int m = std::max(0, 2 * k - 3);
    p.wk = norms(u, m, 0).W[m];
    rep.max_rel_error_l2 = std::max(rep.max_rel_error_l2, std::abs(p.l2_numeric / p.l2_predicted - 1.0));
    rep.max_rel_error_cube = std::max(rep.max_rel_error_cube, std::abs(p.cube_numeric / p.cube_predicted - 1.0));
    pos = pos || p.x_final > 0;
    neg = neg || p.x_final < 0;
    rep.points.push_back(p);
  }
  rep.sign_reversal = pos && neg;
  return rep;
}

// ---------------------------------------------------------------------------

struct DriftWitness {
  std::string system;
  int trials = 0;
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min_t value + tol, minimized over trials
  int final_violations = 0;  // Sussmann-type final-value bound
};

/// Random C-infinity bumps whose first d primitives vanish at T. Checks
/// min_t <P-perp x - G2(Px), d_k> >= -tol_cubic(amplitude); when check_final
/// is set also value(T) >= |u_k|_{L2}^2 / 2 - tol_cubic.
inline DriftWitness drift_witness(const ControlSystem& sys, int trials, unsigned seed, double max_amplitude = 1e-2,
                                  bool check_final = false, double T = 1.0, int N = 1000) {
  auto qd = extract_quadratic_data(sys);
  auto r = analyze(qd);
  auto cls = classify(qd, r);
  auto m = build_m2(qd, r);
  DriftWitness w;
  w.system = sys.name();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int order = std::max(r.s1.d, 1);
  for (int i = 0; i < trials; ++i) {
    double a = 0.05 * T + 0.4 * T * unif(rng);
    double b = a + 0.2 * T + (0.95 * T - a - 0.2 * T) * unif(rng);
    double amp = max_amplitude * (0.1 + 0.9 * unif(rng));
    auto u = bump_control(T, N, a, b, amp, order, 2.0 * unif(rng) - 1.0);
    auto s = drift_check(sys, cls, m, u, T / N);
    ++w.trials;
    w.worst_margin = std::min(w.worst_margin, s.min + tol_cubic(amp));
    if (s.min < -tol_cubic(amp)) ++w.violations;
    if (check_final) {
      double uk = primitive_poly(u, cls.k).integral_abs_pow(2.0);
      if (s.final < 0.5 * uk - tol_cubic(amp)) ++w.final_violations;
    }
  }
  return w;
}

}  // namespace quadctrl
