#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "quadctrl/expm.hpp"
#include "quadctrl/lie_analysis.hpp"
#include "quadctrl/simulate.hpp"

namespace quadctrl {

namespace detail {
inline double psi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
/// Smooth step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  double a = psi(x), b = psi(1.0 - x);
  return a / (a + b);
}
}  // namespace detail

/// Cutoff equal to 1 on [2 eps, T - 2 eps] and 0 outside (eps, T - eps).
inline double rho_eps(double t, double T, double eps) {
  if (eps <= 0.0) return 1.0;
  return detail::smooth_step((t - eps) / eps) * detail::smooth_step((T - eps - t) / eps);
}

inline constexpr double kGramianConditionLimit = 1e10;

struct GramianData {
  double T = 0.0;
  double eps = 0.0;
  int N_quad = 0;
  Eigen::MatrixXd G;
  double min_eig = 0.0;
  double cond = 0.0;
  bool invertible = false;
};

/// int_0^T rho_eps(t) e^{(T-t)H0} b b^T e^{(T-t)H0^T} dt by composite Simpson.
inline GramianData gramian(const Eigen::MatrixXd& H0, const Eigen::VectorXd& b, double T, double eps,
                           int N_quad = 2048) {
  if (!(T > 0.0)) throw PreconditionError("Gramian horizon must be positive");
  if (eps < 0.0 || 2.0 * eps >= T) throw PreconditionError("smoothing parameter must satisfy 0 <= 2 eps < T");
  if (N_quad < 2) throw PreconditionError("Gramian quadrature needs at least two intervals");
  if (N_quad % 2) ++N_quad;
  int n = static_cast<int>(b.size());
  double h = T / N_quad;
  GramianData g;
  g.T = T;
  g.eps = eps;
  g.N_quad = N_quad;
  g.G = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i <= N_quad; ++i) {
    double t = i * h;
    double r = rho_eps(t, T, eps);
    if (r == 0.0) continue;
    double w = (i == 0 || i == N_quad) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    Eigen::VectorXd v = expm((T - t) * H0) * b;
    g.G.noalias() += (w * r) * v * v.transpose();
  }
  g.G *= h / 3.0;
  g.G = 0.5 * (g.G + g.G.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.G);
  g.min_eig = es.eigenvalues()[0];
  double max_eig = es.eigenvalues()[n - 1];
  g.cond = g.min_eig > 0.0 ? max_eig / g.min_eig : std::numeric_limits<double>::infinity();
  g.invertible = g.min_eig > 0.0 && g.cond <= kGramianConditionLimit;
  return g;
}

struct HumResult {
  ControlSignal u;
  Eigen::VectorXd p;
  GramianData gram;
};

/// u(t) = rho_eps(t) b^T e^{(T-t)H0^T} p with p = G^{-1}(x1 - e^{T H0} x0).
inline HumResult hum_control(const Eigen::MatrixXd& H0, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& x1, double T, double eps, int N = 4096, int N_quad = 2048) {
  int n = static_cast<int>(b.size());
  if (H0.rows() != n || x0.size() != n || x1.size() != n) throw DimensionMismatch("steering data has wrong dimension");
  HumResult res;
  res.gram = gramian(H0, b, T, eps, N_quad);
  if (!res.gram.invertible)
    throw NotControllable("controllability Gramian is singular (condition " + std::to_string(res.gram.cond) + ")", {});
  res.p = res.gram.G.ldlt().solve(x1 - expm(T * H0) * x0);
  Eigen::MatrixXd Ht = H0.transpose();
  Eigen::VectorXd p = res.p;
  auto f = [=](double t, int m) {
    if (m != 0) throw PreconditionError("HUM controls expose values only");
    double r = rho_eps(t, T, eps);
    return r == 0.0 ? 0.0 : r * b.dot(expm((T - t) * Ht) * p);
  };
  res.u = ControlSignal::sample(T, N, [f](double t) { return f(t, 0); }, "hum");
  res.u.set_exact(f);
  return res;
}

/// Kalman test in exact arithmetic first, so that a failure can name the
/// missing directions.
inline HumResult hum_control(const QuadraticData& qd, const Eigen::VectorXd& x0, const Eigen::VectorXd& x1, double T,
                             double eps, int N = 4096) {
  S1Space s1 = compute_s1(qd);
  if (!s1.kalman()) {
    std::vector<std::vector<std::string>> missing;
    for (const auto& v : orthogonal_complement(s1.basis, qd.n)) missing.push_back(to_strings(v));
    throw NotControllable("Kalman rank condition fails: rank " + std::to_string(s1.d) + " < " + std::to_string(qd.n),
                          missing);
  }
  Eigen::VectorXd b(qd.n);
  for (int i = 0; i < qd.n; ++i) b[i] = qd.b[i].get_d();
  return hum_control(qd.H0.to_eigen(), b, x0, x1, T, eps, N);
}

/// |y(T) - x1| for y' = H0 y + u b, y(0) = x0, by RK4 on the control grid.
/// Uses the exact control values when the signal carries them.
inline double verify_steering(const Eigen::MatrixXd& H0, const Eigen::VectorXd& b, const ControlSignal& u,
                              const Eigen::VectorXd& x0, const Eigen::VectorXd& x1) {
  auto val = [&](double t) { return u.has_exact() ? u.exact(t, 0) : u.value(t); };
  auto tr = rk4([&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) { out = H0 * y + val(t) * b; }, x0, u.T(),
                u.intervals());
  return (tr.final_state() - x1).norm();
}

struct NonlinearSteering {
  ControlSignal u;
  std::vector<double> residuals;  // |x(T) - x1| after each iteration
  int iterations = 0;
  bool converged = false;
};

/// Fixed-point correction: steer the linearization, then repeatedly add the
/// HUM control for the remaining endpoint error. A demonstration, without a
/// convergence guarantee.
inline NonlinearSteering steer_nonlinear(const ControlSystem& sys, const Eigen::VectorXd& x0, const Eigen::VectorXd& x1,
                                         double T, double eps, int max_iter = 20, double tol = 1e-8, int N = 4096) {
  auto qd = extract_quadratic_data(sys);
  NumericField f(sys.field());
  NonlinearSteering out;
  out.u = hum_control(qd, x0, x1, T, eps, N).u;
  std::vector<double> vals = out.u.values();
  for (int it = 0; it < max_iter; ++it) {
    ControlSignal cur(T, vals, "fixed-point steering");
    Eigen::VectorXd xT = integrate(f, x0, cur, T / N).final_state();
    Eigen::VectorXd r = x1 - xT;
    out.residuals.push_back(r.norm());
    out.iterations = it + 1;
    out.u = cur;
    if (r.norm() < tol) {
      out.converged = true;
      break;
    }
    auto corr = hum_control(qd, Eigen::VectorXd::Zero(sys.n()), r, T, eps, N).u;
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] += corr.values()[i];
  }
  return out;
}

}  // namespace quadctrl
