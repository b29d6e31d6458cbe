#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "quadctrl/brunovsky.hpp"
#include "quadctrl/expm.hpp"
#include "quadctrl/lie_analysis.hpp"

namespace quadctrl {

/// Endpoint treatment of the discretized controls: Clamped imposes
/// u_j(t) = 0 for j = 1..d, Free leaves the endpoint open.
enum class EndpointMode { Clamped, Free };

inline std::string to_string(EndpointMode m) { return m == EndpointMode::Clamped ? "clamped" : "free"; }

struct CoercivityProblem {
  QuadraticData qd;  // well-prepared
  int n = 0;
  int d = 0;
  int k = 0;
  int gamma = 1;
  RatVector direction;        // d_k
  std::vector<int> orders;    // j = max(k, gamma)..d
  std::vector<RatVector> G;   // G_j(0,0) for j = 0..d
  MatrixExponential expH0;
  bool auto_transformed = false;  // Brunovsky feedback applied first

  /// w_j(tau) = <e^{tau H0} G_j(0,0), d_k>
  double weight(int j, double tau) const {
    Eigen::VectorXd g(n), dk(n);
    for (int i = 0; i < n; ++i) {
      g[i] = G.at(j)[i].get_d();
      dk[i] = direction[i].get_d();
    }
    return (expH0(tau) * g).dot(dk);
  }
};

inline CoercivityProblem make_coercivity_problem(const ControlSystem& input) {
  ControlSystem sys = input;
  auto qd = extract_quadratic_data(sys);
  auto r = analyze(qd);
  if (r.s1.d == 0) throw PreconditionError("coercivity needs b != 0");
  CoercivityProblem p;
  if (!is_zero(matrix_power(qd.H0, r.s1.d) * qd.b)) {
    auto t = build_transform(qd, r.s1);
    sys = transform_system(sys, t.beta);
    qd = extract_quadratic_data(sys);
    r = analyze(qd);
    p.auto_transformed = true;
  }
  auto cls = classify(qd, r);
  if (!cls.is_drift())
    throw PreconditionError("coercivity time is defined for drift systems only; verdict is " + to_string(cls.verdict));
  p.qd = qd;
  p.n = qd.n;
  p.d = r.s1.d;
  p.k = cls.k;
  p.gamma = sys.gamma();
  p.direction = cls.direction;
  p.G.push_back(Rational(1, 2) * qd.d0);
  for (int j = 1; j <= p.d; ++j) p.G.push_back(Rational(-1, 2) * r.W[j]);
  for (int j = std::max(p.k, p.gamma); j <= p.d; ++j) p.orders.push_back(j);
  p.expH0 = MatrixExponential(qd.H0);
  return p;
}

/// Gauss-Legendre rule with q nodes on [0, 1] (Golub-Welsch).
struct CellRule {
  std::vector<double> theta;
  std::vector<double> weight;
};

inline CellRule gauss_rule01(int q) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (int i = 1; i < q; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  CellRule r;
  for (int i = 0; i < q; ++i) {
    r.theta.push_back(0.5 * (es.eigenvalues()[i] + 1.0));
    double v = es.eigenvectors()(0, i);
    r.weight.push_back(v * v);
  }
  return r;
}

/// Row (i, q) holds u_j at s = (i + theta_q) h produced by a unit pulse on
/// each cell l, for piecewise-constant u on N cells of width h.
inline Eigen::MatrixXd cumulative_matrix(int j, int N, double h, const std::vector<double>& theta = {0.5}) {
  int Q = static_cast<int>(theta.size());
  if (j == 0) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N * Q, N);
    for (int i = 0; i < N; ++i)
      for (int q = 0; q < Q; ++q) M(i * Q + q, i) = 1.0;
    return M;
  }
  double fact = std::tgamma(j + 1.0);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N * Q, N);
  for (int i = 0; i < N; ++i)
    for (int q = 0; q < Q; ++q) {
      double s = (i + theta[q]) * h;
      for (int l = 0; l < i; ++l) M(i * Q + q, l) = (std::pow(s - l * h, j) - std::pow(s - (l + 1) * h, j)) / fact;
      M(i * Q + q, i) = std::pow(theta[q] * h, j) / fact;
    }
  return M;
}

/// Row of u_j(t) as a functional of the cell values.
inline Eigen::RowVectorXd endpoint_row(int j, int N, double h) {
  double t = N * h, fact = std::tgamma(j + 1.0);
  Eigen::RowVectorXd r(N);
  for (int l = 0; l < N; ++l) r[l] = (std::pow(t - l * h, j) - std::pow(t - (l + 1) * h, j)) / fact;
  return r;
}

struct QuadraticForms {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd basis;  // columns span the admissible cell vectors
};

/// A_t = sum_j M_j^T D_j(t) M_j and B_t = M_k^T D M_k with k + 1 Gauss
/// nodes per cell, so that B_t is the exact Gram matrix of u_k in L2(0, t).
/// Both are restricted to the admissible subspace of the endpoint mode.
inline QuadraticForms assemble_forms(const CoercivityProblem& p, double t, int N,
                                     EndpointMode mode = EndpointMode::Clamped) {
  if (!(t > 0.0)) throw PreconditionError("coercivity horizon must be positive");
  double h = t / N;
  CellRule rule = gauss_rule01(p.k + 1);
  int Q = static_cast<int>(rule.theta.size());
  Eigen::VectorXd base(N * Q);
  for (int i = 0; i < N; ++i)
    for (int q = 0; q < Q; ++q) base[i * Q + q] = h * rule.weight[q];
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd Mk;
  for (int j : p.orders) {
    Eigen::MatrixXd M = cumulative_matrix(j, N, h, rule.theta);
    Eigen::VectorXd w(N * Q);
    for (int i = 0; i < N; ++i)
      for (int q = 0; q < Q; ++q) w[i * Q + q] = base[i * Q + q] * p.weight(j, t - (i + rule.theta[q]) * h);
    A.noalias() += M.transpose() * w.asDiagonal() * M;
    if (j == p.k) Mk = std::move(M);
  }
  if (Mk.size() == 0) Mk = cumulative_matrix(p.k, N, h, rule.theta);
  Eigen::MatrixXd B = Mk.transpose() * base.asDiagonal() * Mk;
  QuadraticForms f;
  if (mode == EndpointMode::Free || p.d == 0) {
    f.A = 0.5 * (A + A.transpose());
    f.B = 0.5 * (B + B.transpose());
    f.basis = Eigen::MatrixXd::Identity(N, N);
    return f;
  }
  Eigen::MatrixXd C(N, p.d);
  for (int j = 1; j <= p.d; ++j) C.col(j - 1) = endpoint_row(j, N, h).transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  Eigen::MatrixXd Qm = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
  f.basis = Qm.rightCols(N - p.d);
  Eigen::MatrixXd Ar = f.basis.transpose() * A * f.basis;
  Eigen::MatrixXd Br = f.basis.transpose() * B * f.basis;
  f.A = 0.5 * (Ar + Ar.transpose());
  f.B = 0.5 * (Br + Br.transpose());
  return f;
}

struct GeneralizedMin {
  double value = 0.0;
  Eigen::VectorXd vector;  // minimizer in the coordinates of A and B
};

/// Smallest generalized eigenvalue of (A, B) via B = L L^T and the
/// symmetric eigenproblem of L^{-1} A L^{-T}.
inline GeneralizedMin lambda_min_pair(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
    throw DimensionMismatch("generalized eigenproblem needs square matrices of equal size");
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("B is not symmetric positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd X = L.triangularView<Eigen::Lower>().solve(A);
  Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(X.transpose());
  C = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  GeneralizedMin g;
  g.value = es.eigenvalues()[0];
  g.vector = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(0));
  return g;
}

inline double lambda_min(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) { return lambda_min_pair(A, B).value; }

inline double lambda_min_at(const CoercivityProblem& p, double t, int N, EndpointMode mode = EndpointMode::Clamped) {
  auto f = assemble_forms(p, t, N, mode);
  return lambda_min(f.A, f.B);
}

// ---------------------------------------------------------------------------

struct CoercivityReport {
  std::string status;  // "crossing_found" or "no_crossing_up_to_Tmax"
  double T_max = 0.0;
  int grid_N = 0;
  EndpointMode mode = EndpointMode::Clamped;
  std::vector<std::pair<double, double>> sweep;  // (t, lambda_min(t))
  int crossings = 0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double tstar_est = std::numeric_limits<double>::infinity();
  double tstar_err = 0.0;
  double tstar_refined = std::numeric_limits<double>::infinity();  // with 2N
  bool auto_transformed = false;
  std::vector<std::string> notes;
};

namespace detail {
inline double bisect_crossing(const CoercivityProblem& p, double lo, double hi, double width, int N, EndpointMode mode) {
  while (hi - lo > width) {
    double mid = 0.5 * (lo + hi);
    if (lambda_min_at(p, mid, N, mode) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

/// Sweeps lambda_min(t) on (0, T_max], locates the first sign change by
/// bisection to width T_max/1000 and repeats the bisection with 2N to
/// estimate the discretization error.
inline CoercivityReport estimate_tstar(const CoercivityProblem& p, double T_max, int N,
                                       EndpointMode mode = EndpointMode::Clamped, int sweep_points = 100) {
  if (!(T_max > 0.0)) throw PreconditionError("T_max must be positive");
  if (N < p.d + 2) throw PreconditionError("coercivity grid too coarse");
  CoercivityReport rep;
  rep.T_max = T_max;
  rep.grid_N = N;
  rep.mode = mode;
  rep.auto_transformed = p.auto_transformed;
  double prev_t = 0.0;
  bool prev_pos = true;
  bool found = false;
  for (int i = 1; i <= sweep_points; ++i) {
    double t = T_max * i / sweep_points;
    double l = lambda_min_at(p, t, N, mode);
    rep.sweep.emplace_back(t, l);
    bool pos = l > 0.0;
    if (pos != prev_pos) {
      ++rep.crossings;
      if (!found && !pos) {
        found = true;
        rep.bracket_lo = prev_t;
        rep.bracket_hi = t;
      }
    }
    prev_pos = pos;
    prev_t = t;
  }
  if (!found) {
    rep.status = "no_crossing_up_to_Tmax";
    return rep;
  }
  rep.status = "crossing_found";
  double width = T_max / 1000.0;
  rep.tstar_est = detail::bisect_crossing(p, rep.bracket_lo, rep.bracket_hi, width, N, mode);
  double lo2 = std::max(width, rep.bracket_lo - 0.5 * (rep.bracket_hi - rep.bracket_lo));
  double hi2 = rep.bracket_hi + 0.5 * (rep.bracket_hi - rep.bracket_lo);
  if (lambda_min_at(p, lo2, 2 * N, mode) > 0.0 && lambda_min_at(p, hi2, 2 * N, mode) <= 0.0) {
    rep.tstar_refined = detail::bisect_crossing(p, lo2, hi2, width, 2 * N, mode);
    rep.tstar_err = std::abs(rep.tstar_refined - rep.tstar_est) + 0.5 * width;
  } else {
    rep.tstar_err = std::numeric_limits<double>::infinity();
    rep.notes.push_back("refined grid did not reproduce the sign change inside the bracket");
  }
  if (rep.crossings > 1) rep.notes.push_back("lambda_min changes sign more than once; only the first crossing is resolved");
  return rep;
}

}  // namespace quadctrl
