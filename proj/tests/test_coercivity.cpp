#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "quadctrl/coercivity.hpp"
#include "quadctrl/fixtures.hpp"

using namespace quadctrl;

namespace {
const double kPi = std::acos(-1.0);
}

TEST(Coercivity, CompetitionWeightsAreConstant) {
  auto p = make_coercivity_problem(fixtures::competition());
  EXPECT_EQ(p.k, 1);
  EXPECT_EQ(p.orders, (std::vector<int>{1, 2}));
  for (double tau : {0.0, 0.7, 3.0}) {
    EXPECT_NEAR(p.weight(1, tau), 2.0, 1e-14);
    EXPECT_NEAR(p.weight(2, tau), -2.0, 1e-14);
  }
}

TEST(Coercivity, LeadingWeightIsHalfSquaredDrift) {
  for (const auto& info : fixtures::all()) {
    auto sys = info.make();
    if (!classify(sys).is_drift()) continue;
    auto p = make_coercivity_problem(sys);
    double nrm2 = 0.0;
    for (const auto& v : p.direction) nrm2 += v.get_d() * v.get_d();
    EXPECT_NEAR(p.weight(p.k, 0.0), 0.5 * nrm2, 1e-12) << info.name;
    // lower weights vanish: G_j(0,0) lies in S1 for j < k
    for (int j = 1; j < p.k; ++j)
      for (double tau : {0.0, 0.3, 1.7}) EXPECT_LE(std::abs(p.weight(j, tau)), 1e-12) << info.name;
  }
}

TEST(Coercivity, RejectsManifoldSystems) {
  EXPECT_THROW(make_coercivity_problem(fixtures::toy_manifold()), PreconditionError);
  EXPECT_THROW(make_coercivity_problem(fixtures::integrator1d()), PreconditionError);
}

TEST(Coercivity, CumulativeMatrixIsExact) {
  // u = 1 on [0, 1]: u_j(s) = s^j / j!
  int N = 10;
  double h = 0.1;
  Eigen::VectorXd one = Eigen::VectorXd::Ones(N);
  for (int j = 1; j <= 3; ++j) {
    Eigen::VectorXd uj = cumulative_matrix(j, N, h) * one;
    for (int i = 0; i < N; ++i) EXPECT_NEAR(uj[i], std::pow((i + 0.5) * h, j) / std::tgamma(j + 1.0), 1e-14);
    EXPECT_NEAR(endpoint_row(j, N, h) * one, 1.0 / std::tgamma(j + 1.0), 1e-14);
  }
  auto rule = gauss_rule01(3);
  double sum = 0.0, m4 = 0.0;
  for (int q = 0; q < 3; ++q) sum += rule.weight[q], m4 += rule.weight[q] * std::pow(rule.theta[q], 4);
  EXPECT_NEAR(sum, 1.0, 1e-14);
  EXPECT_NEAR(m4, 0.2, 1e-14);
}

TEST(Coercivity, GramOfPrimitiveIsExact) {
  // u = 1 on [0, 2]: int u_2^2 = int s^4 / 4 = 2^5 / 20
  auto p = make_coercivity_problem(fixtures::sussmann());
  auto f = assemble_forms(p, 2.0, 16, EndpointMode::Free);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(16);
  EXPECT_NEAR(one.dot(f.B * one), 32.0 / 20.0, 1e-12);
}

TEST(Coercivity, LambdaMinBasics) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  int n = 8;
  Eigen::MatrixXd X(n, n), Y(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = g(rng), Y(i, j) = g(rng);
  Eigen::MatrixXd B = X * X.transpose() + Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd A = Y + Y.transpose();
  EXPECT_NEAR(lambda_min(B, B), 1.0, 1e-12);
  EXPECT_NEAR(lambda_min(Eigen::MatrixXd::Zero(n, n), B), 0.0, 1e-14);
  EXPECT_THROW(lambda_min(A, A), NotPositiveDefinite);
  // Rayleigh quotient oracle
  double lmin = lambda_min(A, B), best = 1e300;
  Eigen::VectorXd vbest;
  for (int t = 0; t < 10000; ++t) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    double q = v.dot(A * v) / v.dot(B * v);
    EXPECT_GE(q, lmin - 1e-12);
    if (q < best) best = q, vbest = v;
  }
  // local refinement: inverse iteration on the shifted pencil
  Eigen::VectorXd v = vbest;
  for (int it = 0; it < 200; ++it) {
    double q = v.dot(A * v) / v.dot(B * v);
    v = (A - (q - 1e-3) * B).fullPivLu().solve(B * v);
    v.normalize();
  }
  EXPECT_NEAR(v.dot(A * v) / v.dot(B * v), lmin, 1e-6);
}

TEST(Coercivity, FormsAreSymmetricAndBPositive) {
  auto p = make_coercivity_problem(fixtures::sussmann());
  for (auto mode : {EndpointMode::Clamped, EndpointMode::Free}) {
    auto f = assemble_forms(p, 1.3, 40, mode);
    EXPECT_LE((f.A - f.A.transpose()).norm(), 1e-14);
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(f.B).info(), Eigen::Success);
  }
}

TEST(Coercivity, MonteCarloLowerBound) {
  auto p = make_coercivity_problem(fixtures::competition());
  double t = 2.0;
  int N = 60;
  auto f = assemble_forms(p, t, N);
  double lmin = lambda_min(f.A, f.B);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd v(f.A.rows());
    for (int j = 0; j < v.size(); ++j) v[j] = g(rng);
    EXPECT_GE(v.dot(f.A * v), (lmin - 1e-9) * v.dot(f.B * v));
  }
}

TEST(Coercivity, CompetitionTstarIsPi) {
  auto p = make_coercivity_problem(fixtures::competition());
  auto t0 = std::chrono::steady_clock::now();
  auto rep = estimate_tstar(p, 5.0, 200);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(rep.status, "crossing_found");
  EXPECT_NEAR(rep.tstar_est, kPi, 0.05);
  EXPECT_LE(std::abs(rep.tstar_refined - rep.tstar_est), 0.01);
  EXPECT_LE(secs, 60.0);
}

TEST(Coercivity, NoCrossingCases) {
  EXPECT_EQ(estimate_tstar(make_coercivity_problem(fixtures::easy_drift()), 10.0, 100).status, "no_crossing_up_to_Tmax");
  auto s = estimate_tstar(make_coercivity_problem(fixtures::sussmann()), 10.0, 100);
  EXPECT_EQ(s.status, "no_crossing_up_to_Tmax");
  // single weight w_2 = 2: lambda_min is the constant 2
  for (const auto& [t, l] : s.sweep) EXPECT_NEAR(l, 2.0, 1e-6) << t;
}

TEST(Coercivity, WirtingerExtremal) {
  auto p = make_coercivity_problem(fixtures::competition());
  double t = kPi * 1.02;
  int N = 200;
  auto f = assemble_forms(p, t, N);
  auto g = lambda_min_pair(f.A, f.B);
  EXPECT_LT(g.value, 0.0);
  Eigen::VectorXd cells = f.basis * g.vector;
  Eigen::VectorXd u2 = cumulative_matrix(2, N, t / N) * cells;
  Eigen::VectorXd ref(N);
  for (int i = 0; i < N; ++i) ref[i] = std::sin(kPi * (i + 0.5) / N);
  EXPECT_GE(std::abs(u2.dot(ref)) / (u2.norm() * ref.norm()), 0.99);
}

TEST(Coercivity, FreeEndpointHalvesCompetitionTime) {
  auto p = make_coercivity_problem(fixtures::competition());
  auto rep = estimate_tstar(p, 5.0, 100, EndpointMode::Free);
  EXPECT_NEAR(rep.tstar_est, kPi / 2, 0.05);
}
