#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

#include "quadctrl/expm.hpp"
#include "quadctrl/fixtures.hpp"
#include "quadctrl/lie_analysis.hpp"
#include "quadctrl/simulate.hpp"

using namespace quadctrl;

namespace {

const double kPi = std::acos(-1.0);

ControlSignal from(double T, int N, std::function<double(double)> f) { return ControlSignal::sample(T, N, f, "test"); }

}  // namespace

TEST(Expm, MatchesEigenMatrixFunctions) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int n = 1; n <= 6; ++n)
    for (double s : {0.1, 1.0, 7.0}) {
      Eigen::MatrixXd A(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = s * g(rng);
      Eigen::MatrixXd ref = A.exp();
      EXPECT_LE((expm(A) - ref).norm(), 1e-11 * std::max(1.0, ref.norm())) << n << " " << s;
    }
}

TEST(Expm, NilpotentSeriesIsExact) {
  RatMatrix H(3, 3);
  H(0, 1) = 1;
  H(1, 2) = 1;
  MatrixExponential E(H);
  EXPECT_TRUE(E.nilpotent());
  Eigen::MatrixXd e = E(2.0);
  EXPECT_DOUBLE_EQ(e(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(e(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(e(2, 2), 1.0);
  RatMatrix R(2, 2);
  R(0, 1) = 1;
  R(1, 0) = -1;
  MatrixExponential rot(R);
  EXPECT_FALSE(rot.nilpotent());
  EXPECT_NEAR(rot(kPi / 2)(0, 1), 1.0, 1e-14);
}

TEST(Jet, BumpDerivativesMatchFiniteDifferences) {
  Shape s{0.7, 1.0};
  double h = 1e-5;
  for (double x : {0.2, 0.5, 0.83}) {
    EXPECT_NEAR(s.derivative(x, 1), (s(x + h) - s(x - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(s.derivative(x, 2), (s.derivative(x + h, 1) - s.derivative(x - h, 1)) / (2 * h), 1e-6);
  }
  EXPECT_EQ(s.derivative(0.0, 3), 0.0);
  EXPECT_EQ(s.derivative(1.0, 0), 0.0);
}

TEST(Primitives, ClosedForms) {
  auto one = from(1.0, 100, [](double) { return 1.0; });
  auto u2 = primitive_poly(one, 2);
  EXPECT_NEAR(u2(1.0), 0.5, 1e-14);
  EXPECT_NEAR(u2(0.3), 0.045, 1e-14);
  EXPECT_EQ(u2(0.0), 0.0);
  EXPECT_NEAR(primitive_poly(from(1.0, 10, [](double t) { return t; }), 1)(1.0), 0.5, 1e-14);
  auto c = from(1.0, 1000, [](double t) { return std::cos(t); });
  EXPECT_NEAR(primitives(c, 1).values().back(), std::sin(1.0), 1e-6);
  EXPECT_THROW(primitive_poly(c, -1), PreconditionError);
}

TEST(Norms, ClosedForms) {
  auto r = norms(from(1.0, 1000, [](double t) { return t; }), 1, 1);
  EXPECT_NEAR(r.Linf, 1.0, 1e-14);
  EXPECT_NEAR(r.L1, 0.5, 1e-12);
  EXPECT_NEAR(r.L2, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(r.Hneg[0], 1.0 / (2.0 * std::sqrt(5.0)), 1e-9);
  auto z = norms(from(1.0, 50, [](double) { return 0.0; }), 3, 3);
  EXPECT_EQ(z.L1 + z.L2 + z.L3 + z.Linf, 0.0);
  for (double w : z.W) EXPECT_EQ(w, 0.0);
  for (double h : z.Hneg) EXPECT_EQ(h, 0.0);
  auto s = norms(from(1.0, 1000, [](double t) { return std::sin(2 * kPi * t); }), 1, 0);
  EXPECT_NEAR(s.W[1], 2 * kPi, 0.01 * 2 * kPi);
  EXPECT_THROW(norms(from(1.0, 4, [](double t) { return t; }), 3, 0), PreconditionError);
}

TEST(Controls, BumpVanishesAtSupportEnds) {
  auto u = bump_control(1.0, 1000, 0.2, 0.7, 0.5);
  EXPECT_NEAR(norms(u, 0, 0).Linf, 0.5, 1e-3);
  EXPECT_GT(primitive_poly(u, 1)(1.0), 0.0);
  for (int m = 0; m <= 3; ++m) {
    EXPECT_LE(std::abs(u.exact(0.2 + 1e-3, m)), 1e-6);
    EXPECT_LE(std::abs(u.exact(0.7 - 1e-3, m)), 1e-6);
  }
  auto du = bump_control(1.0, 1000, 0.2, 0.7, 0.5, 1);
  EXPECT_NEAR(primitive_poly(du, 1)(1.0), 0.0, 1e-12);
  EXPECT_THROW(bump_control(1.0, 10, 0.5, 0.5, 1.0), PreconditionError);
}

TEST(Controls, DisjointBumpsHaveAdditivePrimitives) {
  auto a = bump_control(1.0, 400, 0.1, 0.4, 1.0);
  auto b = bump_control(1.0, 400, 0.5, 0.9, -0.3);
  std::vector<double> v;
  for (std::size_t i = 0; i < a.values().size(); ++i) v.push_back(a.values()[i] + b.values()[i]);
  auto sum = primitive_poly(ControlSignal(1.0, v), 2);
  auto pa = primitive_poly(a, 2), pb = primitive_poly(b, 2);
  for (double t : {0.0, 0.3, 0.45, 0.8, 1.0}) EXPECT_NEAR(sum(t), pa(t) + pb(t), 1e-14);
}

TEST(Controls, DilationProfileHasUnitL2Norm) {
  auto phi = dilation_profile();
  double l2 = simpson01([&](double s) { return phi(s) * phi(s); });
  EXPECT_NEAR(l2, 1.0, 1e-10);
  // the k-th primitive of u is lambda phi(mu t)
  auto u = dilation_control(1.0, 4000, 2, 0.3, 2.0);
  auto u2 = primitive_poly(u, 2);
  EXPECT_NEAR(u2(0.25), 0.3 * phi(0.5), 1e-5);
  EXPECT_NEAR(u2(0.9), 0.0, 1e-6);
}

TEST(Integrate, EasyDriftClosedForm) {
  auto u = from(1.0, 1000, [](double t) { return std::cos(t); });
  auto tr = integrate(fixtures::easy_drift(), Eigen::VectorXd::Zero(2), u, 1e-3);
  EXPECT_NEAR(tr.final_state()[1], (1.0 - std::sin(2.0) / 2.0) / 2.0, 1e-6);
  EXPECT_NEAR(tr.final_state()[1], 0.272676, 1e-6);
  EXPECT_EQ(tr.x.front(), Eigen::VectorXd::Zero(2));
  EXPECT_EQ(tr.t.size(), 1001u);
}

TEST(Integrate, ZeroControlStaysAtEquilibrium) {
  for (const auto& info : fixtures::all()) {
    auto sys = info.make();
    auto tr = integrate(sys, Eigen::VectorXd::Zero(sys.n()), from(1.0, 100, [](double) { return 0.0; }), 1e-2);
    EXPECT_EQ(tr.final_state().norm(), 0.0) << info.name;
  }
}

TEST(Integrate, LinearSystemMatchesDuhamel) {
  auto sys = fixtures::harmonic();
  auto u = from(1.0, 1000, [](double t) { return std::cos(3 * t) + t; });
  auto tr = integrate(sys, Eigen::VectorXd::Zero(2), u, 1e-3);
  Eigen::MatrixXd H = linear_part(sys.f0()).to_eigen();
  Eigen::VectorXd b(2);
  b << 0, 1;
  auto interp = PiecewisePoly::linear_interpolant(u);
  double err = 0.0;
  for (int m = 100; m <= 1000; m += 100) {
    double T = m * 1e-3;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < m; ++i)
      for (int q = 0; q < 8; ++q) {
        double s = 1e-3 * (i + 0.5 * (detail::kGaussX[q] + 1.0));
        x += 0.5e-3 * detail::kGaussW[q] * expm((T - s) * H) * b * interp(s);
      }
    err = std::max(err, (x - tr.x[m]).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(err, 1e-8);
}

TEST(Integrate, Rk4ConvergesAtFourthOrder) {
  auto sys = fixtures::sussmann();
  // control kinks sit on step boundaries for every dt below
  auto u = bump_control(1.0, 50, 0.1, 0.9, 2.0);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(3);
  auto ref = integrate(sys, x0, u, 1.0 / 6400).final_state();
  double e1 = (integrate(sys, x0, u, 1.0 / 50).final_state() - ref).norm();
  double e2 = (integrate(sys, x0, u, 1.0 / 100).final_state() - ref).norm();
  EXPECT_NEAR(e1 / e2, 16.0, 3.0);
}

TEST(Integrate, TimeStepMustBeCompatible) {
  auto u = from(1.0, 100, [](double t) { return t; });
  EXPECT_THROW(integrate(fixtures::easy_drift(), Eigen::VectorXd::Zero(2), u, 0.003), PreconditionError);
  EXPECT_NO_THROW(integrate(fixtures::easy_drift(), Eigen::VectorXd::Zero(2), u, 0.02));
  EXPECT_THROW(integrate(fixtures::easy_drift(), Eigen::VectorXd::Zero(3), u, 0.01), DimensionMismatch);
}

TEST(Integrate, BlowupReportsEscapeTime) {
  // x' = x^2 + u from x(0) = 1 escapes at t = 1
  auto sys = fixtures::absorbed();
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  try {
    integrate(sys, x0, from(2.0, 2000, [](double) { return 0.0; }), 1e-3);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NEAR(e.escape_time(), 1.0, 1e-2);
  }
}

TEST(Integrate, TranslationCommutesWithIntegration) {
  // translated fields from 0 vs raw fields from the equilibrium
  auto sys = fixtures::bilinear();
  auto u = sinusoid_control(1.0, 500, 3.0, 0.2);
  auto tr = integrate(sys, Eigen::VectorXd::Zero(5), u, 2e-3);
  NumericField f(fixtures::bilinear_raw_f0() + Polynomial::control(5) * fixtures::bilinear_raw_f1());
  Eigen::VectorXd xe(5);
  xe << 1, 0, 0, 0, 0;
  auto tr2 = integrate(f, xe, u, 2e-3);
  EXPECT_LE((tr2.final_state() - xe - tr.final_state()).norm(), 1e-12);
}

TEST(Auxiliary, ZeroControlGivesState) {
  auto sys = fixtures::sussmann();
  auto u = from(1.0, 100, [](double) { return 0.0; });
  Eigen::VectorXd x0(3);
  x0 << 0.1, -0.2, 0.3;
  auto tr = integrate(sys, x0, u, 1e-2);
  auto xi = auxiliary_state(sys, tr, u, 2);
  for (std::size_t i = 0; i < xi.size(); ++i) EXPECT_EQ(xi[i], tr.x[i]);
}

TEST(Auxiliary, EasyDriftIsQuadraticInAmplitude) {
  auto sys = fixtures::easy_drift();
  std::vector<double> la, lx;
  for (double a : {0.1, 0.03, 0.01, 0.003}) {
    auto u = sinusoid_control(1.0, 1000, 2 * kPi, a);
    auto tr = integrate(sys, Eigen::VectorXd::Zero(2), u, 1e-3);
    auto xi = auxiliary_state(sys, tr, u, 1, 16, 10);
    double sup = 0.0;
    for (const auto& v : xi) sup = std::max(sup, v.norm());
    la.push_back(std::log(a));
    lx.push_back(std::log(sup));
  }
  double slope = (lx.front() - lx.back()) / (la.front() - la.back());
  EXPECT_NEAR(slope, 2.0, 0.2);
}

TEST(Auxiliary, ToyManifoldFlowInvertsState) {
  auto sys = fixtures::toy_manifold();
  for (double a : {0.1, 0.01}) {
    auto u = sinusoid_control(1.0, 1000, 5.0, a);
    auto tr = integrate(sys, Eigen::VectorXd::Zero(2), u, 1e-3);
    auto xi = auxiliary_state(sys, tr, u, 1, 16, 50);
    double sup = 0.0;
    for (const auto& v : xi) sup = std::max(sup, v.norm());
    EXPECT_LE(sup, 10 * a * a);
  }
}
