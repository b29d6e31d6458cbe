#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "quadctrl/vector_field.hpp"
#include "random_systems.hpp"

using namespace quadctrl;
using quadctrl::testing::random_field;

namespace {

Polynomial x(int n, int i) { return Polynomial::variable(n, i); }
Polynomial u(int n) { return Polynomial::control(n); }
Polynomial c(int n, Rational v) { return Polynomial::constant(n, v); }

PolyVectorField easy_f0() { return PolyVectorField({Polynomial(2), x(2, 0) * x(2, 0)}); }
PolyVectorField e1(int n) {
  std::vector<Polynomial> comps(n, Polynomial(n));
  comps[0] = c(n, 1);
  return PolyVectorField(comps);
}

std::vector<Rational> random_point(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> num(-20, 20), den(1, 7);
  std::vector<Rational> p;
  for (int i = 0; i < n; ++i) {
    Rational r(num(rng), den(rng));
    r.canonicalize();
    p.push_back(r);
  }
  return p;
}

}  // namespace

TEST(Rational, ParsesExactForms) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-4"), Rational(-4));
  EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(parse_rational("-1.5e-3"), Rational(-3, 2000));
  EXPECT_EQ(parse_rational("2E2"), Rational(200));
  EXPECT_EQ(parse_rational(" .5 "), Rational(1, 2));
  EXPECT_EQ(to_string(parse_rational("6/-4")), "-3/2");
  EXPECT_THROW(parse_rational("1/0"), InputError);
  EXPECT_THROW(parse_rational("abc"), InputError);
  EXPECT_THROW(parse_rational(""), InputError);
  EXPECT_THROW(parse_rational("1e"), InputError);
}

TEST(Rational, CanonicalAfterArithmetic) {
  Rational a = parse_rational("2/4") + parse_rational("1/6");
  EXPECT_EQ(a.get_num(), 2);
  EXPECT_EQ(a.get_den(), 3);
  EXPECT_GT(Rational(parse_rational("1/-3")).get_den(), 0);
}

TEST(Polynomial, NoStoredZerosAndCanonicalEquality) {
  int n = 2;
  Polynomial p = x(n, 0) + x(n, 1);
  Polynomial q = x(n, 1) + x(n, 0);
  EXPECT_EQ(p, q);
  Polynomial z = p - q;
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.size(), 0u);
  EXPECT_EQ((x(n, 0) * x(n, 1)).degree(), 2);
}

TEST(Polynomial, GradedLexOrder) {
  int n = 2;
  Polynomial p = x(n, 1) * x(n, 1) + x(n, 0) + c(n, 3) + x(n, 0) * x(n, 1);
  std::vector<int> degs;
  for (const auto& [m, coef] : p.terms()) degs.push_back(m.degree());
  EXPECT_TRUE(std::is_sorted(degs.begin(), degs.end()));
  EXPECT_EQ(p.to_string(), "x1*x2 + x2^2 + x1 + 3");
}

TEST(Polynomial, DegreeCapIsEnforced) {
  int n = 1;
  Polynomial p = x(n, 0);
  for (int i = 0; i < degree_cap() - 1; ++i) p = p * x(n, 0);
  EXPECT_EQ(p.degree(), degree_cap());
  EXPECT_THROW(p * x(n, 0), DegreeCapExceeded);
}

TEST(PolyField, EvaluateExamples) {
  int n = 2;
  PolyVectorField f({u(n), x(n, 0) * x(n, 0)});
  EXPECT_TRUE(f.uses_control());
  auto v = f.evaluate<Rational>({2, 0}, Rational(3));
  EXPECT_EQ(v, (std::vector<Rational>{3, 4}));
  auto z = f.evaluate<Rational>({0, 0}, Rational(0));
  EXPECT_EQ(z, (std::vector<Rational>{0, 0}));
  EXPECT_THROW(f.evaluate<Rational>({1}, Rational(0)), DimensionMismatch);
}

TEST(PolyField, EvaluateMatchesHornerOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + trial % 4;
    PolyVectorField f = random_field(rng, n, 0, 3, 5, 2);
    auto p = random_point(rng, n);
    Rational uu = random_point(rng, 1)[0];
    auto v = f.evaluate(p, uu);
    for (int i = 0; i < n; ++i) EXPECT_EQ(v[i], quadctrl::testing::horner_evaluate(f[i], p, uu));
  }
}

TEST(PolyField, JacobianExamples) {
  auto J = easy_f0().jacobian();
  EXPECT_TRUE(J[0][0].is_zero());
  EXPECT_TRUE(J[0][1].is_zero());
  EXPECT_EQ(J[1][0], c(2, 2) * x(2, 0));
  EXPECT_TRUE(J[1][1].is_zero());
  for (const auto& row : PolyVectorField::constant({1, 2, 3}).jacobian())
    for (const auto& e : row) EXPECT_TRUE(e.is_zero());
}

TEST(PolyField, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + trial % 4;
    PolyVectorField f = random_field(rng, n, 0, 3, 5);
    auto J = f.jacobian();
    for (int pt = 0; pt < 5; ++pt) {
      Eigen::VectorXd p(n);
      for (int i = 0; i < n; ++i) p[i] = U(rng);
      Eigen::MatrixXd Jfd = quadctrl::testing::fd_jacobian(f, p);
      std::vector<double> xs(p.data(), p.data() + n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double exact = J[i][j].evaluate(xs, 0.0);
          EXPECT_NEAR(Jfd(i, j), exact, 1e-6 * std::max(1.0, std::abs(exact)));
        }
    }
  }
}

TEST(LieBracket, EasyDriftBracket) {
  PolyVectorField f0 = easy_f0(), f1 = e1(2);
  PolyVectorField br = lie_bracket(f1, lie_bracket(f0, f1));
  EXPECT_EQ(br.evaluate<Rational>({0, 0}), (std::vector<Rational>{0, -2}));
}

TEST(LieBracket, SussmannBracket) {
  int n = 3;
  PolyVectorField f0({Polynomial(n), x(n, 0), x(n, 0) * x(n, 0) * x(n, 0) + x(n, 1) * x(n, 1)});
  PolyVectorField f1 = e1(n);
  EXPECT_EQ(ad_power(f0, f1, 2), PolyVectorField({Polynomial(n), Polynomial(n), c(n, 2) * x(n, 1)}));
  PolyVectorField br = lie_bracket(f1, ad_power(f0, f1, 3));
  EXPECT_EQ(br.evaluate<Rational>({0, 0, 0}), (std::vector<Rational>{0, 0, 2}));
}

TEST(LieBracket, SelfBracketVanishesAndControlRejected) {
  std::mt19937_64 rng(3);
  PolyVectorField X = random_field(rng, 3, 0, 3, 4);
  EXPECT_TRUE(lie_bracket(X, X).is_zero());
  PolyVectorField withu({u(1)});
  EXPECT_THROW(lie_bracket(withu, PolyVectorField(1)), ControlDependentField);
}

TEST(LieBracket, AdPowerBasics) {
  std::mt19937_64 rng(8);
  PolyVectorField X = random_field(rng, 2, 0, 2, 3), Y = random_field(rng, 2, 0, 2, 3);
  EXPECT_EQ(ad_power(X, Y, 0), Y);
  // X and 2X commute
  PolyVectorField X2 = Rational(2) * X;
  EXPECT_TRUE(ad_power(X, X2, 1).is_zero());
  EXPECT_TRUE(ad_power(X, X2, 3).is_zero());
  EXPECT_THROW(ad_power(X, Y, -1), PreconditionError);
}

TEST(LieBracket, AntisymmetryJacobiAndFiniteDifferences) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 1 + trial % 4;
    PolyVectorField X = random_field(rng, n, 0, 3, 4), Y = random_field(rng, n, 0, 3, 4),
                    Z = random_field(rng, n, 0, 3, 4);
    PolyVectorField XY = lie_bracket(X, Y);
    EXPECT_TRUE((XY + lie_bracket(Y, X)).is_zero());
    PolyVectorField jac = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) + lie_bracket(Z, XY);
    EXPECT_TRUE(jac.is_zero());
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = U(rng);
    EXPECT_LE(quadctrl::testing::relative_error(quadctrl::testing::eval_double(XY, p),
                                                quadctrl::testing::fd_bracket(X, Y, p)),
              1e-6);
  }
}

TEST(Truncate, Examples) {
  int m = 2;
  PolyVectorField g({u(m), x(m, 0) * x(m, 0) + x(m, 0) * x(m, 0) * x(m, 0)});
  EXPECT_EQ(taylor_truncate(g, 2), PolyVectorField({u(m), x(m, 0) * x(m, 0)}));
  EXPECT_EQ(taylor_truncate(g, 10), g);
  PolyVectorField h({x(m, 0) * x(m, 1) * u(m), Polynomial(m)});
  EXPECT_TRUE(taylor_truncate(h, 2).is_zero());
}

TEST(Translate, IdentityAndRoundTrip) {
  std::mt19937_64 rng(4);
  int n = 3;
  PolyVectorField f = random_field(rng, n, 1, 3, 4, 1);
  EXPECT_EQ(translate_to_origin(f, {0, 0, 0}, 0), f);
  std::vector<Rational> s = random_point(rng, n);
  Rational su = Rational(1, 3);
  PolyVectorField g = shift_field(shift_field(f, s, su), {-s[0], -s[1], -s[2]}, -su);
  EXPECT_EQ(g, f);
}

TEST(Translate, BilinearEquilibrium) {
  int n = 5;
  PolyVectorField f({Polynomial(n), u(n) * x(n, 0), c(n, 2) * u(n) * x(n, 1), c(n, 3) * u(n) * x(n, 2),
                     x(n, 4) + u(n) * x(n, 1) + x(n, 3)});
  PolyVectorField g = translate_to_origin(f, {1, 0, 0, 0, 0}, 0);
  EXPECT_EQ(g.evaluate<Rational>({0, 0, 0, 0, 0}, Rational(0)), std::vector<Rational>(5, 0));
  EXPECT_EQ(g[1], u(n) * x(n, 0) + u(n));
}

TEST(Translate, NonEquilibriumReportsResidual) {
  int n = 2;
  PolyVectorField f({u(n), x(n, 0) * x(n, 0)});
  try {
    translate_to_origin(f, {1, 0}, 0);
    FAIL() << "expected NotEquilibrium";
  } catch (const NotEquilibrium& e) {
    EXPECT_EQ(e.residual(), (std::vector<std::string>{"0", "1"}));
  }
}
