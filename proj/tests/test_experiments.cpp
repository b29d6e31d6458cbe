#include <gtest/gtest.h>

#include <cmath>

#include "quadctrl/experiments.hpp"
#include "quadctrl/fixtures.hpp"

using namespace quadctrl;

namespace {

struct Setup {
  QuadraticData qd;
  LieReport r;
  Classification cls;
  QuadraticManifold m;
};

Setup setup(const ControlSystem& sys) {
  Setup s;
  s.qd = extract_quadratic_data(sys);
  s.r = analyze(s.qd);
  s.cls = classify(s.qd, s.r);
  s.m = build_m2(s.qd, s.r);
  return s;
}

}  // namespace

TEST(DriftCheck, EasyDriftSeriesIsTwiceX2) {
  auto sys = fixtures::easy_drift();
  auto s = setup(sys);
  auto u = bump_control(1.0, 1000, 0.1, 0.8, 0.01);
  auto series = drift_check(sys, s.cls, s.m, u, 1e-3);
  auto tr = integrate(sys, Eigen::VectorXd::Zero(2), u, 1e-3);
  for (std::size_t i = 0; i < tr.x.size(); i += 50) EXPECT_NEAR(series.value[i], 2 * tr.x[i][1], 1e-18);
  // 2 x2 = 2 int u_1^2
  auto u1 = primitive_poly(u, 1);
  EXPECT_NEAR(series.final, 2 * u1.integral_abs_pow(2.0), 1e-10 * series.final);
  EXPECT_GE(series.min, 0.0);
}

TEST(DriftCheck, ZeroControlGivesZeroSeries) {
  auto sys = fixtures::sussmann();
  auto s = setup(sys);
  auto u = ControlSignal::sample(1.0, 100, [](double) { return 0.0; }, "zero");
  auto series = drift_check(sys, s.cls, s.m, u, 1e-2);
  for (double v : series.value) EXPECT_EQ(v, 0.0);
}

TEST(DriftCheck, RejectsManifoldSystems) {
  auto sys = fixtures::toy_manifold();
  auto s = setup(sys);
  auto u = ControlSignal::sample(1.0, 100, [](double) { return 0.0; }, "zero");
  EXPECT_THROW(drift_check(sys, s.cls, s.m, u, 1e-2), PreconditionError);
}

TEST(DriftCheck, WitnessOnDriftFixtures) {
  unsigned seed = 7;
  for (const auto& info : fixtures::all()) {
    auto sys = info.make();
    auto s = setup(sys);
    if (!s.cls.is_drift()) continue;
    bool sus = info.name == "sussmann";
    auto w = drift_witness(sys, 20, seed++, 1e-2, sus);
    EXPECT_EQ(w.violations, 0) << info.name << " margin " << w.worst_margin;
    EXPECT_EQ(w.final_violations, 0) << info.name;
  }
}

TEST(Scaling, LoglogSlope) {
  EXPECT_NEAR(loglog_slope({1, 2, 4}, {3, 12, 48}), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({1, 2}, {0, 0})));
}

TEST(Scaling, EasyDriftQuadratic) {
  auto fam = [](double a) { return bump_control(1.0, 1000, 0.1, 0.9, a); };
  auto rep = scaling_study(fixtures::easy_drift(), fam, {1e-1, 3e-2, 1e-2, 3e-3}, 1e-3);
  EXPECT_NEAR(rep.drift_slope, 2.0, 0.2);
  EXPECT_THROW(scaling_study(fixtures::easy_drift(), fam, {1e-1, 1e-2}, 1e-3), PreconditionError);
}

TEST(Scaling, BentResidualCubic) {
  auto fam = [](double a) { return bump_control(1.0, 1000, 0.1, 0.9, a); };
  auto rep = scaling_study(fixtures::bent(), fam, {1e-1, 3e-2, 1e-2, 3e-3}, 1e-3);
  EXPECT_FALSE(rep.residual_exact);
  EXPECT_NEAR(rep.residual_slope, 3.0, 0.3);
}

TEST(Scaling, ToyManifoldResidualAtFloor) {
  auto fam = [](double a) { return bump_control(1.0, 1000, 0.1, 0.9, a); };
  auto rep = scaling_study(fixtures::toy_manifold(), fam, {1e-1, 3e-2, 1e-2, 3e-3}, 1e-3);
  for (double v : rep.residual_sup) EXPECT_LE(v, 1e-12);
}

TEST(Dilation, ScalingLawsAndSignReversal) {
  auto sys = fixtures::opt_affine(2);
  auto probe = dilation_experiment(sys, 2, {{1e-3, 2.0}});
  // lambda of opposite sign to a; cubic dominance once |a lambda| mu^3 > 1
  double lambda = probe.a > 0 ? -2e-3 : 2e-3;
  auto rep = dilation_experiment(sys, 2, {{lambda, 1.5}, {lambda, 2.0}, {lambda, 4.0}, {lambda, 8.0}});
  EXPECT_LE(rep.max_rel_error_l2, 0.02);
  EXPECT_LE(rep.max_rel_error_cube, 0.02);
  EXPECT_GT(rep.points.front().x_final, 0.0);
  EXPECT_LT(rep.points.back().x_final, 0.0);
  EXPECT_TRUE(rep.sign_reversal);
  for (const auto& p : rep.points)
    EXPECT_NEAR(p.x_final, p.l2_predicted + p.cube_predicted, 0.02 * (p.l2_predicted + std::abs(p.cube_predicted)));
}
