#pragma once

#include <string>
#include <vector>

#include "quadctrl/lie_analysis.hpp"

namespace quadctrl {

/// Static feedback u = v + <beta, x> putting (H0, b) in nilpotent integrator
/// form on S1.
struct FeedbackTransform {
  int n = 0;
  int d = 0;
  RatVector alpha;  // alpha_1..alpha_d of X^d + alpha_1 X^{d-1} + ... + alpha_d
  RatVector beta;
  RatMatrix R;      // R b = e1
  RatMatrix Rinv;
  RatMatrix H0;
  RatVector b;
  RatMatrix H0_closed;  // H0 + b beta^T

  bool nilpotent_on_b() const { return is_zero(matrix_power(H0_closed, d) * b); }

  /// R H0 R^{-1}; its upper-left d x d block is the companion matrix with
  /// ones on the subdiagonal and -alpha in the first row.
  RatMatrix conjugate() const { return R * H0 * Rinv; }
};

/// Characteristic polynomial coefficients of H0 restricted to the Krylov
/// space of b, in the order alpha_1..alpha_d.
inline RatVector restricted_charpoly(const RatMatrix& H0, const RatVector& b, int d) {
  std::vector<RatVector> powers{b};
  for (int i = 1; i <= d; ++i) powers.push_back(H0 * powers.back());
  std::vector<RatVector> basis(powers.begin(), powers.begin() + d);
  auto gamma = span_coordinates(basis, powers[d]);
  if (!gamma) throw InconsistencyError("H0^d b is outside the Krylov space of b");
  RatVector alpha(d);
  for (int i = 0; i < d; ++i) alpha[d - 1 - i] = -(*gamma)[i];
  return alpha;
}

inline FeedbackTransform build_transform(const QuadraticData& qd, const S1Space& s1) {
  if (s1.d == 0) throw PreconditionError("Brunovsky transform needs b != 0");
  FeedbackTransform t;
  int n = qd.n, d = s1.d;
  t.n = n;
  t.d = d;
  t.alpha = restricted_charpoly(qd.H0, qd.b, d);
  // columns of R^{-1}: c1 = b, c_{j+1} = H0 c_j + alpha_j b, then S1-perp
  std::vector<RatVector> cols{qd.b};
  for (int j = 1; j < d; ++j) cols.push_back(qd.H0 * cols.back() + t.alpha[j - 1] * qd.b);
  for (auto& v : orthogonal_complement(s1.basis, n)) cols.push_back(v);
  t.Rinv = RatMatrix::from_columns(cols, n);
  t.R = inverse(t.Rinv);
  RatVector alpha_full = zeros(n);
  for (int i = 0; i < d; ++i) alpha_full[i] = t.alpha[i];
  t.beta = t.R.transpose() * alpha_full;
  t.H0 = qd.H0;
  t.b = qd.b;
  t.H0_closed = qd.H0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.H0_closed(i, j) += qd.b[i] * t.beta[j];
  if (!t.nilpotent_on_b()) throw InconsistencyError("closed-loop matrix is not nilpotent on b");
  return t;
}

inline FeedbackTransform build_transform(const QuadraticData& qd, const LieReport& r) { return build_transform(qd, r.s1); }

/// Substitutes u = v + <beta, x>.
inline ControlSystem transform_system(const ControlSystem& sys, const RatVector& beta) {
  int n = sys.n();
  if (static_cast<int>(beta.size()) != n) throw DimensionMismatch("feedback has wrong dimension");
  Polynomial bx(n);
  for (int i = 0; i < n; ++i) bx += beta[i] * Polynomial::variable(n, i);
  if (sys.is_affine()) {
    PolyVectorField g0 = sys.f0() + bx * sys.f1();
    return ControlSystem::affine(sys.name(), g0, sys.f1());
  }
  std::vector<Polynomial> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Polynomial::variable(n, i));
  return ControlSystem::nonlinear(sys.name(), sys.field().compose(xs, Polynomial::control(n) + bx));
}

struct InvarianceReport {
  Verdict verdict = Verdict::LinearlyControllable;
  int k = -1;
  RatVector pperp_original;
  RatVector pperp_transformed;
};

/// Checks that verdict, drift order and the P-perp part of the critical
/// bracket survive the feedback.
inline InvarianceReport verify_feedback_invariance(const ControlSystem& sys, const ControlSystem& transformed) {
  auto qa = extract_quadratic_data(sys);
  auto qb = extract_quadratic_data(transformed);
  auto ra = analyze(qa);
  auto rb = analyze(qb);
  auto ca = classify(qa, ra);
  auto cb = classify(qb, rb);
  if (ra.s1.P != rb.s1.P) throw InvarianceFailure("feedback changed S1");
  if (ca.verdict != cb.verdict)
    throw InvarianceFailure("feedback changed the verdict from " + to_string(ca.verdict) + " to " + to_string(cb.verdict));
  if (ca.k != cb.k)
    throw InvarianceFailure("feedback changed the drift order from " + std::to_string(ca.k) + " to " + std::to_string(cb.k));
  InvarianceReport rep;
  rep.verdict = ca.verdict;
  rep.k = ca.k;
  if (ca.verdict == Verdict::Drift) {
    rep.pperp_original = ca.PperpWk;
    rep.pperp_transformed = cb.PperpWk;
  } else if (ca.verdict == Verdict::DriftOrderZero) {
    rep.pperp_original = ca.direction;
    rep.pperp_transformed = cb.direction;
  }
  if (rep.pperp_original != rep.pperp_transformed)
    throw InvarianceFailure("feedback changed the P-perp part of W_" + std::to_string(ca.k));
  return rep;
}

}  // namespace quadctrl
