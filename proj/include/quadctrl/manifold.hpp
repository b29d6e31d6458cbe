#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "quadctrl/lie_analysis.hpp"
#include "quadctrl/simulate.hpp"

namespace quadctrl {

/// Second-order manifold M2 = {P-perp x = G2(Px)} through the origin.
struct QuadraticManifold {
  int n = 0;
  int d = 0;
  std::vector<RatVector> basis;  // b_0..b_{d-1}
  RatMatrix C;                   // d x n, Px = sum_i (Cx)_i b_i
  RatMatrix P;
  RatMatrix Pperp;
  /// coef[i][j], i <= j: P-perp(L_i b_i) / 2 on the diagonal, P-perp(L_i b_j) above it
  std::vector<std::vector<RatVector>> coef;
  /// sym[i][j] = P-perp(L_i b_j) / 2 for all i, j
  std::vector<std::vector<RatVector>> sym;

  /// G2 evaluated on basis coordinates p.
  RatVector g2(const RatVector& p) const {
    RatVector r = zeros(n);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) r = r + (p[i] * p[j]) * coef[i][j];
    return r;
  }

  /// Basis coordinates of x as linear polynomials in x.
  std::vector<Polynomial> coordinate_polys() const {
    std::vector<Polynomial> c;
    for (int i = 0; i < d; ++i) {
      Polynomial p(n);
      for (int k = 0; k < n; ++k)
        if (C(i, k) != 0) p += C(i, k) * Polynomial::variable(n, k);
      c.push_back(std::move(p));
    }
    return c;
  }

  /// G2(Px) as a field in x.
  PolyVectorField g2_field() const {
    auto c = coordinate_polys();
    PolyVectorField g(n);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        if (is_zero(coef[i][j])) continue;
        Polynomial pij = c[i] * c[j];
        for (int k = 0; k < n; ++k)
          if (coef[i][j][k] != 0) g[k] += coef[i][j][k] * pij;
      }
    return g;
  }

  PolyVectorField pperp_field() const {
    PolyVectorField f(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (Pperp(i, k) != 0) f[i] += Pperp(i, k) * Polynomial::variable(n, k);
    return f;
  }

  /// Q(x) = P-perp x - G2(Px).
  PolyVectorField Q() const { return pperp_field() - g2_field(); }

  /// P-perp x - (1/2) sum_{i,j} P_i(x) P_j(x) P-perp(L_i b_j).
  PolyVectorField Q_symmetric() const {
    auto c = coordinate_polys();
    PolyVectorField g(n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (is_zero(sym[i][j])) continue;
        Polynomial pij = c[i] * c[j];
        for (int k = 0; k < n; ++k)
          if (sym[i][j][k] != 0) g[k] += sym[i][j][k] * pij;
      }
    return pperp_field() - g;
  }

  /// Q(p + G2(p)) as a polynomial in the d basis coordinates; zero when the
  /// construction is consistent.
  std::vector<Polynomial> identity_residual() const {
    std::vector<Polynomial> xs(n, Polynomial(d));
    std::vector<Polynomial> p;
    for (int i = 0; i < d; ++i) p.push_back(Polynomial::variable(d, i));
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < d; ++i)
        if (basis[i][k] != 0) xs[k] += basis[i][k] * p[i];
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          if (coef[i][j][k] != 0) xs[k] += coef[i][j][k] * (p[i] * p[j]);
    }
    return Q().compose_components(xs, Polynomial(d));
  }

  bool flat() const {
    for (const auto& row : coef)
      for (const auto& v : row)
        if (!is_zero(v)) return false;
    return true;
  }

  /// Readable equations of M2. Coordinate-aligned S1 gives "x2 = x1^2"
  /// style equations; otherwise the graph map is listed on basis coordinates.
  std::vector<std::string> describe() const {
    std::vector<std::string> out;
    std::vector<int> on;
    bool aligned = true;
    for (const auto& v : basis) {
      int nz = 0, at = -1;
      for (int k = 0; k < n; ++k)
        if (v[k] != 0) ++nz, at = k;
      if (nz != 1) aligned = false;
      on.push_back(at);
    }
    if (aligned) {
      PolyVectorField q = Q();
      for (int k = 0; k < n; ++k) {
        if (std::find(on.begin(), on.end(), k) != on.end()) continue;
        // Q_k = x_k - G2_k
        Polynomial rhs = Polynomial::variable(n, k) - q[k];
        out.push_back("x" + std::to_string(k + 1) + " = " + rhs.to_string());
      }
      return out;
    }
    for (int k = 0; k < n; ++k) {
      Polynomial g(d);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          if (coef[i][j][k] != 0) g += coef[i][j][k] * (Polynomial::variable(d, i) * Polynomial::variable(d, j));
      out.push_back("(P-perp x)_" + std::to_string(k + 1) + " = " + g.to_string() + " with x_i = <Px, b_{i-1}>-coordinates");
    }
    return out;
  }
};

inline QuadraticManifold build_m2(const QuadraticData& qd, const LieReport& r) {
  const S1Space& s1 = r.s1;
  if (s1.d < 1) throw PreconditionError("manifold construction needs b != 0");
  if (r.K < s1.d - 1) throw PreconditionError("Lie report too short for the manifold");
  QuadraticManifold m;
  m.n = qd.n;
  m.d = s1.d;
  m.basis = s1.basis;
  m.P = s1.P;
  m.Pperp = s1.Pperp;
  RatMatrix B = RatMatrix::from_columns(s1.basis, qd.n);
  RatMatrix Bt = B.transpose();
  m.C = inverse(Bt * B) * Bt;
  int d = s1.d;
  m.coef.assign(d, std::vector<RatVector>(d, zeros(qd.n)));
  m.sym.assign(d, std::vector<RatVector>(d, zeros(qd.n)));
  Rational half(1, 2);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      RatVector v = s1.Pperp * (r.L[i] * r.b[j]);
      m.sym[i][j] = half * v;
      if (i == j) m.coef[i][j] = half * v;
      else if (i < j) m.coef[i][j] = v;
    }
  return m;
}

// ---------------------------------------------------------------------------

/// Homogeneous second-order system in zeta:
/// zeta' = g0(zeta) + u g1(zeta) + u^2 drift.
struct HomogeneousSystem {
  int n = 0;
  PolyVectorField g0;
  PolyVectorField g1;
  RatVector drift;  // P-perp d0 / 2
  bool well_prepared = false;

  PolyVectorField field() const {
    Polynomial u = Polynomial::control(n);
    PolyVectorField f = g0 + u * g1;
    if (!is_zero(drift)) f = f + (u * u) * PolyVectorField::constant(drift);
    return f;
  }
};

namespace detail {
inline PolyVectorField linear_field(const RatMatrix& A) {
  int n = A.rows();
  PolyVectorField f(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (A(i, j) != 0) f[i] += A(i, j) * Polynomial::variable(n, j);
  return f;
}
}  // namespace detail

inline HomogeneousSystem build_homogeneous(const QuadraticData& qd, const LieReport& r) {
  int n = qd.n;
  const RatMatrix& P = r.s1.P;
  const RatMatrix& Pp = r.s1.Pperp;
  HomogeneousSystem hs;
  hs.n = n;
  hs.g0 = detail::linear_field(qd.H0 * P + Pp * qd.H0);
  // P-perp Q0(P zeta, P zeta)
  std::vector<Polynomial> pz;
  for (int a = 0; a < n; ++a) {
    Polynomial p(n);
    for (int k = 0; k < n; ++k)
      if (P(a, k) != 0) p += P(a, k) * Polynomial::variable(n, k);
    pz.push_back(std::move(p));
  }
  PolyVectorField quad(n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        if (qd.Q0[i](a, c) != 0 && !pz[a].is_zero() && !pz[c].is_zero()) quad[i] += qd.Q0[i](a, c) * (pz[a] * pz[c]);
  PolyVectorField pq(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (Pp(i, k) != 0) pq[i] += Pp(i, k) * quad[k];
  hs.g0 = hs.g0 + pq;
  hs.g1 = PolyVectorField::constant(qd.b) + detail::linear_field(Pp * qd.H1 * P);
  hs.drift = Rational(1, 2) * (Pp * qd.d0);
  hs.well_prepared = is_zero(matrix_power(qd.H0, r.s1.d) * qd.b);
  return hs;
}

struct ZetaCheck {
  int Kmax = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// ad^k_{g0}(g1)(zeta) = b_k + P-perp L_k P zeta and
/// [ad^k, ad^j](zeta) = P-perp(L_j b_k - L_k b_j), checked symbolically.
inline ZetaCheck verify_zeta_brackets(const HomogeneousSystem& hs, const LieReport& r, int Kmax = -1) {
  if (Kmax < 0) Kmax = hs.n;
  if (Kmax > r.K) throw PreconditionError("bracket order exceeds the Lie report");
  ZetaCheck chk;
  chk.Kmax = Kmax;
  auto ads = ad_powers(hs.g0, hs.g1, Kmax);
  for (int k = 0; k <= Kmax; ++k) {
    PolyVectorField expected = PolyVectorField::constant(r.b[k]) + detail::linear_field(r.s1.Pperp * r.L[k] * r.s1.P);
    if (ads[k] != expected) chk.failures.push_back("ad^" + std::to_string(k) + " differs from b_k + P-perp L_k P zeta");
  }
  for (int k = 0; k <= Kmax; ++k)
    for (int j = k + 1; j <= Kmax; ++j) {
      PolyVectorField br = lie_bracket(ads[k], ads[j]);
      PolyVectorField expected = PolyVectorField::constant(r.s1.Pperp * second_order_bracket(r, k, j));
      if (br != expected)
        chk.failures.push_back("[ad^" + std::to_string(k) + ", ad^" + std::to_string(j) + "] differs from P-perp(L_j b_k - L_k b_j)");
    }
  return chk;
}

/// d/dt Q(zeta) - P-perp H0 Q(zeta) along the zeta dynamics, as a polynomial
/// in (zeta, u). Vanishes identically in the manifold case.
inline PolyVectorField manifold_transport_residual(const HomogeneousSystem& hs, const QuadraticManifold& m,
                                                   const QuadraticData& qd) {
  PolyVectorField q = m.Q();
  PolyVectorField dq = q.derivative_along(hs.field());
  RatMatrix A = m.Pperp * qd.H0;
  PolyVectorField aq(hs.n);
  for (int i = 0; i < hs.n; ++i)
    for (int k = 0; k < hs.n; ++k)
      if (A(i, k) != 0) aq[i] += A(i, k) * q[k];
  return dq - aq;
}

/// Integrates the zeta system and returns sup_t |Q(zeta(t))|.
inline double invariance_experiment(const HomogeneousSystem& hs, const QuadraticManifold& m,
                                    const Classification& cls, const ControlSignal& u, double dt,
                                    std::optional<Eigen::VectorXd> zeta0 = std::nullopt) {
  if (cls.verdict != Verdict::InvariantManifold)
    throw PreconditionError("invariance experiment needs an invariant-manifold system, got " + to_string(cls.verdict) +
                            ": drift breaks the symmetry P-perp L_j b_k = P-perp L_k b_j");
  Eigen::VectorXd z0 = zeta0 ? *zeta0 : Eigen::VectorXd::Zero(hs.n);
  auto tr = integrate(NumericField(hs.field()), z0, u, dt);
  NumericField q(m.Q());
  double sup = 0.0;
  for (const auto& z : tr.x) sup = std::max(sup, q(z).norm());
  return sup;
}

}  // namespace quadctrl
