#pragma once

#include <string>
#include <vector>

#include "quadctrl/rational_linalg.hpp"
#include "quadctrl/system.hpp"

namespace quadctrl {

/// Second-order data of a system at the origin.
struct QuadraticData {
  int n = 0;
  SystemKind kind = SystemKind::Affine;
  RatMatrix H0;  // d_x f0(0)
  RatVector b;   // f1(0)
  RatMatrix H1;  // d_x f1(0)
  /// Q0[i] is the symmetric matrix of component i of half the Hessian of f0.
  std::vector<RatMatrix> Q0;
  RatVector d0;  // d_u^2 f(0, 0)

  RatVector Q0_apply(const RatVector& h, const RatVector& g) const {
    RatVector r = zeros(n);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) {
        if (h[a] == 0) continue;
        for (int c = 0; c < n; ++c) r[i] += h[a] * Q0[i](a, c) * g[c];
      }
    return r;
  }

  /// Matrix of the linear map g -> Q0(h, g).
  RatMatrix Q0_partial(const RatVector& h) const {
    RatMatrix M(n, n);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a) M(i, c) += h[a] * Q0[i](a, c);
    return M;
  }
};

inline RatMatrix linear_part(const PolyVectorField& f) {
  int n = f.n();
  RatMatrix H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Monomial m(n);
      m.px[j] = 1;
      H(i, j) = f[i].coefficient(m);
    }
  return H;
}

inline RatVector constant_part(const PolyVectorField& f) {
  RatVector v;
  for (int i = 0; i < f.n(); ++i) v.push_back(f[i].constant_term());
  return v;
}

inline QuadraticData extract_quadratic_data(const ControlSystem& sys) {
  QuadraticData qd;
  int n = sys.n();
  qd.n = n;
  qd.kind = sys.kind();
  qd.H0 = linear_part(sys.f0());
  qd.b = constant_part(sys.f1());
  qd.H1 = linear_part(sys.f1());
  qd.Q0.assign(n, RatMatrix(n, n));
  for (int i = 0; i < n; ++i)
    for (const auto& [m, c] : sys.f0()[i].terms()) {
      if (m.degree() != 2 || m.pu != 0) continue;
      int a = -1, b = -1;
      for (int j = 0; j < n; ++j) {
        for (int e = 0; e < m.px[j]; ++e) (a < 0 ? a : b) = j;
      }
      if (a == b) {
        qd.Q0[i](a, a) = c;
      } else {
        qd.Q0[i](a, b) = c / 2;
        qd.Q0[i](b, a) = c / 2;
      }
    }
  qd.d0 = zeros(n);
  if (!sys.is_affine()) {
    Monomial u2(n);
    u2.pu = 2;
    for (int i = 0; i < n; ++i) qd.d0[i] = 2 * sys.field()[i].coefficient(u2);
  }
  return qd;
}

/// Controllable space of the linearization, with its orthogonal projectors.
struct S1Space {
  int n = 0;
  int d = 0;
  std::vector<RatVector> basis;  // b_0..b_{d-1}
  RatMatrix P;
  RatMatrix Pperp;

  bool contains(const RatVector& v) const { return in_span(basis, v); }
  RatVector project_perp(const RatVector& v) const { return Pperp * v; }
  bool kalman() const { return d == n; }
};

/// b_k = (-H0)^k b for k = 0..K.
inline std::vector<RatVector> krylov_vectors(const QuadraticData& qd, int K) {
  std::vector<RatVector> bk{qd.b};
  RatMatrix minusH = Rational(-1) * qd.H0;
  for (int k = 1; k <= K; ++k) bk.push_back(minusH * bk.back());
  return bk;
}

inline S1Space compute_s1(const QuadraticData& qd) {
  S1Space s;
  s.n = qd.n;
  auto bk = krylov_vectors(qd, qd.n - 1);
  // the Krylov sequence stops growing at the first dependent vector
  for (const auto& v : bk) {
    if (in_span(s.basis, v)) break;
    s.basis.push_back(v);
  }
  s.d = static_cast<int>(s.basis.size());
  s.P = orthogonal_projector(s.basis, qd.n);
  s.Pperp = RatMatrix::identity(qd.n) - s.P;
  return s;
}

/// L_0 = H1, L_{k+1} = L_k H0 - H0 L_k - 2 Q0(b_k, .)
inline std::vector<RatMatrix> compute_Lk(const QuadraticData& qd, int K) {
  auto bk = krylov_vectors(qd, K);
  std::vector<RatMatrix> L{qd.H1};
  for (int k = 0; k < K; ++k) {
    const RatMatrix& Lk = L.back();
    L.push_back(Lk * qd.H0 - qd.H0 * Lk - Rational(2) * qd.Q0_partial(bk[k]));
  }
  return L;
}

struct LieReport {
  int n = 0;
  int K = 0;
  std::vector<RatVector> b;  // b_k, k = 0..K
  std::vector<RatMatrix> L;  // L_k, k = 0..K
  S1Space s1;
  std::vector<RatVector> W;  // W_k for k = 1..K, W[0] unused
  int s2_Kmax = 0;
  std::vector<RatVector> s2_basis;

  int d() const { return s1.d; }
};

/// [ad^k_{f0} f1, ad^j_{f0} f1](0) = L_j b_k - L_k b_j
inline RatVector second_order_bracket(const LieReport& r, int k, int j) {
  if (k < 0 || j < 0 || k > r.K || j > r.K) throw PreconditionError("bracket index outside the computed range");
  return r.L[j] * r.b[k] - r.L[k] * r.b[j];
}

/// Span of (-H0)^i (L_j b_k - L_k b_j) for i <= n-1 and j, k <= Kmax.
inline std::vector<RatVector> compute_s2(const QuadraticData& qd, const LieReport& r, int Kmax) {
  if (Kmax < qd.n) throw PreconditionError("S2 truncation bound must be at least n");
  if (Kmax > r.K) throw PreconditionError("S2 truncation bound exceeds the computed L_k range");
  RatMatrix minusH = Rational(-1) * qd.H0;
  std::vector<RatVector> basis = r.s1.basis;
  for (int k = 0; k <= Kmax; ++k)
    for (int j = k + 1; j <= Kmax; ++j) {
      RatVector v = second_order_bracket(r, k, j);
      for (int i = 0; i < qd.n && !is_zero(v); ++i) {
        if (!in_span(basis, v)) basis.push_back(v);
        if (static_cast<int>(basis.size()) == qd.n) return basis;
        v = minusH * v;
      }
    }
  return basis;
}

/// Full Lie data with brackets up to order K = 2n (enough for the S2
/// truncation and for every drift order k <= d).
inline LieReport analyze(const QuadraticData& qd, int Kmax = -1) {
  LieReport r;
  r.n = qd.n;
  if (Kmax < 0) Kmax = 2 * qd.n;
  r.K = std::max(Kmax, 2 * qd.n);
  r.b = krylov_vectors(qd, r.K);
  r.L = compute_Lk(qd, r.K);
  r.s1 = compute_s1(qd);
  r.W.assign(1, zeros(qd.n));
  for (int k = 1; k <= r.K; ++k) r.W.push_back(r.L[k] * r.b[k - 1] - r.L[k - 1] * r.b[k]);
  r.s2_Kmax = Kmax;
  r.s2_basis = compute_s2(qd, r, Kmax);
  return r;
}

enum class Verdict { LinearlyControllable, InvariantManifold, DriftOrderZero, Drift };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::LinearlyControllable: return "linearly_controllable";
    case Verdict::InvariantManifold: return "invariant_manifold";
    case Verdict::DriftOrderZero: return "drift_order_zero";
    case Verdict::Drift: return "drift";
  }
  return "unknown";
}

struct Classification {
  Verdict verdict = Verdict::LinearlyControllable;
  SystemKind kind = SystemKind::Affine;
  int n = 0;
  int d = 0;
  int k = -1;           // drift order, 0 for order-zero drift, -1 otherwise
  RatVector direction;  // d_k, or the projected d0 for order-zero drift
  RatVector PperpWk;    // P-perp part of W_k (Drift only)

  bool is_drift() const { return verdict == Verdict::Drift || verdict == Verdict::DriftOrderZero; }

  /// Which control norm the verdict concerns.
  std::string norm_threshold() const {
    if (verdict == Verdict::DriftOrderZero) return "L^inf";
    if (verdict != Verdict::Drift) return "";
    int m = kind == SystemKind::Affine ? 2 * k - 3 : 2 * k;
    return "W^{" + std::to_string(m) + ",inf}";
  }

  std::string message() const {
    switch (verdict) {
      case Verdict::LinearlyControllable:
        return "Kalman rank condition holds: the system is small-time locally controllable";
      case Verdict::InvariantManifold:
        return "S2 is contained in S1: up to cubic terms the state stays on a " + std::to_string(d) +
               "-dimensional manifold tangent to S1";
      case Verdict::DriftOrderZero:
        return "quadratic drift of order 0 along " + format_vector(direction) +
               ": not small-time locally controllable with controls small in " + norm_threshold();
      case Verdict::Drift:
        return "quadratic drift of order " + std::to_string(k) + " along " + format_vector(direction) +
               ": not small-time locally controllable with controls small in " + norm_threshold();
    }
    return "";
  }
};

inline Classification classify(const QuadraticData& qd, const LieReport& r) {
  Classification c;
  c.kind = qd.kind;
  c.n = qd.n;
  c.d = r.d();
  if (r.s1.kalman()) {
    c.verdict = Verdict::LinearlyControllable;
    return c;
  }
  if (qd.kind == SystemKind::Nonlinear && !r.s1.contains(qd.d0)) {
    c.verdict = Verdict::DriftOrderZero;
    c.k = 0;
    c.direction = r.s1.project_perp(qd.d0);
    return c;
  }
  for (int k = 1; k <= r.d(); ++k) {
    if (r.s1.contains(r.W[k])) continue;
    c.verdict = Verdict::Drift;
    c.k = k;
    c.PperpWk = r.s1.project_perp(r.W[k]);
    c.direction = -c.PperpWk;
    return c;
  }
  c.verdict = Verdict::InvariantManifold;
  return c;
}

inline Classification classify(const ControlSystem& sys) {
  QuadraticData qd = extract_quadratic_data(sys);
  return classify(qd, analyze(qd));
}

struct KrenerEntry {
  int l = 0;
  RatVector bracket;  // [ad^l, ad^{2k-1-l}](0)
  int sign = 0;       // P-perp part equals sign * P-perp W_k
  int alternating_sign = 0;
};

struct KrenerReport {
  int k = 0;
  int lower_pairs_checked = 0;
  std::vector<KrenerEntry> entries;
  bool independent = false;
};

/// Cross-checks a drift of order k: lower brackets stay in S1, every bracket
/// of total order 2k-1 leaves S1 along +-P-perp W_k with alternating signs,
/// and b_0..b_{k-1} are independent.
inline KrenerReport krener_checks(const QuadraticData&, const LieReport& r, int k) {
  if (k < 1 || k > r.d()) throw PreconditionError("Krener checks need a drift order 1 <= k <= d");
  KrenerReport rep;
  rep.k = k;
  for (int a = 0; a <= 2 * k - 2; ++a)
    for (int b = a + 1; a + b <= 2 * k - 2; ++b) {
      if (!r.s1.contains(second_order_bracket(r, a, b)))
        throw InconsistencyError("bracket [ad^" + std::to_string(a) + ", ad^" + std::to_string(b) +
                                 "](0) leaves S1 below the drift order");
      ++rep.lower_pairs_checked;
    }
  RatVector pw = r.s1.project_perp(r.W[k]);
  if (is_zero(pw)) throw InconsistencyError("W_" + std::to_string(k) + " lies in S1");
  for (int l = 0; l <= 2 * k - 1; ++l) {
    KrenerEntry e;
    e.l = l;
    e.bracket = second_order_bracket(r, l, 2 * k - 1 - l);
    RatVector pb = r.s1.project_perp(e.bracket);
    if (pb == pw) e.sign = 1;
    else if (pb == -pw) e.sign = -1;
    else
      throw InconsistencyError("bracket [ad^" + std::to_string(l) + ", ad^" + std::to_string(2 * k - 1 - l) +
                               "](0) is not +-P-perp W_" + std::to_string(k) + " modulo S1");
    e.alternating_sign = ((k - 1 + l) % 2 == 0) ? 1 : -1;
    if (e.sign != e.alternating_sign)
      throw InconsistencyError("bracket [ad^" + std::to_string(l) + ", ad^" + std::to_string(2 * k - 1 - l) +
                               "](0) has the wrong sign");
    rep.entries.push_back(e);
  }
  std::vector<RatVector> first(r.b.begin(), r.b.begin() + k);
  rep.independent = static_cast<int>(span_basis(first).size()) == k;
  if (!rep.independent) throw InconsistencyError("b_0..b_{k-1} are dependent");
  return rep;
}

}  // namespace quadctrl
