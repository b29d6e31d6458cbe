#pragma once

#include <string>
#include <vector>

#include "quadctrl/polynomial.hpp"

namespace quadctrl {

/// Polynomial vector field on R^n, optionally depending on a scalar control u.
class PolyVectorField {
 public:
  PolyVectorField() = default;
  explicit PolyVectorField(int n) : n_(n), comps_(n, Polynomial(n)) {}
  explicit PolyVectorField(std::vector<Polynomial> comps) : n_(static_cast<int>(comps.size())), comps_(std::move(comps)) {
    for (const auto& c : comps_)
      if (c.n() != n_) throw DimensionMismatch("field component in " + std::to_string(c.n()) + " variables, field dimension " + std::to_string(n_));
  }

  /// Constant field equal to v everywhere.
  static PolyVectorField constant(const std::vector<Rational>& v) {
    int n = static_cast<int>(v.size());
    PolyVectorField f(n);
    for (int i = 0; i < n; ++i) f.comps_[i] = Polynomial::constant(n, v[i]);
    return f;
  }

  int n() const { return n_; }
  const Polynomial& operator[](int i) const { return comps_.at(i); }
  Polynomial& operator[](int i) { return comps_.at(i); }
  const std::vector<Polynomial>& components() const { return comps_; }

  bool uses_control() const {
    for (const auto& c : comps_)
      if (c.uses_control()) return true;
    return false;
  }
  bool is_zero() const {
    for (const auto& c : comps_)
      if (!c.is_zero()) return false;
    return true;
  }
  int degree() const {
    int d = -1;
    for (const auto& c : comps_) d = std::max(d, c.degree());
    return d;
  }

  PolyVectorField& operator+=(const PolyVectorField& o) {
    check_same(o);
    for (int i = 0; i < n_; ++i) comps_[i] += o.comps_[i];
    return *this;
  }
  PolyVectorField& operator-=(const PolyVectorField& o) {
    check_same(o);
    for (int i = 0; i < n_; ++i) comps_[i] -= o.comps_[i];
    return *this;
  }
  PolyVectorField& operator*=(const Rational& s) {
    for (auto& c : comps_) c *= s;
    return *this;
  }
  friend PolyVectorField operator+(PolyVectorField a, const PolyVectorField& b) { return a += b; }
  friend PolyVectorField operator-(PolyVectorField a, const PolyVectorField& b) { return a -= b; }
  friend PolyVectorField operator*(const Rational& s, PolyVectorField a) { return a *= s; }
  friend PolyVectorField operator*(const Polynomial& p, const PolyVectorField& a) {
    PolyVectorField r(a.n_);
    for (int i = 0; i < a.n_; ++i) r.comps_[i] = p * a.comps_[i];
    return r;
  }
  friend bool operator==(const PolyVectorField& a, const PolyVectorField& b) {
    return a.n_ == b.n_ && a.comps_ == b.comps_;
  }

  template <class T>
  std::vector<T> evaluate(const std::vector<T>& x, const T& u = T(0)) const {
    std::vector<T> out;
    out.reserve(n_);
    for (const auto& c : comps_) out.push_back(c.evaluate(x, u));
    return out;
  }

  /// Entry (i, j) is the derivative of component i with respect to x_j.
  std::vector<std::vector<Polynomial>> jacobian() const {
    std::vector<std::vector<Polynomial>> J(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) J[i].push_back(comps_[i].derivative(j));
    return J;
  }

  /// Y'(x) X(x), the derivative of this field along X.
  PolyVectorField derivative_along(const PolyVectorField& X) const {
    check_same(X);
    PolyVectorField r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        Polynomial dij = comps_[i].derivative(j);
        if (!dij.is_zero() && !X.comps_[j].is_zero()) r.comps_[i] += dij * X.comps_[j];
      }
    return r;
  }

  PolyVectorField derivative_u() const {
    PolyVectorField r(n_);
    for (int i = 0; i < n_; ++i) r.comps_[i] = comps_[i].derivative_u();
    return r;
  }

  PolyVectorField truncate(int m) const {
    PolyVectorField r(n_);
    for (int i = 0; i < n_; ++i) r.comps_[i] = comps_[i].truncate(m);
    return r;
  }

  PolyVectorField control_coefficient(int k) const {
    PolyVectorField r(n_);
    for (int i = 0; i < n_; ++i) r.comps_[i] = comps_[i].control_coefficient(k);
    return r;
  }

  PolyVectorField compose(const std::vector<Polynomial>& xs, const Polynomial& us) const {
    if (us.n() != n_) throw DimensionMismatch("compose into another ring: use compose_components");
    return PolyVectorField(compose_components(xs, us));
  }

  /// Components after substitution, in the ring of the substitutes.
  std::vector<Polynomial> compose_components(const std::vector<Polynomial>& xs, const Polynomial& us) const {
    std::vector<Polynomial> r;
    for (const auto& c : comps_) r.push_back(c.compose(xs, us));
    return r;
  }

  std::vector<std::string> to_strings() const {
    std::vector<std::string> s;
    for (const auto& c : comps_) s.push_back(c.to_string());
    return s;
  }

 private:
  void check_same(const PolyVectorField& o) const {
    if (o.n_ != n_) throw DimensionMismatch("fields of dimension " + std::to_string(n_) + " and " + std::to_string(o.n_));
  }

  int n_ = 0;
  std::vector<Polynomial> comps_;
};

/// [X,Y] = Y' X - X' Y
inline PolyVectorField lie_bracket(const PolyVectorField& X, const PolyVectorField& Y) {
  if (X.uses_control() || Y.uses_control())
    throw ControlDependentField("Lie bracket needs fields that do not depend on the control");
  return Y.derivative_along(X) - X.derivative_along(Y);
}

/// ad_X^k(Y), with ad^0 = Y and ad^{k+1} = [X, ad^k].
inline PolyVectorField ad_power(const PolyVectorField& X, const PolyVectorField& Y, int k) {
  if (k < 0) throw PreconditionError("ad power must be nonnegative");
  PolyVectorField r = Y;
  for (int i = 0; i < k; ++i) r = lie_bracket(X, r);
  return r;
}

/// All ad_X^k(Y) for k = 0..K.
inline std::vector<PolyVectorField> ad_powers(const PolyVectorField& X, const PolyVectorField& Y, int K) {
  std::vector<PolyVectorField> out{Y};
  for (int k = 1; k <= K; ++k) out.push_back(lie_bracket(X, out.back()));
  return out;
}

inline PolyVectorField taylor_truncate(const PolyVectorField& f, int m) {
  if (m < 0) throw PreconditionError("truncation order must be nonnegative");
  return f.truncate(m);
}

/// Substitutes x -> x + x_e, u -> u + u_e without checking anything.
inline PolyVectorField shift_field(const PolyVectorField& f, const std::vector<Rational>& x_e, const Rational& u_e) {
  int n = f.n();
  std::vector<Polynomial> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Polynomial::variable(n, i) + Polynomial::constant(n, x_e.at(i)));
  return f.compose(xs, Polynomial::control(n) + Polynomial::constant(n, u_e));
}

/// Re-expands f in x~ = x - x_e, u~ = u - u_e. Rejects points that are not
/// equilibria and reports the residual.
inline PolyVectorField translate_to_origin(const PolyVectorField& f, const std::vector<Rational>& x_e, const Rational& u_e) {
  int n = f.n();
  if (static_cast<int>(x_e.size()) != n) throw DimensionMismatch("equilibrium has wrong dimension");
  std::vector<Rational> residual = f.evaluate(x_e, u_e);
  bool zero = true;
  std::vector<std::string> res;
  for (const auto& r : residual) {
    zero = zero && r == 0;
    res.push_back(to_string(r));
  }
  if (!zero) {
    std::string msg = "not an equilibrium: f(x_e, u_e) = (";
    for (std::size_t i = 0; i < res.size(); ++i) msg += (i ? ", " : "") + res[i];
    throw NotEquilibrium(msg + ")", res);
  }
  return shift_field(f, x_e, u_e);
}

}  // namespace quadctrl
