#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

#include "quadctrl/errors.hpp"
#include "quadctrl/rational.hpp"

namespace quadctrl {

inline constexpr int kDefaultDegreeCap = 24;

/// Total-degree cap applied to every polynomial product. Read once from
/// QUADCTRL_DEGREE_CAP, falling back to 24.
inline int degree_cap() {
  static const int cap = [] {
    if (const char* env = std::getenv("QUADCTRL_DEGREE_CAP")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v > 0 && v < 100000) return static_cast<int>(v);
    }
    return kDefaultDegreeCap;
  }();
  return cap;
}

/// x1^px[0] ... xn^px[n-1] * u^pu
struct Monomial {
  std::vector<int> px;
  int pu = 0;

  Monomial() = default;
  explicit Monomial(int n) : px(n, 0) {}
  Monomial(std::vector<int> exps, int u_exp) : px(std::move(exps)), pu(u_exp) {}

  int n() const { return static_cast<int>(px.size()); }
  int degree() const { return std::accumulate(px.begin(), px.end(), pu); }
  int state_degree() const { return std::accumulate(px.begin(), px.end(), 0); }

  Monomial operator*(const Monomial& o) const {
    Monomial m(*this);
    for (std::size_t i = 0; i < px.size(); ++i) m.px[i] += o.px[i];
    m.pu += o.pu;
    return m;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// Graded lexicographic order: lower total degree first, then x1 > x2 > ... > u.
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    for (std::size_t i = 0; i < a.px.size(); ++i) {
      if (a.px[i] != b.px[i]) return a.px[i] > b.px[i];
    }
    return a.pu > b.pu;
  }
};

template <class T>
T coefficient_as(const Rational& c) {
  if constexpr (std::is_same_v<T, Rational>) {
    return c;
  } else {
    return T(c.get_d());
  }
}

class Polynomial {
 public:
  using Terms = std::map<Monomial, Rational, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(int n) : n_(n) {}

  static Polynomial constant(int n, const Rational& c) {
    Polynomial p(n);
    p.add_term(Monomial(n), c);
    return p;
  }
  static Polynomial variable(int n, int i) {
    Polynomial p(n);
    Monomial m(n);
    m.px.at(i) = 1;
    p.add_term(m, 1);
    return p;
  }
  static Polynomial control(int n) {
    Polynomial p(n);
    Monomial m(n);
    m.pu = 1;
    p.add_term(m, 1);
    return p;
  }

  int n() const { return n_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

  bool uses_control() const {
    return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.pu > 0; });
  }

  Rational coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Rational constant_term() const { return coefficient(Monomial(n_)); }

  void add_term(const Monomial& m, const Rational& c) {
    if (m.n() != n_) throw DimensionMismatch("monomial has " + std::to_string(m.n()) + " variables, polynomial has " + std::to_string(n_));
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_same(b);
    Polynomial r(a.n_);
    if (a.is_zero() || b.is_zero()) return r;
    int deg = a.degree() + b.degree();
    if (deg > degree_cap()) throw DegreeCapExceeded(deg, degree_cap());
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

  /// d/dx_i
  Polynomial derivative(int i) const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) {
      int e = m.px.at(i);
      if (e == 0) continue;
      Monomial dm = m;
      dm.px[i] = e - 1;
      r.add_term(dm, c * e);
    }
    return r;
  }

  Polynomial derivative_u() const {
    Polynomial r(n_);
    for (const auto& [m, c] : terms_) {
      if (m.pu == 0) continue;
      Monomial dm = m;
      dm.pu = m.pu - 1;
      r.add_term(dm, c * m.pu);
    }
    return r;
  }

  /// Drops every monomial of total degree (x and u jointly) above m.
  Polynomial truncate(int m) const {
    Polynomial r(n_);
    for (const auto& [mon, c] : terms_)
      if (mon.degree() <= m) r.terms_.emplace(mon, c);
    return r;
  }

  /// Keeps only the monomials whose total degree equals m.
  Polynomial homogeneous_part(int m) const {
    Polynomial r(n_);
    for (const auto& [mon, c] : terms_)
      if (mon.degree() == m) r.terms_.emplace(mon, c);
    return r;
  }

  /// Coefficient of u^k, as a polynomial in x only.
  Polynomial control_coefficient(int k) const {
    Polynomial r(n_);
    for (const auto& [mon, c] : terms_) {
      if (mon.pu != k) continue;
      Monomial m = mon;
      m.pu = 0;
      r.terms_.emplace(m, c);
    }
    return r;
  }

  template <class T>
  T evaluate(const std::vector<T>& x, const T& u = T(0)) const {
    if (static_cast<int>(x.size()) != n_)
      throw DimensionMismatch("point has " + std::to_string(x.size()) + " entries, expected " + std::to_string(n_));
    T sum = T(0);
    for (const auto& [m, c] : terms_) {
      T term = coefficient_as<T>(c);
      for (int i = 0; i < n_; ++i)
        for (int e = 0; e < m.px[i]; ++e) term = term * x[i];
      for (int e = 0; e < m.pu; ++e) term = term * u;
      sum = sum + term;
    }
    return sum;
  }

  /// Substitutes x_i -> xs[i] and u -> us. The substitutes may live in a
  /// different ambient dimension.
  Polynomial compose(const std::vector<Polynomial>& xs, const Polynomial& us) const {
    if (static_cast<int>(xs.size()) != n_) throw DimensionMismatch("compose: wrong number of substitutes");
    int m = us.n();
    std::vector<std::vector<Polynomial>> powers(n_ + 1);
    auto power = [&](int var, int e) -> const Polynomial& {
      auto& cache = powers[var];
      const Polynomial& base = var < n_ ? xs[var] : us;
      if (cache.empty()) cache.push_back(Polynomial::constant(m, 1));
      while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * base);
      return cache[e];
    };
    Polynomial r(m);
    for (const auto& [mon, c] : terms_) {
      Polynomial term = Polynomial::constant(m, c);
      for (int i = 0; i < n_; ++i)
        if (mon.px[i] > 0) term = term * power(i, mon.px[i]);
      if (mon.pu > 0) term = term * power(n_, mon.pu);
      r += term;
    }
    return r;
  }

  Polynomial compose(const std::vector<Polynomial>& xs) const {
    return compose(xs, Polynomial::control(xs.empty() ? n_ : xs.front().n()));
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    // highest degree first, x1-heavy first within a degree
    std::vector<std::pair<Monomial, Rational>> order(terms_.begin(), terms_.end());
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first.degree() > b.first.degree(); });
    for (const auto& [m, c] : order) {
      Rational a = abs(c);
      std::string factors;
      for (int i = 0; i < n_; ++i) {
        if (m.px[i] == 0) continue;
        if (!factors.empty()) factors += "*";
        factors += "x" + std::to_string(i + 1);
        if (m.px[i] > 1) factors += "^" + std::to_string(m.px[i]);
      }
      if (m.pu > 0) {
        if (!factors.empty()) factors += "*";
        factors += "u";
        if (m.pu > 1) factors += "^" + std::to_string(m.pu);
      }
      std::string body;
      if (factors.empty()) body = quadctrl::to_string(a);
      else if (a == 1) body = factors;
      else body = quadctrl::to_string(a) + "*" + factors;
      if (first) s += (c < 0 ? "-" : "") + body;
      else s += (c < 0 ? " - " : " + ") + body;
      first = false;
    }
    return s;
  }

 private:
  void check_same(const Polynomial& o) const {
    if (o.n_ != n_) throw DimensionMismatch("polynomials in " + std::to_string(n_) + " and " + std::to_string(o.n_) + " variables");
  }

  int n_ = 0;
  Terms terms_;
};

}  // namespace quadctrl
