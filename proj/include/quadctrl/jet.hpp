#pragma once

#include <cmath>
#include <vector>

namespace quadctrl {

/// Truncated Taylor series c_0 + c_1 h + ... + c_K h^K, used to get exact
/// derivatives of the smooth control shapes.
struct Jet {
  std::vector<double> c;

  Jet() = default;
  explicit Jet(int order, double value = 0.0) : c(order + 1, 0.0) { c[0] = value; }

  static Jet variable(int order, double at) {
    Jet j(order, at);
    if (order >= 1) j.c[1] = 1.0;
    return j;
  }

  int order() const { return static_cast<int>(c.size()) - 1; }

  /// m-th derivative at the expansion point.
  double derivative(int m) const {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return c.at(m) * f;
  }

  friend Jet operator+(Jet a, const Jet& b) {
    for (std::size_t i = 0; i < a.c.size(); ++i) a.c[i] += b.c[i];
    return a;
  }
  friend Jet operator-(Jet a, const Jet& b) {
    for (std::size_t i = 0; i < a.c.size(); ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend Jet operator*(double s, Jet a) {
    for (auto& x : a.c) x *= s;
    return a;
  }
  friend Jet operator+(double s, Jet a) {
    a.c[0] += s;
    return a;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (int i = 0; i <= a.order(); ++i)
      for (int j = 0; i + j <= a.order(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet q(a.order());
    for (int k = 0; k <= a.order(); ++k) {
      double s = a.c[k];
      for (int j = 1; j <= k; ++j) s -= b.c[j] * q.c[k - j];
      q.c[k] = s / b.c[0];
    }
    return q;
  }
};

inline Jet exp(const Jet& h) {
  Jet y(h.order());
  y.c[0] = std::exp(h.c[0]);
  for (int k = 1; k <= h.order(); ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * h.c[j] * y.c[k - j];
    y.c[k] = s / k;
  }
  return y;
}

}  // namespace quadctrl
