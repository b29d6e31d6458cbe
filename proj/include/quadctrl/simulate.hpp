#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "quadctrl/jet.hpp"
#include "quadctrl/system.hpp"

namespace quadctrl {

// ---------------------------------------------------------------------------
// Smooth shapes

/// exp(-1/(s(1-s))) on (0,1), zero elsewhere, as a jet in s.
inline Jet unit_bump_jet(double s, int order) {
  if (s <= 0.0 || s >= 1.0) return Jet(order);
  Jet x = Jet::variable(order, s);
  Jet g = x * (1.0 + (-1.0) * x);
  return exp(-1.0 * (Jet(order, 1.0) / g));
}

/// scale * B(s) * (1 + skew (s - 1/2)) on [0,1]; skew breaks the mirror
/// symmetry so that odd moments of derivatives do not vanish.
struct Shape {
  double skew = 0.0;
  double scale = 1.0;

  Jet jet(double s, int order) const {
    Jet b = unit_bump_jet(s, order);
    Jet w = Jet::variable(order, s);
    w = 1.0 + skew * (w + Jet(order, -0.5));
    return scale * (b * w);
  }
  double derivative(double s, int m) const { return jet(s, m).derivative(m); }
  double operator()(double s) const { return derivative(s, 0); }
};

inline double max_abs_derivative(const Shape& shape, int m, int samples = 20000) {
  double best = 0.0;
  for (int i = 1; i < samples; ++i) best = std::max(best, std::abs(shape.derivative(static_cast<double>(i) / samples, m)));
  return best;
}

/// Integral over [0,1] of g(s) by composite Simpson on 2 * half_intervals.
inline double simpson01(const std::function<double(double)>& g, int half_intervals = 5000) {
  int N = 2 * half_intervals;
  double h = 1.0 / N, s = g(0.0) + g(1.0);
  for (int i = 1; i < N; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return s * h / 3.0;
}

// ---------------------------------------------------------------------------
// Control signals

/// Control sampled on a uniform grid of [0, T], read by linear interpolation.
class ControlSignal {
 public:
  ControlSignal() = default;
  ControlSignal(double T, std::vector<double> values, std::string source = "samples")
      : T_(T), values_(std::move(values)), source_(std::move(source)) {
    if (!(T_ > 0.0)) throw PreconditionError("control horizon must be positive");
    if (values_.size() < 2) throw PreconditionError("control needs at least two samples");
  }

  static ControlSignal sample(double T, int N, const std::function<double(double)>& f, std::string source) {
    if (N < 1) throw PreconditionError("control grid needs at least one interval");
    std::vector<double> v(N + 1);
    for (int i = 0; i <= N; ++i) v[i] = f(T * i / N);
    return ControlSignal(T, std::move(v), std::move(source));
  }

  double T() const { return T_; }
  int intervals() const { return static_cast<int>(values_.size()) - 1; }
  double step() const { return T_ / intervals(); }
  double time(int i) const { return T_ * i / intervals(); }
  const std::vector<double>& values() const { return values_; }
  const std::string& source() const { return source_; }

  double value(double t) const {
    if (t <= 0.0) return values_.front();
    if (t >= T_) return values_.back();
    double x = t / step();
    int i = std::min(static_cast<int>(x), intervals() - 1);
    double w = x - i;
    return (1.0 - w) * values_[i] + w * values_[i + 1];
  }

  bool has_exact() const { return static_cast<bool>(exact_); }
  /// m-th derivative of the generating function, for builtin families.
  double exact(double t, int m) const { return exact_(t, m); }
  void set_exact(std::function<double(double, int)> f) { exact_ = std::move(f); }

  ControlSignal scaled(double s) const {
    ControlSignal c = *this;
    for (auto& v : c.values_) v *= s;
    if (exact_) {
      auto e = exact_;
      c.exact_ = [e, s](double t, int m) { return s * e(t, m); };
    }
    return c;
  }

 private:
  double T_ = 1.0;
  std::vector<double> values_{0.0, 0.0};
  std::string source_;
  std::function<double(double, int)> exact_;
};

/// C-infinity bump on [a,b] (or its m-th derivative) with peak |u| = amplitude.
inline ControlSignal bump_control(double T, int N, double a, double b, double amplitude, int derivative = 0,
                                  double skew = 0.0) {
  if (!(a < b)) throw PreconditionError("bump support is empty");
  if (a < 0.0 || b > T) throw PreconditionError("bump support must lie in [0, T]");
  Shape shape{skew, 1.0};
  double L = b - a;
  double peak = max_abs_derivative(shape, derivative);
  double c = amplitude / peak;
  auto f = [=](double t, int m) {
    double s = (t - a) / L;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return c * std::pow(L, -m) * shape.derivative(s, derivative + m);
  };
  ControlSignal u = ControlSignal::sample(T, N, [f](double t) { return f(t, 0); },
                                          "bump(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(amplitude) + ")");
  u.set_exact(f);
  return u;
}

/// amplitude * sin(omega t)
inline ControlSignal sinusoid_control(double T, int N, double omega, double amplitude) {
  auto f = [=](double t, int m) {
    double v = amplitude * std::pow(omega, m);
    switch (m % 4) {
      case 0: return v * std::sin(omega * t);
      case 1: return v * std::cos(omega * t);
      case 2: return -v * std::sin(omega * t);
      default: return -v * std::cos(omega * t);
    }
  };
  ControlSignal u = ControlSignal::sample(T, N, [f](double t) { return f(t, 0); },
                                          "sinusoid(" + std::to_string(omega) + "," + std::to_string(amplitude) + ")");
  u.set_exact(f);
  return u;
}

inline constexpr double kDilationSkew = 1.0;

/// Profile of the dilation family: asymmetric bump on [0,1] with unit L2 norm.
inline Shape dilation_profile(double skew = kDilationSkew) {
  Shape s{skew, 1.0};
  double l2 = simpson01([&](double x) { double v = s(x); return v * v; });
  s.scale = 1.0 / std::sqrt(l2);
  return s;
}

/// u = d^k/dt^k [lambda phi(mu t)], so that u_k = lambda phi(mu t).
inline ControlSignal dilation_control(double T, int N, int k, double lambda, double mu, double skew = kDilationSkew) {
  if (!(mu > 0.0)) throw PreconditionError("dilation factor must be positive");
  if (1.0 / mu > T) throw PreconditionError("dilated profile does not fit in [0, T]");
  Shape phi = dilation_profile(skew);
  auto f = [=](double t, int m) {
    double s = mu * t;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return lambda * std::pow(mu, k + m) * phi.derivative(s, k + m);
  };
  ControlSignal u = ControlSignal::sample(T, N, [f](double t) { return f(t, 0); },
                                          "dilation(" + std::to_string(k) + "," + std::to_string(lambda) + "," + std::to_string(mu) + ")");
  u.set_exact(f);
  return u;
}

// ---------------------------------------------------------------------------
// Piecewise polynomials and iterated primitives

namespace detail {
// 8-point Gauss-Legendre rule on [-1, 1]
inline constexpr std::array<double, 8> kGaussX = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                  -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussW = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                  0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                  0.2223810344533745, 0.1012285362903763};
}  // namespace detail

/// Piecewise polynomial on a uniform grid; interval i holds coefficients in
/// the local variable s = t - t_i.
class PiecewisePoly {
 public:
  static PiecewisePoly linear_interpolant(const ControlSignal& u) {
    PiecewisePoly p;
    p.T_ = u.T();
    p.h_ = u.step();
    const auto& v = u.values();
    for (int i = 0; i < u.intervals(); ++i) p.coef_.push_back({v[i], (v[i + 1] - v[i]) / p.h_});
    return p;
  }

  double T() const { return T_; }
  int intervals() const { return static_cast<int>(coef_.size()); }

  /// Primitive vanishing at t = 0.
  PiecewisePoly primitive() const {
    PiecewisePoly p;
    p.T_ = T_;
    p.h_ = h_;
    double acc = 0.0;
    for (const auto& c : coef_) {
      std::vector<double> d(c.size() + 1);
      d[0] = acc;
      for (std::size_t m = 0; m < c.size(); ++m) d[m + 1] = c[m] / static_cast<double>(m + 1);
      acc = horner(d, h_);
      p.coef_.push_back(std::move(d));
    }
    return p;
  }

  double operator()(double t) const {
    if (t <= 0.0) return horner(coef_.front(), 0.0);
    int i = std::min(static_cast<int>(t / h_), intervals() - 1);
    return horner(coef_[i], t - i * h_);
  }

  double node(int i) const { return i == intervals() ? horner(coef_.back(), h_) : coef_[i][0]; }

  std::vector<double> nodal_values() const {
    std::vector<double> v;
    for (int i = 0; i <= intervals(); ++i) v.push_back(node(i));
    return v;
  }

  /// Integral of |f|^p (Gauss-Legendre, exact for polynomial integrands of
  /// degree up to 15).
  double integral_abs_pow(double p) const {
    double s = 0.0;
    for (const auto& c : coef_)
      for (int q = 0; q < 8; ++q) {
        double x = 0.5 * h_ * (detail::kGaussX[q] + 1.0);
        s += 0.5 * h_ * detail::kGaussW[q] * std::pow(std::abs(horner(c, x)), p);
      }
    return s;
  }

  /// Integral of f^3 with sign.
  double integral_cube() const {
    double s = 0.0;
    for (const auto& c : coef_)
      for (int q = 0; q < 8; ++q) {
        double x = 0.5 * h_ * (detail::kGaussX[q] + 1.0);
        double v = horner(c, x);
        s += 0.5 * h_ * detail::kGaussW[q] * v * v * v;
      }
    return s;
  }

 private:
  static double horner(const std::vector<double>& c, double s) {
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * s + *it;
    return r;
  }

  double T_ = 0.0;
  double h_ = 1.0;
  std::vector<std::vector<double>> coef_;
};

/// j-th iterated primitive of the interpolated control, exactly.
inline PiecewisePoly primitive_poly(const ControlSignal& u, int j) {
  if (j < 0) throw PreconditionError("primitive order must be nonnegative");
  PiecewisePoly p = PiecewisePoly::linear_interpolant(u);
  for (int i = 0; i < j; ++i) p = p.primitive();
  return p;
}

inline ControlSignal primitives(const ControlSignal& u, int j) {
  return ControlSignal(u.T(), primitive_poly(u, j).nodal_values(), u.source() + " primitive " + std::to_string(j));
}

struct NormReport {
  double L1 = 0, L2 = 0, L3 = 0, Linf = 0;
  std::vector<double> W;       // W[m] = W^{m,inf} norm, m = 0..m_max
  std::vector<double> Hneg;    // Hneg[k-1] = ||u_k||_{L2}, k = 1..k_max
  std::vector<double> traces;  // traces[k-1] = u_k(T)
};

inline NormReport norms(const ControlSignal& u, int m_max, int k_max) {
  if (m_max < 0 || k_max < 0) throw PreconditionError("norm orders must be nonnegative");
  if (u.intervals() + 1 < 2 * m_max + 1)
    throw PreconditionError("grid too coarse for W^{" + std::to_string(m_max) + ",inf} finite differences");
  NormReport r;
  PiecewisePoly p = PiecewisePoly::linear_interpolant(u);
  r.L1 = p.integral_abs_pow(1.0);
  r.L2 = std::sqrt(p.integral_abs_pow(2.0));
  r.L3 = std::cbrt(p.integral_abs_pow(3.0));
  for (double v : u.values()) r.Linf = std::max(r.Linf, std::abs(v));
  std::vector<double> d = u.values();
  double h = u.step(), sup = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    if (m > 0) {
      std::vector<double> next;
      for (std::size_t i = 1; i + 1 < d.size(); ++i) next.push_back((d[i + 1] - d[i - 1]) / (2 * h));
      d = std::move(next);
    }
    for (double v : d) sup = std::max(sup, std::abs(v));
    r.W.push_back(sup);
  }
  PiecewisePoly q = p;
  for (int k = 1; k <= k_max; ++k) {
    q = q.primitive();
    r.Hneg.push_back(std::sqrt(q.integral_abs_pow(2.0)));
    r.traces.push_back(q(u.T()));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Numerical evaluation and integration

/// Polynomial field compiled to double coefficients for fast evaluation.
class NumericField {
 public:
  NumericField() = default;
  explicit NumericField(const PolyVectorField& f) : n_(f.n()) {
    for (int i = 0; i < n_; ++i) {
      std::vector<Term> terms;
      for (const auto& [m, c] : f[i].terms()) {
        Term t;
        t.c = c.get_d();
        for (int j = 0; j < n_; ++j)
          if (m.px[j] > 0) t.factors.emplace_back(j, m.px[j]);
        t.pu = m.pu;
        terms.push_back(std::move(t));
      }
      comps_.push_back(std::move(terms));
    }
  }

  int n() const { return n_; }

  void operator()(const Eigen::VectorXd& x, double u, Eigen::VectorXd& out) const {
    out.resize(n_);
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (const auto& t : comps_[i]) {
        double v = t.c;
        for (const auto& [j, e] : t.factors)
          for (int k = 0; k < e; ++k) v *= x[j];
        for (int k = 0; k < t.pu; ++k) v *= u;
        s += v;
      }
      out[i] = s;
    }
  }
  Eigen::VectorXd operator()(const Eigen::VectorXd& x, double u = 0.0) const {
    Eigen::VectorXd out;
    (*this)(x, u, out);
    return out;
  }

 private:
  struct Term {
    double c = 0.0;
    std::vector<std::pair<int, int>> factors;
    int pu = 0;
  };
  int n_ = 0;
  std::vector<std::vector<Term>> comps_;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<double> u;
  double dt = 0.0;
  std::string method = "rk4";

  int n() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
  const Eigen::VectorXd& final_state() const { return x.back(); }
};

inline constexpr double kBlowupGuard = 1e6;

/// Classical RK4 for x' = rhs(t, x) on [0, T] with N steps.
template <class Rhs>
Trajectory rk4(Rhs&& rhs, const Eigen::VectorXd& x0, double T, long N, double guard = kBlowupGuard) {
  Trajectory tr;
  double h = T / static_cast<double>(N);
  tr.dt = h;
  tr.t.reserve(N + 1);
  tr.x.reserve(N + 1);
  Eigen::VectorXd x = x0, k1, k2, k3, k4;
  tr.t.push_back(0.0);
  tr.x.push_back(x);
  for (long i = 0; i < N; ++i) {
    double t = h * static_cast<double>(i);
    rhs(t, x, k1);
    rhs(t + 0.5 * h, x + 0.5 * h * k1, k2);
    rhs(t + 0.5 * h, x + 0.5 * h * k2, k3);
    rhs(t + h, x + h * k3, k4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    double nrm = x.norm();
    if (!(nrm <= guard)) throw DivergenceError(t + h, nrm);
    tr.t.push_back(h * static_cast<double>(i + 1));
    tr.x.push_back(x);
  }
  return tr;
}

inline long steps_for(const ControlSignal& u, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  double r = u.step() / dt;
  double rr = r >= 1.0 ? r : 1.0 / r;
  if (std::abs(rr - std::round(rr)) > 1e-6 * rr)
    throw PreconditionError("time step and control grid step must divide one another");
  long N = std::lround(u.T() / dt);
  if (N < 1) throw PreconditionError("time step larger than the horizon");
  return N;
}

/// Integrates x' = f(x, u(t)) from x0 with the control interpolated at the
/// RK4 stage times.
inline Trajectory integrate(const NumericField& f, const Eigen::VectorXd& x0, const ControlSignal& u, double dt,
                            double guard = kBlowupGuard) {
  if (x0.size() != f.n()) throw DimensionMismatch("initial state has wrong dimension");
  long N = steps_for(u, dt);
  Trajectory tr = rk4([&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& out) { f(x, u.value(t), out); }, x0,
                      u.T(), N, guard);
  for (double t : tr.t) tr.u.push_back(u.value(t));
  return tr;
}

inline Trajectory integrate(const ControlSystem& sys, const Eigen::VectorXd& x0, const ControlSignal& u, double dt,
                            double guard = kBlowupGuard) {
  return integrate(NumericField(sys.field()), x0, u, dt, guard);
}

/// Flow of an autonomous field for pseudo-time tau (any sign).
inline Eigen::VectorXd flow(const NumericField& f, const Eigen::VectorXd& p0, double tau, int substeps = 16,
                            double guard = kBlowupGuard) {
  if (tau == 0.0) return p0;
  Eigen::VectorXd p = p0, k1, k2, k3, k4;
  double h = tau / substeps;
  for (int i = 0; i < substeps; ++i) {
    f(p, 0.0, k1);
    f(p + 0.5 * h * k1, 0.0, k2);
    f(p + 0.5 * h * k2, 0.0, k3);
    f(p + h * k3, 0.0, k4);
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(p.norm() <= guard)) throw DivergenceError(h * (i + 1), p.norm());
  }
  return p;
}

/// f_j = (-1)^{j-1} ad^{j-1}_{f0}(f1) for j = 1..J.
inline std::vector<PolyVectorField> auxiliary_fields(const ControlSystem& sys, int J) {
  std::vector<PolyVectorField> out;
  PolyVectorField ad = sys.f1();
  for (int j = 1; j <= J; ++j) {
    if (j > 1) ad = lie_bracket(sys.f0(), ad);
    out.push_back(j % 2 == 1 ? ad : Rational(-1) * ad);
  }
  return out;
}

/// xi_0 = x(t), xi_{l+1} = flow of f_{l+1} for time -u_{l+1}(t) from xi_l.
/// Returns xi_j at every stride-th trajectory sample.
inline std::vector<Eigen::VectorXd> auxiliary_state(const ControlSystem& sys, const Trajectory& traj,
                                                    const ControlSignal& u, int j, int substeps = 16, int stride = 1) {
  if (j < 1) throw PreconditionError("auxiliary state index must be at least 1");
  if (substeps < 16) substeps = 16;
  std::vector<NumericField> fields;
  for (const auto& f : auxiliary_fields(sys, j)) fields.emplace_back(f);
  std::vector<PiecewisePoly> prims;
  PiecewisePoly p = PiecewisePoly::linear_interpolant(u);
  for (int l = 1; l <= j; ++l) {
    p = p.primitive();
    prims.push_back(p);
  }
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < traj.t.size(); i += static_cast<std::size_t>(stride)) {
    Eigen::VectorXd xi = traj.x[i];
    for (int l = 0; l < j; ++l) xi = flow(fields[l], xi, -prims[l](traj.t[i]), substeps);
    out.push_back(xi);
  }
  return out;
}

}  // namespace quadctrl
