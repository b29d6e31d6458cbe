#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "quadctrl/system.hpp"

namespace quadctrl::fixtures {

namespace detail {

inline Polynomial x(int n, int i) { return Polynomial::variable(n, i - 1); }
inline Polynomial u(int n) { return Polynomial::control(n); }
inline Polynomial c(int n, const Rational& v) { return Polynomial::constant(n, v); }
inline Polynomial zero(int n) { return Polynomial(n); }
inline Polynomial pow(const Polynomial& p, int e) {
  Polynomial r = Polynomial::constant(p.n(), 1);
  for (int i = 0; i < e; ++i) r = r * p;
  return r;
}
inline PolyVectorField e1(int n) {
  std::vector<Polynomial> v(n, Polynomial(n));
  v[0] = c(n, 1);
  return PolyVectorField(v);
}

}  // namespace detail

// x1' = u
inline ControlSystem integrator1d() {
  using namespace detail;
  return ControlSystem::affine("integrator1d", PolyVectorField(1), e1(1));
}

// x1' = u, x2' = x1
inline ControlSystem double_integrator() {
  using namespace detail;
  return ControlSystem::affine("double_integrator", PolyVectorField({zero(2), x(2, 1)}), e1(2));
}

// x1' = x2, x2' = -x1 + u
inline ControlSystem harmonic() {
  using namespace detail;
  PolyVectorField f1({zero(2), c(2, 1)});
  return ControlSystem::affine("harmonic", PolyVectorField({x(2, 2), -x(2, 1)}), f1);
}

// x1' = u + x1^2
inline ControlSystem absorbed() {
  using namespace detail;
  return ControlSystem::affine("absorbed", PolyVectorField({pow(x(1, 1), 2)}), e1(1));
}

// x1' = u, x2' = x1^2
inline ControlSystem easy_drift() {
  using namespace detail;
  return ControlSystem::affine("easy_drift", PolyVectorField({zero(2), pow(x(2, 1), 2)}), e1(2));
}

// x1' = u, x2' = x1, x3' = x1^3 + x2^2
inline ControlSystem sussmann() {
  using namespace detail;
  int n = 3;
  return ControlSystem::affine("sussmann", PolyVectorField({zero(n), x(n, 1), pow(x(n, 1), 3) + pow(x(n, 2), 2)}), e1(n));
}

// x1' = u, x2' = x1, x3' = x1^2 - x2^2
inline ControlSystem competition() {
  using namespace detail;
  int n = 3;
  return ControlSystem::affine("competition", PolyVectorField({zero(n), x(n, 1), pow(x(n, 1), 2) - pow(x(n, 2), 2)}), e1(n));
}

// x1' = u, x2' = 2 u x1
inline ControlSystem toy_manifold() {
  using namespace detail;
  return ControlSystem::affine("toy_manifold", PolyVectorField(2), PolyVectorField({c(2, 1), c(2, 2) * x(2, 1)}));
}

// x1' = u, x2' = 2 u x1 + lambda x1^2
inline ControlSystem drift_bent(const Rational& lambda = 1) {
  using namespace detail;
  return ControlSystem::affine("drift_bent", PolyVectorField({zero(2), lambda * pow(x(2, 1), 2)}),
                               PolyVectorField({c(2, 1), c(2, 2) * x(2, 1)}));
}

// x1' = u, x2' = 2 u x1 + u x2
inline ControlSystem bent() {
  using namespace detail;
  return ControlSystem::affine("bent", PolyVectorField(2), PolyVectorField({c(2, 1), c(2, 2) * x(2, 1) + x(2, 2)}));
}

// x1' = u, x2' = x1^3
inline ControlSystem cubic() {
  using namespace detail;
  return ControlSystem::affine("cubic", PolyVectorField({zero(2), pow(x(2, 1), 3)}), e1(2));
}

// x1' = u, x_{j+1}' = x_j for j < k, x_{k+1}' = x_k^2 + x1^3
inline ControlSystem opt_affine(int k = 2) {
  using namespace detail;
  if (k < 1) throw PreconditionError("opt_affine needs k >= 1");
  int n = k + 1;
  std::vector<Polynomial> f0(n, Polynomial(n));
  for (int j = 1; j < k; ++j) f0[j] = x(n, j);
  f0[k] = pow(x(n, k), 2) + pow(x(n, 1), 3);
  return ControlSystem::affine("opt_affine_" + std::to_string(k), PolyVectorField(f0), e1(n));
}

// x1' = u, x_{j+1}' = x_j for j < k, x_{k+1}' = x_k^2 + u^3
inline ControlSystem opt_nonlinear(int k = 2) {
  using namespace detail;
  if (k < 1) throw PreconditionError("opt_nonlinear needs k >= 1");
  int n = k + 1;
  std::vector<Polynomial> f(n, Polynomial(n));
  f[0] = u(n);
  for (int j = 1; j < k; ++j) f[j] = x(n, j);
  f[k] = pow(x(n, k), 2) + pow(u(n), 3);
  return ControlSystem::nonlinear("opt_nonlinear_" + std::to_string(k), PolyVectorField(f));
}

/// Bilinear system around x_e = (1, 0, 0, 0, 0): x1' = 0, x2' = u x1,
/// x3' = 2 u x2, x4' = 3 u x3, x5' = x5 + u x2 + x4.
inline PolyVectorField bilinear_raw_f0() {
  using namespace detail;
  int n = 5;
  return PolyVectorField({zero(n), zero(n), zero(n), zero(n), x(n, 5) + x(n, 4)});
}
inline PolyVectorField bilinear_raw_f1() {
  using namespace detail;
  int n = 5;
  return PolyVectorField({zero(n), x(n, 1), c(n, 2) * x(n, 2), c(n, 3) * x(n, 3), x(n, 2)});
}
inline ControlSystem bilinear() {
  return ControlSystem::affine_at("bilinear", bilinear_raw_f0(), bilinear_raw_f1(), {1, 0, 0, 0, 0}, 0);
}

// x1' = u, x2' = x1^2 + lambda u^2 + u^3
inline ControlSystem u2_drift(const Rational& lambda = 1) {
  using namespace detail;
  int n = 2;
  return ControlSystem::nonlinear("u2_drift", PolyVectorField({u(n), pow(x(n, 1), 2) + lambda * pow(u(n), 2) + pow(u(n), 3)}));
}

struct FixtureInfo {
  std::string name;
  std::string description;
  std::function<ControlSystem()> make;
};

inline const std::vector<FixtureInfo>& all() {
  static const std::vector<FixtureInfo> list = {
      {"integrator1d", "x1' = u", [] { return integrator1d(); }},
      {"double_integrator", "x1' = u, x2' = x1", [] { return double_integrator(); }},
      {"harmonic", "x1' = x2, x2' = -x1 + u", [] { return harmonic(); }},
      {"absorbed", "x1' = u + x1^2", [] { return absorbed(); }},
      {"easy_drift", "x1' = u, x2' = x1^2", [] { return easy_drift(); }},
      {"sussmann", "x1' = u, x2' = x1, x3' = x1^3 + x2^2", [] { return sussmann(); }},
      {"competition", "x1' = u, x2' = x1, x3' = x1^2 - x2^2", [] { return competition(); }},
      {"toy_manifold", "x1' = u, x2' = 2 u x1", [] { return toy_manifold(); }},
      {"drift_bent", "x1' = u, x2' = 2 u x1 + lambda x1^2 (lambda = 1)", [] { return drift_bent(); }},
      {"bent", "x1' = u, x2' = 2 u x1 + u x2", [] { return bent(); }},
      {"cubic", "x1' = u, x2' = x1^3", [] { return cubic(); }},
      {"opt_affine_k", "x1' = u, x2' = x1, x3' = x2^2 + x1^3 (k = 2; opt_affine_<k> for other k)",
       [] { return opt_affine(2); }},
      {"opt_nonlinear_k", "x1' = u, x2' = x1, x3' = x2^2 + u^3 (k = 2; opt_nonlinear_<k> for other k)",
       [] { return opt_nonlinear(2); }},
      {"bilinear", "x1' = 0, x2' = u x1, x3' = 2 u x2, x4' = 3 u x3, x5' = x5 + u x2 + x4 around (1,0,0,0,0)",
       [] { return bilinear(); }},
      {"u2_drift", "x1' = u, x2' = x1^2 + lambda u^2 + u^3 (lambda = 1)", [] { return u2_drift(); }},
  };
  return list;
}

/// Looks a fixture up by name; accepts opt_affine_<k> and opt_nonlinear_<k>.
inline ControlSystem get(const std::string& name) {
  for (const auto& f : all()) {
    if (f.name == name) {
      ControlSystem s = f.make();
      s.set_name(name);
      return s;
    }
  }
  for (std::string prefix : {"opt_affine_", "opt_nonlinear_"}) {
    if (name.rfind(prefix, 0) != 0) continue;
    std::string rest = name.substr(prefix.size());
    if (rest.empty() || rest.size() > 2 || rest.find_first_not_of("0123456789") != std::string::npos) break;
    int k = std::stoi(rest);
    if (k < 1) break;
    return prefix == "opt_affine_" ? opt_affine(k) : opt_nonlinear(k);
  }
  throw InputError("unknown example '" + name + "'");
}

}  // namespace quadctrl::fixtures
