#pragma once

#include <string>
#include <utility>
#include <vector>

#include "quadctrl/rational_linalg.hpp"
#include "quadctrl/vector_field.hpp"

namespace quadctrl {

enum class SystemKind { Affine, Nonlinear };

inline std::string to_string(SystemKind k) { return k == SystemKind::Affine ? "affine" : "nonlinear"; }

/// Scalar-input polynomial control system with an equilibrium at the origin.
/// Affine systems store (f0, f1); nonlinear ones store f(x, u) and expose
/// f0 = f(., 0) and f1 = d_u f(., 0).
class ControlSystem {
 public:
  ControlSystem() = default;

  static ControlSystem affine(std::string name, PolyVectorField f0, PolyVectorField f1) {
    if (f0.n() != f1.n()) throw DimensionMismatch("f0 and f1 have different dimensions");
    if (f0.uses_control() || f1.uses_control()) throw ControlDependentField("affine system fields must not depend on u");
    ControlSystem s;
    s.name_ = std::move(name);
    s.kind_ = SystemKind::Affine;
    s.f0_ = std::move(f0);
    s.f1_ = std::move(f1);
    s.f_ = s.f0_ + Polynomial::control(s.f0_.n()) * s.f1_;
    s.check_equilibrium();
    return s;
  }

  static ControlSystem nonlinear(std::string name, PolyVectorField f) {
    ControlSystem s;
    s.name_ = std::move(name);
    s.kind_ = SystemKind::Nonlinear;
    s.f_ = std::move(f);
    s.f0_ = s.f_.control_coefficient(0);
    s.f1_ = s.f_.control_coefficient(1);
    s.check_equilibrium();
    return s;
  }

  /// Builds the system around (x_e, u_e) and re-expands it at the origin.
  static ControlSystem affine_at(std::string name, const PolyVectorField& f0, const PolyVectorField& f1,
                                 const std::vector<Rational>& x_e, const Rational& u_e) {
    int n = f0.n();
    PolyVectorField full = f0 + Polynomial::control(n) * f1;
    translate_to_origin(full, x_e, u_e);
    PolyVectorField g1 = shift_field(f1, x_e, 0);
    PolyVectorField g0 = shift_field(f0, x_e, 0) + u_e * g1;
    return affine(std::move(name), g0, g1);
  }

  static ControlSystem nonlinear_at(std::string name, const PolyVectorField& f, const std::vector<Rational>& x_e,
                                    const Rational& u_e) {
    return nonlinear(std::move(name), translate_to_origin(f, x_e, u_e));
  }

  const std::string& name() const { return name_; }
  int n() const { return f_.n(); }
  SystemKind kind() const { return kind_; }
  bool is_affine() const { return kind_ == SystemKind::Affine; }
  /// 1 for affine systems, 0 for nonlinear ones.
  int gamma() const { return is_affine() ? 1 : 0; }
  /// Integrability exponent label: "1" for affine, "inf" for nonlinear.
  std::string q_label() const { return is_affine() ? "1" : "inf"; }

  const PolyVectorField& f0() const { return f0_; }
  const PolyVectorField& f1() const { return f1_; }
  /// Full right-hand side f(x, u).
  const PolyVectorField& field() const { return f_; }

  void set_name(std::string name) { name_ = std::move(name); }

 private:
  void check_equilibrium() const {
    int n = f_.n();
    std::vector<Rational> zero(n, Rational(0));
    auto r = f_.evaluate(zero, Rational(0));
    std::vector<std::string> res;
    bool ok = true;
    for (const auto& v : r) {
      ok = ok && v == 0;
      res.push_back(to_string(v));
    }
    if (!ok) throw NotEquilibrium("the origin is not an equilibrium of " + name_, res);
  }

  std::string name_;
  SystemKind kind_ = SystemKind::Affine;
  PolyVectorField f_;
  PolyVectorField f0_;
  PolyVectorField f1_;
};

}  // namespace quadctrl
