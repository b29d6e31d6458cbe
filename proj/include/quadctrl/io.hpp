#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "quadctrl/brunovsky.hpp"
#include "quadctrl/coercivity.hpp"
#include "quadctrl/manifold.hpp"
#include "quadctrl/simulate.hpp"

namespace quadctrl::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// System files

namespace detail {

inline int line_of(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline Rational rational_field(const json& v, const std::string& path) {
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const InputError& e) {
      throw InputError(path + ": " + e.what());
    }
  }
  if (v.is_number_integer() || v.is_number_unsigned()) return parse_rational(v.dump());
  if (v.is_number_float()) return parse_rational(v.dump());
  throw InputError(path + ": expected a decimal or p/q string");
}

inline const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw InputError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(path + ": missing field '" + key + "'");
  return *it;
}

inline PolyVectorField field_from_json(const json& comps, int n, bool allow_u, const std::string& path) {
  if (!comps.is_array()) throw InputError(path + ": expected an array of " + std::to_string(n) + " components");
  if (static_cast<int>(comps.size()) != n)
    throw InputError(path + ": expected " + std::to_string(n) + " components, found " + std::to_string(comps.size()));
  PolyVectorField f(n);
  for (int i = 0; i < n; ++i) {
    std::string cp = path + "[" + std::to_string(i) + "]";
    if (!comps[i].is_array()) throw InputError(cp + ": expected an array of monomial records");
    for (std::size_t t = 0; t < comps[i].size(); ++t) {
      std::string mp = cp + "[" + std::to_string(t) + "]";
      const json& rec = comps[i][t];
      Rational c = rational_field(member(rec, "c", mp), mp + ".c");
      const json& px = member(rec, "px", mp);
      if (!px.is_array() || static_cast<int>(px.size()) != n)
        throw InputError(mp + ".px: expected " + std::to_string(n) + " exponents");
      Monomial m(n);
      for (int j = 0; j < n; ++j) {
        if (!px[j].is_number_integer() || px[j].get<int>() < 0)
          throw InputError(mp + ".px[" + std::to_string(j) + "]: expected a nonnegative integer");
        m.px[j] = px[j].get<int>();
      }
      if (rec.contains("pu")) {
        if (!allow_u) throw InputError(mp + ".pu: affine fields must not depend on u");
        if (!rec["pu"].is_number_integer() || rec["pu"].get<int>() < 0)
          throw InputError(mp + ".pu: expected a nonnegative integer");
        m.pu = rec["pu"].get<int>();
      }
      if (m.degree() > degree_cap()) throw DegreeCapExceeded(m.degree(), degree_cap());
      f[i].add_term(m, c);
    }
  }
  return f;
}

inline json field_to_json(const PolyVectorField& f, bool with_u) {
  json comps = json::array();
  for (int i = 0; i < f.n(); ++i) {
    json terms = json::array();
    // ascending graded-lex order, as stored
    for (const auto& [m, c] : f[i].terms()) {
      json rec;
      rec["c"] = to_string(c);
      rec["px"] = m.px;
      if (with_u) rec["pu"] = m.pu;
      terms.push_back(rec);
    }
    comps.push_back(terms);
  }
  return comps;
}

}  // namespace detail

/// Parses a system file. Syntax errors report the line; schema errors the
/// field path.
inline ControlSystem parse_system(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  std::string name = "system";
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw InputError("name: expected a string");
    name = j["name"].get<std::string>();
  }
  const json& nj = detail::member(j, "n", "$");
  if (!nj.is_number_integer() || nj.get<int>() < 1) throw InputError("n: expected a positive integer");
  int n = nj.get<int>();
  const json& kj = detail::member(j, "kind", "$");
  if (!kj.is_string() || (kj != "affine" && kj != "nonlinear")) throw InputError("kind: expected \"affine\" or \"nonlinear\"");
  bool affine = kj == "affine";
  std::vector<Rational> xe(n, Rational(0));
  Rational ue = 0;
  if (j.contains("equilibrium")) {
    const json& e = j["equilibrium"];
    if (e.contains("x")) {
      const json& xs = e["x"];
      if (!xs.is_array() || static_cast<int>(xs.size()) != n)
        throw InputError("equilibrium.x: expected " + std::to_string(n) + " entries");
      for (int i = 0; i < n; ++i) xe[i] = detail::rational_field(xs[i], "equilibrium.x[" + std::to_string(i) + "]");
    }
    if (e.contains("u")) ue = detail::rational_field(e["u"], "equilibrium.u");
  }
  try {
    if (affine) {
      auto f0 = detail::field_from_json(detail::member(j, "f0", "$"), n, false, "f0");
      auto f1 = detail::field_from_json(detail::member(j, "f1", "$"), n, false, "f1");
      return ControlSystem::affine_at(name, f0, f1, xe, ue);
    }
    auto f = detail::field_from_json(detail::member(j, "f", "$"), n, true, "f");
    return ControlSystem::nonlinear_at(name, f, xe, ue);
  } catch (const NotEquilibrium& e) {
    throw InputError(std::string("equilibrium: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ControlSystem load_system(const std::string& path) { return parse_system(read_file(path)); }

/// Readable right-hand sides, "x3' = x1^2 - x2^2".
inline std::vector<std::string> equations(const ControlSystem& sys) {
  std::vector<std::string> out;
  for (int i = 0; i < sys.n(); ++i) out.push_back("x" + std::to_string(i + 1) + "' = " + sys.field()[i].to_string());
  return out;
}

inline json dump_system(const ControlSystem& sys) {
  json j;
  j["name"] = sys.name();
  j["n"] = sys.n();
  j["kind"] = to_string(sys.kind());
  j["equations"] = equations(sys);
  j["equilibrium"] = {{"x", std::vector<std::string>(sys.n(), "0")}, {"u", "0"}};
  if (sys.is_affine()) {
    j["f0"] = detail::field_to_json(sys.f0(), false);
    j["f1"] = detail::field_to_json(sys.f1(), false);
  } else {
    j["f"] = detail::field_to_json(sys.field(), true);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Controls and CSV

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline ControlSignal load_control_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open control file '" + path + "'");
  std::string line;
  int lineno = 0;
  std::vector<double> ts, us;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.find_first_of("tu") != std::string::npos && line.find(',') != std::string::npos &&
        !std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-')
      continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError(path + ":" + std::to_string(lineno) + ": expected 't,u'");
    try {
      ts.push_back(std::stod(line.substr(0, comma)));
      us.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw InputError(path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  if (ts.size() < 2) throw InputError(path + ": need at least two samples");
  if (ts.front() != 0.0) throw InputError(path + ": grid must start at t = 0");
  double h = (ts.back() - ts.front()) / (ts.size() - 1);
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (std::abs(ts[i] - ts[i - 1] - h) > 1e-9 * std::max(1.0, ts.back()))
      throw InputError(path + ":" + std::to_string(i + 1) + ": grid must be uniform and increasing");
  return ControlSignal(ts.back(), us, "csv:" + path);
}

namespace detail {
inline std::vector<double> spec_args(const std::string& spec, const std::string& name, std::size_t count) {
  auto open = spec.find('(');
  auto close = spec.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open || spec.substr(0, open) != name)
    throw InputError("control spec '" + spec + "': expected " + name + "(...)");
  std::vector<double> args;
  std::stringstream ss(spec.substr(open + 1, close - open - 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      args.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("control spec '" + spec + "': '" + item + "' is not a number");
    }
  }
  if (args.size() != count)
    throw InputError("control spec '" + spec + "': expected " + std::to_string(count) + " arguments");
  return args;
}
}  // namespace detail

/// bump(a,b,amp) | sinusoid(freq,amp) | csv:PATH | dilation(k,lambda,mu)
inline ControlSignal parse_control(const std::string& spec, double T, double dt) {
  if (spec.rfind("csv:", 0) == 0) return load_control_csv(spec.substr(4));
  if (!(T > 0.0) || !(dt > 0.0)) throw InputError("T and dt must be positive");
  long N = std::lround(T / dt);
  if (N < 1 || std::abs(N * dt - T) > 1e-9 * T) throw InputError("dt must divide T");
  try {
    if (spec.rfind("bump", 0) == 0) {
      auto a = detail::spec_args(spec, "bump", 3);
      return bump_control(T, static_cast<int>(N), a[0], a[1], a[2]);
    }
    if (spec.rfind("sinusoid", 0) == 0) {
      auto a = detail::spec_args(spec, "sinusoid", 2);
      return sinusoid_control(T, static_cast<int>(N), a[0], a[1]);
    }
    if (spec.rfind("dilation", 0) == 0) {
      auto a = detail::spec_args(spec, "dilation", 3);
      if (a[0] < 0 || a[0] != std::floor(a[0])) throw InputError("dilation order must be a nonnegative integer");
      return dilation_control(T, static_cast<int>(N), static_cast<int>(a[0]), a[1], a[2]);
    }
  } catch (const PreconditionError& e) {
    throw InputError("control spec '" + spec + "': " + e.what());
  }
  throw InputError("unknown control spec '" + spec + "'");
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << "t";
  for (int i = 0; i < tr.n(); ++i) out << ",x" << i + 1;
  out << ",u\n";
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    out << fmt17(tr.t[k]);
    for (int i = 0; i < tr.n(); ++i) out << ',' << fmt17(tr.x[k][i]);
    out << ',' << fmt17(tr.u[k]) << '\n';
  }
}

inline void write_control_csv(std::ostream& out, const ControlSignal& u) {
  out << "t,u\n";
  for (int i = 0; i <= u.intervals(); ++i) out << fmt17(u.time(i)) << ',' << fmt17(u.values()[i]) << '\n';
}

inline json norms_json(const NormReport& r) {
  json j;
  j["L1"] = r.L1;
  j["L2"] = r.L2;
  j["L3"] = r.L3;
  j["Linf"] = r.Linf;
  json w = json::object();
  for (std::size_t m = 0; m < r.W.size(); ++m) w["W" + std::to_string(m) + ",inf"] = r.W[m];
  j["W"] = w;
  json h = json::object();
  for (std::size_t k = 0; k < r.Hneg.size(); ++k) h["H-" + std::to_string(k + 1)] = r.Hneg[k];
  j["H_neg"] = h;
  j["traces"] = r.traces;
  return j;
}

// ---------------------------------------------------------------------------
// Analysis report

inline json vectors_json(const std::vector<RatVector>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(to_strings(v));
  return a;
}

inline json coercivity_json(const CoercivityReport& r) {
  json j;
  j["status"] = r.status;
  j["tstar_est"] = std::isfinite(r.tstar_est) ? json(r.tstar_est) : json(nullptr);
  j["tstar_err"] = std::isfinite(r.tstar_err) && r.status == "crossing_found" ? json(r.tstar_err) : json(nullptr);
  j["grid_N"] = r.grid_N;
  j["T_max"] = r.T_max;
  j["endpoint_mode"] = to_string(r.mode);
  j["crossings"] = r.crossings;
  j["brunovsky_applied"] = r.auto_transformed;
  json notes = r.notes;
  notes.push_back("lambda_min is checked at finitely many t for piecewise-constant controls; a heuristic outer approximation");
  j["notes"] = notes;
  return j;
}

struct ReportOptions {
  bool coercivity = true;
  int coercivity_N = 100;
  double coercivity_Tmax = 5.0;
};

inline json analysis_report(const ControlSystem& sys, const ReportOptions& opt = {}) {
  auto qd = extract_quadratic_data(sys);
  auto r = analyze(qd);
  auto cls = classify(qd, r);
  json j;
  j["system"] = sys.name();
  j["n"] = sys.n();
  j["kind"] = to_string(sys.kind());
  j["equations"] = equations(sys);
  j["classification"] = to_string(cls.verdict);
  j["message"] = cls.message();
  j["d"] = cls.d;
  j["k"] = cls.is_drift() ? json(cls.k) : json(nullptr);
  j["d_k"] = cls.is_drift() ? json(format_vector(cls.direction)) : json(nullptr);
  j["norm_threshold"] = cls.is_drift() ? json(cls.norm_threshold()) : json(nullptr);
  j["S1"] = vectors_json(r.s1.basis);
  j["S2"] = vectors_json(r.s2_basis);
  j["S2_bracket_bound"] = r.s2_Kmax;
  if (r.s1.d > 0) {
    auto t = build_transform(qd, r.s1);
    j["brunovsky"] = {{"alpha", to_strings(t.alpha)},
                      {"beta", to_strings(t.beta)},
                      {"well_prepared", is_zero(matrix_power(qd.H0, r.s1.d) * qd.b)}};
    auto m = build_m2(qd, r);
    json g2 = json::array();
    for (int a = 0; a < m.d; ++a)
      for (int b = a; b < m.d; ++b)
        if (!is_zero(m.coef[a][b])) g2.push_back({{"i", a}, {"j", b}, {"coefficient", to_strings(m.coef[a][b])}});
    j["manifold"] = {{"equations", m.describe()}, {"G2", g2}, {"Q", m.Q().to_strings()}, {"local", true}};
  } else {
    j["brunovsky"] = nullptr;
    j["manifold"] = nullptr;
  }
  if (cls.verdict == Verdict::Drift) {
    auto kr = krener_checks(qd, r, cls.k);
    json signs = json::array();
    for (const auto& e : kr.entries) signs.push_back(e.sign);
    j["krener"] = {{"lower_pairs_in_S1", kr.lower_pairs_checked}, {"signs", signs}, {"independent", kr.independent}};
  }
  if (cls.is_drift() && opt.coercivity) {
    auto p = make_coercivity_problem(sys);
    j["coercivity"] = coercivity_json(estimate_tstar(p, opt.coercivity_Tmax, opt.coercivity_N));
  } else {
    j["coercivity"] = nullptr;
  }
  return j;
}

/// Exit code protocol of the classify command.
inline int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::LinearlyControllable: return 0;
    case Verdict::InvariantManifold: return 10;
    case Verdict::DriftOrderZero:
    case Verdict::Drift: return 20;
  }
  return 2;
}

}  // namespace quadctrl::io
