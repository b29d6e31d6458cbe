// quadctrl: classify scalar-input polynomial control systems and run the
// numerical experiments on them.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "quadctrl/coercivity.hpp"
#include "quadctrl/experiments.hpp"
#include "quadctrl/fixtures.hpp"
#include "quadctrl/io.hpp"
#include "quadctrl/linsynth.hpp"

namespace fs = std::filesystem;
using namespace quadctrl;
using io::json;

namespace {

enum Exit : int {
  kOk = 0,
  kInputError = 2,
  kManifold = 10,
  kNotDrift = 11,
  kDrift = 20,
  kKalmanFails = 21,
  kDivergence = 30,
};

struct Source {
  std::string system;
  std::string example;

  void add(CLI::App* cmd) {
    auto* s = cmd->add_option("--system", system, "system file (JSON)");
    auto* e = cmd->add_option("--example", example, "built-in fixture name");
    s->excludes(e);
    e->excludes(s);
  }

  ControlSystem load() const {
    if (!system.empty()) return io::load_system(system);
    if (!example.empty()) return fixtures::get(example);
    throw InputError("one of --system or --example is required");
  }
};

void emit(const json& j, const std::string& out) {
  std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw InputError("cannot write '" + out + "'");
  f << text;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw InputError("cannot write '" + p.string() + "'");
  return f;
}

fs::path ensure_dir(const std::string& dir) {
  if (dir.empty()) throw InputError("--out DIR is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

Eigen::VectorXd parse_point(const std::string& text, int n, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InputError(flag + ": '" + item + "' is not a number");
    }
  }
  if (static_cast<int>(v.size()) != n)
    throw InputError(flag + ": expected " + std::to_string(n) + " comma-separated values");
  return Eigen::Map<Eigen::VectorXd>(v.data(), n);
}

std::vector<double> to_vec(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

// ---------------------------------------------------------------------------

int run_classify(const Source& src, const std::string& out, bool coercivity) {
  auto sys = src.load();
  io::ReportOptions opt;
  opt.coercivity = coercivity;
  json rep = io::analysis_report(sys, opt);
  emit(rep, out);
  return io::verdict_exit_code(classify(sys).verdict);
}

int run_simulate(const Source& src, const std::string& spec, double T, double dt, const std::string& out) {
  auto sys = src.load();
  auto dir = ensure_dir(out);
  auto u = io::parse_control(spec, T, dt);
  auto qd = extract_quadratic_data(sys);
  auto r = analyze(qd);
  auto cls = classify(qd, r);
  Trajectory tr;
  try {
    tr = integrate(sys, Eigen::VectorXd::Zero(sys.n()), u, dt);
  } catch (const DivergenceError& e) {
    json j{{"system", sys.name()}, {"diverged", true}, {"escape_time", e.escape_time()}};
    emit(j, (dir / "report.json").string());
    std::cerr << "quadctrl: " << e.what() << "\n";
    return kDivergence;
  }
  {
    auto f = open_out(dir / "trajectory.csv");
    io::write_trajectory_csv(f, tr);
  }
  auto m = build_m2(qd, r);
  auto gap = manifold_gap(tr, m, cls.is_drift() ? cls.direction : RatVector{});
  {
    auto f = open_out(dir / "drift.csv");
    f << "t,drift,residual\n";
    for (std::size_t i = 0; i < gap.t.size(); ++i)
      f << io::fmt17(gap.t[i]) << ',' << io::fmt17(gap.value[i]) << ',' << io::fmt17(gap.residual[i]) << '\n';
  }
  int kmax = std::max(1, r.s1.d);
  int mmax = std::min(3, std::max(0, (u.intervals() + 1 - 1) / 2));
  json j;
  j["system"] = sys.name();
  j["control"] = u.source();
  j["T"] = u.T();
  j["dt"] = dt;
  j["classification"] = to_string(cls.verdict);
  j["x_final"] = to_vec(tr.final_state());
  j["norms"] = io::norms_json(norms(u, mmax, kmax));
  j["residual_sup"] = gap.residual_sup;
  if (cls.is_drift()) {
    j["drift_min"] = gap.min;
    j["drift_final"] = gap.final;
  }
  emit(j, (dir / "report.json").string());
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int run_coercivity(const Source& src, double Tmax, int grid, const std::string& mode, const std::string& out) {
  auto sys = src.load();
  auto cls = classify(sys);
  if (!cls.is_drift()) {
    std::cerr << "quadctrl: coercivity needs a quadratic drift; " << sys.name() << " is " << to_string(cls.verdict)
              << " (" << cls.message() << ")\n";
    return kNotDrift;
  }
  if (!(Tmax > 0.0)) throw InputError("--Tmax must be positive");
  if (grid < 2) throw InputError("--grid must be at least 2");
  EndpointMode em;
  if (mode == "clamped") em = EndpointMode::Clamped;
  else if (mode == "free") em = EndpointMode::Free;
  else throw InputError("--mode must be clamped or free");
  auto p = make_coercivity_problem(sys);
  auto rep = estimate_tstar(p, Tmax, grid, em);
  json full{{"system", sys.name()}, {"k", cls.k}, {"gamma", sys.gamma()}};
  full.update(io::coercivity_json(rep));
  if (std::isfinite(rep.tstar_refined)) full["tstar_refined"] = rep.tstar_refined;
  if (!out.empty()) {
    auto dir = ensure_dir(out);
    auto f = open_out(dir / "coercivity.csv");
    f << "t,lambda_min\n";
    for (auto [t, l] : rep.sweep) f << io::fmt17(t) << ',' << io::fmt17(l) << '\n';
    emit(full, (dir / "coercivity.json").string());
  }
  std::cout << full.dump(2) << "\n";
  return kOk;
}

int run_steer(const Source& src, const std::string& from, const std::string& to, double T, double eps, bool nonlinear,
              double tol, int N, const std::string& out) {
  auto sys = src.load();
  auto x0 = parse_point(from, sys.n(), "--from");
  auto x1 = parse_point(to, sys.n(), "--to");
  if (!(T > 0.0)) throw InputError("--T must be positive");
  if (eps < 0.0 || 2.0 * eps >= T) throw InputError("--epsilon must satisfy 0 <= 2 epsilon < T");
  auto qd = extract_quadratic_data(sys);
  json j;
  j["system"] = sys.name();
  j["T"] = T;
  j["epsilon"] = eps;
  ControlSignal u;
  int code = kOk;
  try {
    if (nonlinear) {
      auto res = steer_nonlinear(sys, x0, x1, T, eps, 20, tol, N);
      u = res.u;
      j["mode"] = "nonlinear";
      j["iterations"] = res.iterations;
      j["residuals"] = res.residuals;
      j["converged"] = res.converged;
      j["steering_error"] = res.residuals.back();
      if (!res.converged) code = kDivergence;
    } else {
      auto res = hum_control(qd, x0, x1, T, eps, N);
      u = res.u;
      Eigen::VectorXd b(qd.n);
      for (int i = 0; i < qd.n; ++i) b[i] = qd.b[i].get_d();
      j["mode"] = "linearized";
      j["gramian_min_eig"] = res.gram.min_eig;
      j["gramian_condition"] = res.gram.cond;
      j["steering_error"] = verify_steering(qd.H0.to_eigen(), b, u, x0, x1);
      j["nonlinear_endpoint_error"] = (integrate(sys, x0, u, T / N).final_state() - x1).norm();
    }
  } catch (const NotControllable& e) {
    json miss = e.missing_directions();
    std::cerr << "quadctrl: " << e.what() << "\nmissing directions (S1 complement): " << miss.dump() << "\n";
    return kKalmanFails;
  } catch (const DivergenceError& e) {
    std::cerr << "quadctrl: " << e.what() << "\n";
    return kDivergence;
  }
  auto nr = norms(u, 0, 0);
  j["control_L2"] = nr.L2;
  j["control_Linf"] = nr.Linf;
  if (!out.empty()) {
    auto dir = ensure_dir(out);
    auto f = open_out(dir / "control.csv");
    io::write_control_csv(f, u);
    emit(j, (dir / "steer.json").string());
  }
  std::cout << j.dump(2) << "\n";
  return code;
}

int run_examples(const std::string& action, const std::string& name) {
  if (action == "list") {
    for (const auto& f : fixtures::all()) std::cout << f.name << "\t" << f.description << "\n";
    return kOk;
  }
  if (action == "dump") {
    if (name.empty()) throw InputError("examples dump needs a fixture name");
    std::cout << io::dump_system(fixtures::get(name)).dump(2) << "\n";
    return kOk;
  }
  throw InputError("examples action must be list or dump");
}

int run_scale(const Source& src, const std::string& family, std::vector<double> amps, double dt,
              const std::string& out) {
  auto sys = src.load();
  auto qd = extract_quadratic_data(sys);
  int order = std::max(analyze(qd).s1.d, 1);
  long N = std::lround(1.0 / dt);
  if (N < 1 || std::abs(N * dt - 1.0) > 1e-9) throw InputError("--dt must divide 1");
  std::function<ControlSignal(double)> fam;
  if (family == "bump") fam = [&](double a) { return bump_control(1.0, static_cast<int>(N), 0.1, 0.9, a, order, 0.3); };
  else if (family == "sinusoid") fam = [&](double a) { return sinusoid_control(1.0, static_cast<int>(N), 2.0 * M_PI, a); };
  else throw InputError("--family must be bump or sinusoid");
  auto rep = scaling_study(sys, fam, amps, dt);
  json j;
  j["system"] = sys.name();
  j["family"] = family;
  j["epsilon"] = rep.epsilon;
  j["drift_final"] = rep.drift_final;
  j["residual_sup"] = rep.residual_sup;
  j["drift_slope"] = std::isfinite(rep.drift_slope) ? json(rep.drift_slope) : json(nullptr);
  j["residual_slope"] = std::isfinite(rep.residual_slope) ? json(rep.residual_slope) : json(nullptr);
  j["residual_exact"] = rep.residual_exact;
  if (!out.empty()) {
    auto dir = ensure_dir(out);
    auto f = open_out(dir / "scaling.csv");
    f << "epsilon,drift_final,residual_sup\n";
    for (std::size_t i = 0; i < rep.epsilon.size(); ++i)
      f << io::fmt17(rep.epsilon[i]) << ',' << io::fmt17(rep.drift_final[i]) << ',' << io::fmt17(rep.residual_sup[i])
        << '\n';
    emit(j, (dir / "scaling.json").string());
  }
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int run_witness(const Source& src, int trials, unsigned seed, double amp) {
  auto sys = src.load();
  auto cls = classify(sys);
  if (!cls.is_drift()) {
    std::cerr << "quadctrl: drift witness needs a drift system; " << sys.name() << " is " << to_string(cls.verdict)
              << "\n";
    return kNotDrift;
  }
  bool final_check = cls.verdict == Verdict::Drift && cls.k >= 2;
  auto w = drift_witness(sys, trials, seed, amp, final_check);
  json j{{"system", w.system},         {"seed", seed},
         {"trials", w.trials},         {"violations", w.violations},
         {"worst_margin", w.worst_margin}, {"final_check", final_check},
         {"final_violations", w.final_violations}};
  std::cout << j.dump(2) << "\n";
  return w.violations == 0 && w.final_violations == 0 ? kOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic controllability analysis for scalar-input polynomial systems"};
  app.require_subcommand(1);

  Source src;
  std::string out;

  auto* classify_cmd = app.add_subcommand("classify", "classify a system and print the analysis report");
  src.add(classify_cmd);
  classify_cmd->add_option("--out", out, "write the report here instead of stdout");
  bool no_coercivity = false;
  classify_cmd->add_flag("--no-coercivity", no_coercivity, "skip the coercivity summary");

  auto* sim = app.add_subcommand("simulate", "integrate from the origin and write series");
  src.add(sim);
  std::string control;
  double T = 1.0, dt = 1e-3;
  sim->add_option("--control", control, "bump(a,b,amp) | sinusoid(freq,amp) | csv:PATH | dilation(k,lambda,mu)")
      ->required();
  sim->add_option("--T", T, "horizon");
  sim->add_option("--dt", dt, "integrator step");
  sim->add_option("--out", out, "output directory")->required();

  auto* coer = app.add_subcommand("coercivity", "estimate the coercivity time");
  src.add(coer);
  double Tmax = 5.0;
  int grid = 200;
  std::string mode = "clamped";
  coer->add_option("--Tmax", Tmax, "largest horizon tested");
  coer->add_option("--grid", grid, "number of control cells");
  coer->add_option("--mode", mode, "clamped or free endpoint primitives");
  coer->add_option("--out", out, "output directory");

  auto* steer = app.add_subcommand("steer", "steer between two states with the linearized HUM control");
  src.add(steer);
  std::string from, to;
  double eps = 0.0, tol = 1e-8;
  int steer_N = 4096;
  bool nonlinear = false;
  steer->add_option("--from", from, "initial state, comma separated")->required();
  steer->add_option("--to", to, "target state, comma separated")->required();
  steer->add_option("--T", T, "horizon");
  steer->add_option("--epsilon", eps, "cutoff width");
  steer->add_flag("--nonlinear", nonlinear, "fixed-point correction on the full system");
  steer->add_option("--tol", tol, "endpoint tolerance of the fixed point");
  steer->add_option("--grid", steer_N, "control grid intervals");
  steer->add_option("--out", out, "output directory");

  auto* ex = app.add_subcommand("examples", "list or dump the built-in fixtures");
  std::string action, name;
  ex->add_option("action", action, "list | dump")->required();
  ex->add_option("name", name, "fixture name for dump");

  auto* scale = app.add_subcommand("scale", "drift and manifold-gap scaling against the amplitude");
  src.add(scale);
  std::string family = "bump";
  std::vector<double> amps{1e-1, 3e-2, 1e-2, 3e-3};
  double scale_dt = 1e-3;
  scale->add_option("--family", family, "bump or sinusoid");
  scale->add_option("--amplitudes", amps, "amplitudes")->delimiter(',');
  scale->add_option("--dt", scale_dt, "integrator step");
  scale->add_option("--out", out, "output directory");

  auto* wit = app.add_subcommand("witness", "random-bump check of the drift inequality");
  src.add(wit);
  unsigned seed = 1;
  int trials = 20;
  double amp = 1e-2;
  wit->add_option("--seed", seed, "random seed");
  wit->add_option("--trials", trials, "number of controls");
  wit->add_option("--amplitude", amp, "largest amplitude");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*classify_cmd) return run_classify(src, out, !no_coercivity);
    if (*sim) return run_simulate(src, control, T, dt, out);
    if (*coer) return run_coercivity(src, Tmax, grid, mode, out);
    if (*steer) return run_steer(src, from, to, T, eps, nonlinear, tol, steer_N, out);
    if (*ex) return run_examples(action, name);
    if (*scale) return run_scale(src, family, amps, scale_dt, out);
    if (*wit) return run_witness(src, trials, seed, amp);
  } catch (const InputError& e) {
    std::cerr << "quadctrl: " << e.what() << "\n";
    return kInputError;
  } catch (const NotEquilibrium& e) {
    std::cerr << "quadctrl: " << e.what() << "\n";
    return kInputError;
  } catch (const DegreeCapExceeded& e) {
    std::cerr << "quadctrl: " << e.what() << "\n";
    return kInputError;
  } catch (const PreconditionError& e) {
    std::cerr << "quadctrl: " << e.what() << "\n";
    return kInputError;
  } catch (const DivergenceError& e) {
    std::cerr << "quadctrl: " << e.what() << "\n";
    return kDivergence;
  } catch (const Error& e) {
    std::cerr << "quadctrl: " << e.what() << "\n";
    return 1;
  }
  return kInputError;
}
