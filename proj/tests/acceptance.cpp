// Acceptance gate: seven end-to-end scenarios, one verdict line each.
// Every tolerance is pinned here, next to the check that uses it; the
// binary exits 0 only when all seven lines read PASS.
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lamsym/fieldtheory.hpp"
#include "lamsym/lagrangian.hpp"
#include "lamsym/numtrace.hpp"
#include "lamsym/problemfile.hpp"

using namespace lamsym;

namespace {

// symbolic identities sample at 64 seeded points with 1e-9 tolerances
// (the SamplingConfig defaults); the rest are pinned below
constexpr double kDriftTol = 1e-8;     // conserved quantity along the RK4 flow
constexpr double kOnShellTol = 1e-8;   // EL-projected current identities
constexpr double kSolutionTol = 1e-8;  // pointwise residual of a known solution
constexpr double kTraceTol = 1e-5;     // centered-difference deviation residual
constexpr double kFdRelTol = 1e-5;     // derivative vs finite difference
constexpr double kOrderGain = 3.5;     // halving h must shrink residuals this much

SamplingConfig cfg;  // defaults: seed 42, 64 samples, box [0.2, 2]

struct Gate {
  int failed = 0;

  void run(const char* label, const std::function<bool(std::string&)>& body) {
    std::string why;
    bool ok = false;
    try {
      ok = body(why);
    } catch (const std::exception& e) {
      ok = false;
      why = std::string("unexpected exception: ") + e.what();
    }
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", label);
    if (!ok && !why.empty()) std::printf("       %s\n", why.c_str());
    if (!ok) ++failed;
  }
};

bool eq(const SymbolTable& st, const Expr& a, const Expr& b, std::string& why,
        const std::string& label) {
  EquivResult r = equiv(st, a, b, cfg);
  if (!r.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: max diff %.3g; ", label.c_str(),
                  std::abs(r.witness_lhs - r.witness_rhs));
    why += buf;
  }
  return r.pass;
}

bool rep_ok(const VerificationReport& rep, std::string& why, const std::string& label) {
  if (rep.overall()) return true;
  for (const auto& c : rep.checks)
    if (c.verdict == Verdict::Fail) {
      why += label + ": '" + c.name + "' failed; ";
      break;
    }
  return false;
}

std::string fixture(const std::string& name) {
  return std::string(LAMSYM_FIXTURE_DIR) + "/" + name + ".toml";
}

// ---------------------------------------------------------------- fixtures

struct IntroSystem {
  SymbolTable st = SymbolTable::ode("t", {"u1", "u2"}, 1);
  DynamicalSystem ds{{parse("u1*u2", st), parse("-u1^2", st)}};
  VectorField X{{parse("u2", st), parse("-u1", st)}, std::nullopt};
  Expr lambda = parse("u2", st);
  CoordinateMap chart() const {
    CoordinateMap m;
    m.w_names = {"r"};
    m.w = {parse("sqrt(u1^2 + u2^2)", st)};
    m.z_name = "z";
    SymbolTable nt = SymbolTable::ode("t", {"r", "z"}, 1);
    m.inverse = {parse("r*cos(z)", nt), parse("-r*sin(z)", nt)};
    return m;
  }
};

struct ScalePair {
  SymbolTable st = SymbolTable::ode("t", {"q1", "q2"}, 2);
  Lagrangian lag{
      parse("(dq1/q1 - q1)^2/2 + (dq1 - q1*dq2)^2*exp(-2*q2)/2 + q1*exp(-q2)", st)};
  VectorField X{{parse("q1", st), parse("1", st)}, std::nullopt};
  LambdaMatrix lam = LambdaMatrix::diagonal({parse("q1", st), parse("q1", st)});
};

struct LogPair {
  SymbolTable st = SymbolTable::ode("t", {"q1", "q2"}, 2);
  Lagrangian lag{parse("(dq1/q1 - log(q1))^2/2 + (dq1/q1 + dq2/q2)^2/2", st)};
  VectorField X{{parse("q1", st), parse("-q2", st)}, std::nullopt};
  LambdaMatrix lam = LambdaMatrix::scalar(Expr::num(1.0), 2);
};

struct ExpWell {
  SymbolTable st = SymbolTable::ode("t", {"q"}, 2);
  Lagrangian lag{parse("(dq/q + 1)^2*exp(-2*q)/2", st)};
  VectorField X{{parse("q", st)}, std::nullopt};
  LambdaMatrix lam = LambdaMatrix::full(MatrixExpr::from_rows({{parse("q + dq", st)}}));
};

struct PlanarPair {
  SymbolTable st = SymbolTable::field({"x", "y"}, {"u", "v"}, 2);
  Expr L = parse("(u_x^2 + u_y^2)/2 - (u_x*v_x + u_y*v_y)/u + u^2*exp(-2*v)", st);
  FieldVectorField X{{parse("u", st), parse("1", st)}, std::nullopt};
  std::vector<MatrixExpr> lams{
      MatrixExpr::from_rows({{parse("0", st), parse("0", st)},
                             {parse("u_x", st), parse("0", st)}}),
      MatrixExpr::from_rows({{parse("0", st), parse("0", st)},
                             {parse("u_y", st), parse("0", st)}})};
  MatrixExpr gamma = MatrixExpr::from_rows(
      {{parse("1", st), parse("0", st)}, {parse("u", st), parse("1", st)}});
};

struct PerturbedLaplace {
  SymbolTable st;
  SamplingConfig box_cfg;
  Expr L;
  FieldVectorField X;
  std::vector<MatrixExpr> lams;
  MatrixExpr gamma = MatrixExpr(1, 1);

  explicit PerturbedLaplace(double eps)
      : st(SymbolTable::field({"r", "theta"}, {"u"}, 2, {{"eps", eps}})) {
    box_cfg.box["r"] = {0.5, 2.0};
    box_cfg.box["theta"] = {0.2, 1.5};
    L = parse("r^2*exp(-eps*theta)*u_r^2/2 + exp(eps*theta)*u_theta^2/2", st);
    X = FieldVectorField{{parse("0", st)},
                         std::vector<Expr>{parse("0", st), parse("1", st)}};
    lams = {MatrixExpr::from_rows({{parse("0", st)}}),
            MatrixExpr::from_rows({{parse("eps", st)}})};
    gamma.at(0, 0) = parse("exp(eps*theta)", st);
  }
};

// --------------------------------------------------------------- criteria

// deformed rotation system: determining equations, adapted chart, and the
// conserved radius along the numerical flow
bool criterion1(std::string& why) {
  IntroSystem M;
  bool ok = rep_ok(check_deformed_symmetry(M.st, M.ds, M.X,
                                           LambdaMatrix::scalar(M.lambda, 2), cfg),
                   why, "determining equations");

  auto ts = transform_system(M.st, M.ds, M.chart(), cfg);
  ok &= rep_ok(ts.report, why, "transform");
  ok &= eq(ts.table, ts.W[0], Expr::num(0.0), why, "invariant rate");
  ok &= eq(ts.table, ts.Z, parse("r*cos(z)", ts.table), why, "rectifying rate");

  Trajectory traj = integrate_rk4(M.st, M.ds, {1.0, 1.0}, 0.0, 1e-3, 1000);
  std::vector<double> r = trace_quantity(M.st, traj, parse("sqrt(u1^2 + u2^2)", M.st));
  double drift = 0.0;
  for (double v : r) drift = std::max(drift, std::abs(v - r[0]));
  if (drift > kDriftTol) {
    why += "radius drift " + std::to_string(drift) + "; ";
    ok = false;
  }
  return ok;
}

// scaling pair: the full lift from configuration to phase space, with the
// generating function and its decay law, symbolically and along a trajectory
bool criterion2(std::string& why) {
  ScalePair M;
  auto out = run_lift_pipeline(
      M.st, M.lag, M.X, M.lam,
      MatrixExpr::diagonal({parse("q1", M.st), parse("0", M.st)}), cfg);
  bool ok = rep_ok(out.report, why, "pipeline");
  if (!out.leg || !out.hs || !out.G || !out.phase_lam) {
    why += "pipeline did not produce the full lift; ";
    return false;
  }
  const SymbolTable& ph = out.leg->phase;

  // momenta composed with the recovered velocities return each dq
  std::map<std::string, Expr> back;
  for (std::size_t a = 0; a < 2; ++a) back[ph.p_names()[a]] = out.leg->momenta[a];
  for (std::size_t a = 0; a < 2; ++a)
    ok &= eq(M.st, substitute(out.leg->velocity[a], back),
             Expr::sym(M.st.derivative(M.st.states()[a], 1)), why,
             "velocity round trip");

  ok &= eq(ph, out.Phi[2], parse("-p1", ph), why, "lifted component [p1]");
  ok &= eq(ph, out.Phi[3], Expr::num(0.0), why, "lifted component [p2]");

  const char* want[4][4] = {{"q1", "0", "0", "0"},
                            {"0", "q1", "0", "0"},
                            {"-p1", "-p2", "q1", "0"},
                            {"0", "0", "0", "0"}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      ok &= eq(ph, out.phase_lam->m.at(i, j), parse(want[i][j], ph), why,
               "phase deformation entry");

  DynamicalSystem flow{hamilton_equations(ph, *out.hs)};
  VectorField Xp{out.Phi, std::nullopt};
  ok &= rep_ok(check_deformed_symmetry(ph, flow, Xp, *out.phase_lam, cfg), why,
               "phase determining equations");

  Expr G = parse("q1*p1 + p2", ph);
  ok &= eq(ph, *out.G, G, why, "generating function");
  ok &= eq(ph, flow_derivative(ph, *out.hs, *out.G), parse("-q1*(q1*p1 + p2)", ph),
           why, "decay law");

  Trajectory traj = integrate_rk4(ph, flow, {1.0, 0.5, 0.5, 0.2}, 0.0, 1e-3, 500);
  DeviationResult dev = check_trace_deviation(
      ph, traj, G, parse("-q1*(q1*p1 + p2)", ph), kTraceTol);
  if (!dev.pass) {
    why += "trace residual " + std::to_string(dev.max_abs_err) + "; ";
    ok = false;
  }
  return ok;
}

// logarithmic pair: charge decay, identity lift, invariant reduction with a
// known solution, and the reduced flow of the invariants
bool criterion3(std::string& why) {
  LogPair M;
  bool ok = rep_ok(check_deformed_invariance(M.st, M.lag, M.X, M.lam, cfg), why,
                   "invariance");

  // D_t P = -P on solutions (the uniform multiplier is 1)
  auto charge = noether_charge(M.st, M.lag, M.X, M.lam, cfg);
  ok &= rep_ok(charge.report, why, "charge");
  Expr decayed = Expr::add(total_derivative(M.st, charge.P, "t"), charge.P);
  if (!onshell_el_equiv(M.st, M.lag, decayed, Expr::num(0.0), cfg).pass) {
    why += "charge decay law; ";
    ok = false;
  }

  // uniform multiplier hypothesis: (Lambda phi)_a = 1 * phi_a
  std::vector<Expr> gain = M.lam.m.apply(M.X.phi);
  for (std::size_t a = 0; a < 2; ++a)
    ok &= eq(M.st, gain[a], M.X.phi[a], why, "uniform multiplier");

  auto out = run_lift_pipeline(M.st, M.lag, M.X, M.lam, std::nullopt, cfg);
  ok &= rep_ok(out.report, why, "pipeline");
  if (!out.leg || !out.hs || !out.G || !out.phase_lam) {
    why += "pipeline did not produce the full lift; ";
    return false;
  }
  const SymbolTable& ph = out.leg->phase;
  ok &= eq(ph, *out.G, parse("q1*p1 - q2*p2", ph), why, "generating function");
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      ok &= eq(ph, out.phase_lam->m.at(i, j),
               Expr::num(i == j ? 1.0 : 0.0), why, "identity lift entry");

  ReductionInput in;
  in.w_names = {"w"};
  in.w = {parse("q1*q2", M.st)};
  in.zeta = parse("dq1/q1 - log(q1)", M.st);
  in.Ltilde_text = "zeta^2/2 + (dw/w)^2/2";
  auto red = reduce_by_invariants(M.st, M.lag, M.X, M.lam, in, cfg);
  ok &= rep_ok(red.report, why, "reduction");
  if (red.degenerate) {
    why += "reduction is degenerate; ";
    ok = false;
  }
  ok &= eq(M.st, red.reduced_equation, parse("dq1/q1 - log(q1)", M.st), why,
           "reduced equation");

  // the emitted equation dq1 = q1 log q1 admits q1(t) = exp(c e^t)
  Expr residual = parse("dq1 - q1*log(q1)", M.st);
  for (double c : {0.5, 1.0}) {
    for (int k = 0; k <= 10; ++k) {
      double t = 0.1 * k;
      double q1 = std::exp(c * std::exp(t));
      double dq1 = c * std::exp(t) * q1;
      double res = std::abs(eval(residual, {{"q1", q1}, {"dq1", dq1}}));
      if (res > kSolutionTol) {
        why += "known solution residual " + std::to_string(res) + "; ";
        ok = false;
      }
    }
  }

  // flow of the invariants under the lifted Hamiltonian
  auto fd = [&](const char* q) { return flow_derivative(ph, *out.hs, parse(q, ph)); };
  ok &= eq(ph, fd("q1*q2"), parse("(q1*q2)*(q2*p2)", ph), why, "reduced rate [w1]");
  ok &= eq(ph, fd("q1*p1"), parse("q2*p2 - q1*p1", ph), why, "reduced rate [w2]");
  ok &= eq(ph, fd("q1*p1 - q2*p2"), parse("-(q1*p1 - q2*p2)", ph), why,
           "reduced rate [G]");
  ok &= eq(ph, fd("log(q1)"), parse("log(q1) + q1*p1 - q2*p2", ph), why,
           "reduced rate [z]");
  return ok;
}

// exponential well: velocity-dependent lift, divergence-type constant of
// motion, and the documented absence of a generating function
bool criterion4(std::string& why) {
  ExpWell M;
  auto out = run_lift_pipeline(M.st, M.lag, M.X, M.lam, std::nullopt, cfg);
  bool ok = rep_ok(out.report, why, "pipeline");
  if (!out.leg || !out.hs || !out.S) {
    why += "pipeline did not produce the divergence; ";
    return false;
  }
  const SymbolTable& ph = out.leg->phase;
  if (!out.velocity_dependent) {
    why += "deformation lift should be velocity dependent; ";
    ok = false;
  }
  ok &= eq(ph, out.Phi[1], parse("-q*p - p", ph), why, "lifted component [p]");
  ok &= eq(ph, *out.S, parse("-q", ph), why, "divergence");
  ok &= eq(ph, flow_derivative(ph, *out.hs, *out.S),
           parse("q - q^2*p*exp(2*q)", ph), why, "divergence deviation law");

  if (out.G) {
    why += "no generating function should exist; ";
    ok = false;
  }
  auto gen = find_generating_function(ph, out.Phi, cfg);
  if (gen.G || gen.asym_a.empty()) {
    why += "absence should come with an asymmetry witness; ";
    ok = false;
  }
  return ok;
}

// planar two-field system: flat deformation, factored gauge, invariance, and
// the on-shell divergence of the current
bool criterion5(std::string& why) {
  PlanarPair M;
  bool ok = rep_ok(check_compatibility(M.st, M.lams, cfg), why, "compatibility");
  ok &= rep_ok(check_gamma_factorization(M.st, M.gamma, M.lams, cfg), why,
               "gauge factorization");
  ok &= rep_ok(check_deformed_field_invariance(M.st, M.L, M.X, M.lams, cfg), why,
               "invariance");

  auto cons = check_conservation(M.st, M.L, M.X, M.lams, cfg, kOnShellTol);
  ok &= rep_ok(cons.report, why, "conservation");
  const auto& xs = M.st.indep_vars();
  Expr div = Expr::num(0.0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    div = Expr::add(std::move(div),
                    total_derivative(M.st, cons.currents.P[i], xs[i]));
  Expr gap = Expr::sub(std::move(div), parse("u_x^2 + u_y^2", M.st));
  auto er = el_projected_zero(M.st, M.L, simplify(gap), cfg, kOnShellTol);
  if (!er.pass) {
    why += "on-shell current divergence, max diff " +
           std::to_string(er.max_abs_diff) + "; ";
    ok = false;
  }
  return ok;
}

// perturbed Laplace system: invariance at two magnitudes of the weight, the
// current divergence identity, the gauge-equivalent field, and the
// variational equation itself
bool criterion6(std::string& why) {
  bool ok = true;
  for (double eps : {0.1, 1.0}) {
    PerturbedLaplace M(eps);
    SamplingConfig& bc = M.box_cfg;
    if (!check_deformed_field_invariance(M.st, M.L, M.X, M.lams, bc).overall()) {
      why += "invariance at weight " + std::to_string(eps) + "; ";
      ok = false;
    }
  }

  PerturbedLaplace M(0.1);
  SamplingConfig& bc = M.box_cfg;
  auto cons = check_conservation(M.st, M.L, M.X, M.lams, bc, kOnShellTol);
  ok &= rep_ok(cons.report, why, "conservation");
  const auto& xs = M.st.indep_vars();
  Expr div = Expr::num(0.0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    div = Expr::add(std::move(div),
                    total_derivative(M.st, cons.currents.P[i], xs[i]));
  // D_i P_i = -eps P_2, so the sum plus eps P_2 must vanish on shell
  Expr gap = Expr::add(std::move(div),
                       Expr::mul(parse("eps", M.st), cons.currents.P[1]));
  auto er = el_projected_zero(M.st, M.L, simplify(gap), bc, kOnShellTol);
  if (!er.pass) {
    why += "deformed divergence identity, max diff " +
           std::to_string(er.max_abs_diff) + "; ";
    ok = false;
  }

  auto gauge = gauge_equivalent_field(M.st, M.L, M.X, M.lams, M.gamma, bc,
                                      kOnShellTol);
  ok &= rep_ok(gauge.report, why, "gauge field");
  if (!gauge.Xt.xi) {
    why += "gauge field lost its independent components; ";
    return false;
  }
  EquivResult g0 = equiv(M.st, (*gauge.Xt.xi)[0], Expr::num(0.0), bc);
  EquivResult g1 = equiv(M.st, (*gauge.Xt.xi)[1], parse("exp(eps*theta)", M.st), bc);
  if (!g0.pass || !g1.pass) {
    why += "gauge field components; ";
    ok = false;
  }
  Expr gdiv = Expr::num(0.0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    gdiv = Expr::add(std::move(gdiv), total_derivative(M.st, gauge.P[i], xs[i]));
  auto ger = el_projected_zero(M.st, M.L, simplify(gdiv), bc, kOnShellTol);
  if (!ger.pass) {
    why += "gauge current divergence, max diff " +
           std::to_string(ger.max_abs_diff) + "; ";
    ok = false;
  }

  auto els = field_euler_lagrange(M.st, M.L);
  Expr display = parse(
      "exp(-eps*theta)*(r^2*u_rr + 2*r*u_r + exp(2*eps*theta)*(u_thetatheta + eps*u_theta))",
      M.st);
  EquivResult el = equiv(M.st, els[0], display, bc);
  if (!el.pass) {
    why += "variational equation shape; ";
    ok = false;
  }
  return ok;
}

// ------------------------------------------------------------ property work

bool zero_deformation_degenerates(std::string& why) {
  bool ok = true;

  // on every time-domain fixture the zero deformation reproduces the standard
  // prolongation, in both the scalar and the matrix flavor
  auto check_prolong = [&](const SymbolTable& st, const VectorField& X,
                           const std::string& label) {
    auto std_p = standard_prolongation(st, X);
    auto mat_p = deformed_prolongation(st, X, LambdaMatrix::zero(static_cast<int>(X.phi.size())));
    auto sc_p = deformed_prolongation(st, X, Expr::num(0.0));
    for (std::size_t a = 0; a < X.phi.size(); ++a) {
      ok &= eq(st, mat_p.dot[a], std_p.dot[a], why, label + " matrix flavor");
      ok &= eq(st, sc_p.dot[a], std_p.dot[a], why, label + " scalar flavor");
    }
  };
  {
    IntroSystem M;
    check_prolong(M.st, M.X, "rotation system");
  }
  {
    ScalePair M;
    check_prolong(M.st, M.X, "scaling pair");
  }
  {
    LogPair M;
    check_prolong(M.st, M.X, "logarithmic pair");
  }
  {
    ExpWell M;
    check_prolong(M.st, M.X, "exponential well");
  }

  // an undeformed point symmetry keeps the classical conserved charge
  {
    SymbolTable st = SymbolTable::ode("t", {"q1", "q2"}, 2);
    Lagrangian lag{parse("(dq1^2 + dq2^2)/2 - q1^2 - q2^2", st)};
    VectorField X{{parse("q2", st), parse("-q1", st)}, std::nullopt};
    auto charge = noether_charge(st, lag, X, LambdaMatrix::zero(2), cfg);
    ok &= rep_ok(charge.report, why, "classical charge");
    Expr rate = total_derivative(st, charge.P, "t");
    if (!onshell_el_equiv(st, lag, rate, Expr::num(0.0), cfg).pass) {
      why += "classical charge is not conserved; ";
      ok = false;
    }
  }

  // an undeformed field shift keeps the classical current with zero divergence
  {
    SymbolTable st = SymbolTable::field({"x", "y"}, {"u"}, 2);
    Expr L = parse("(u_x^2 + u_y^2)/2", st);
    FieldVectorField X{{parse("1", st)}, std::nullopt};
    std::vector<MatrixExpr> zeros{MatrixExpr::zero(1, 1), MatrixExpr::zero(1, 1)};
    auto cons = check_conservation(st, L, X, zeros, cfg, kOnShellTol);
    ok &= rep_ok(cons.report, why, "classical conservation");
    ok &= eq(st, cons.currents.P[0], parse("u_x", st), why, "classical current [x]");
    ok &= eq(st, cons.currents.P[1], parse("u_y", st), why, "classical current [y]");
    Expr div = Expr::add(total_derivative(st, cons.currents.P[0], "x"),
                         total_derivative(st, cons.currents.P[1], "y"));
    if (!el_projected_zero(st, L, simplify(div), cfg, kOnShellTol).pass) {
      why += "classical divergence; ";
      ok = false;
    }
  }
  return ok;
}

bool derivatives_match_finite_differences(std::string& why) {
  bool ok = true;
  const char* names[] = {"intro_ds", "example1", "example2",
                         "example3", "example4", "example5"};
  for (const char* name : names) {
    ProblemFile pf = load_problem_file(fixture(name));
    std::vector<Expr> exprs;
    if (pf.kind == ProblemKind::DynSystem) {
      const PValue* sys = pf.root.find("system");
      for (const auto& cell : sys->find("f")->arr) exprs.push_back(parse(cell.str, pf.st));
    } else if (pf.kind == ProblemKind::Lagrangian) {
      exprs.push_back(parse(pf.root.find("lagrangian")->find("L")->str, pf.st));
    } else if (pf.kind == ProblemKind::Field) {
      exprs.push_back(parse(pf.root.find("field")->find("L")->str, pf.st));
    }

    const auto& params = pf.st.params();
    for (const Expr& e : exprs) {
      std::vector<std::string> vars;
      for (const auto& s : free_symbols(e))
        if (!params.count(s)) vars.push_back(s);

      for (int k = 0; k < 6; ++k) {
        std::map<std::string, double> env(params.begin(), params.end());
        for (std::size_t j = 0; j < vars.size(); ++j) {
          auto [lo, hi] = pf.cfg.range(vars[j]);
          double frac = 0.37 * (k + 1) + 0.23 * (static_cast<double>(j) + 1);
          frac -= std::floor(frac);
          env[vars[j]] = lo + (hi - lo) * (0.3 + 0.4 * frac);
        }
        for (const std::string& v : vars) {
          double x = env[v];
          double delta = 1e-6 * std::max(1.0, std::abs(x));
          double analytic = eval(diff(e, v), env);
          std::map<std::string, double> up = env, dn = env;
          up[v] = x + delta;
          dn[v] = x - delta;
          double fd = (eval(e, up) - eval(e, dn)) / (2.0 * delta);
          double rel = std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
          if (rel > kFdRelTol) {
            why += std::string(name) + " d/d" + v + " rel err " +
                   std::to_string(rel) + "; ";
            ok = false;
          }
        }
      }
    }
  }
  return ok;
}

bool single_entry_mutations_flip(std::string& why) {
  bool ok = true;
  auto expect_flip = [&](bool before, bool after, const std::string& label) {
    if (!before) {
      why += label + ": baseline does not pass; ";
      ok = false;
    }
    if (after) {
      why += label + ": mutation goes unnoticed; ";
      ok = false;
    }
  };

  {
    IntroSystem M;
    bool before = check_deformed_symmetry(M.st, M.ds, M.X,
                                          LambdaMatrix::scalar(M.lambda, 2), cfg)
                      .overall();
    bool after = check_deformed_symmetry(
                     M.st, M.ds, M.X,
                     LambdaMatrix::scalar(parse("u2 + 1", M.st), 2), cfg)
                     .overall();
    expect_flip(before, after, "rotation system");
  }
  {
    ScalePair M;
    bool before = check_deformed_invariance(M.st, M.lag, M.X, M.lam, cfg).overall();
    LambdaMatrix bad = M.lam;
    bad.m.at(0, 0) = parse("q1 + 1", M.st);
    bool after = check_deformed_invariance(M.st, M.lag, M.X, bad, cfg).overall();
    expect_flip(before, after, "scaling pair");
  }
  {
    LogPair M;
    bool before = check_deformed_invariance(M.st, M.lag, M.X, M.lam, cfg).overall();
    LambdaMatrix bad = M.lam;
    bad.m.at(0, 0) = Expr::num(2.0);
    bool after = check_deformed_invariance(M.st, M.lag, M.X, bad, cfg).overall();
    expect_flip(before, after, "logarithmic pair");
  }
  {
    ExpWell M;
    bool before = check_deformed_invariance(M.st, M.lag, M.X, M.lam, cfg).overall();
    LambdaMatrix bad = M.lam;
    bad.m.at(0, 0) = parse("q + dq + 1", M.st);
    bool after = check_deformed_invariance(M.st, M.lag, M.X, bad, cfg).overall();
    expect_flip(before, after, "exponential well");
  }
  {
    PlanarPair M;
    bool before =
        check_deformed_field_invariance(M.st, M.L, M.X, M.lams, cfg).overall();
    auto bad = M.lams;
    bad[0].at(1, 0) = parse("u_x + 1", M.st);
    bool after =
        check_deformed_field_invariance(M.st, M.L, M.X, bad, cfg).overall();
    expect_flip(before, after, "planar pair");
  }
  {
    PerturbedLaplace M(0.1);
    bool before = check_deformed_field_invariance(M.st, M.L, M.X, M.lams, M.box_cfg)
                      .overall();
    auto bad = M.lams;
    bad[1].at(0, 0) = parse("eps + 1", M.st);
    bool after =
        check_deformed_field_invariance(M.st, M.L, M.X, bad, M.box_cfg).overall();
    expect_flip(before, after, "perturbed Laplace");
  }
  return ok;
}

bool halving_h_sharpens_residuals(std::string& why) {
  ScalePair M;
  auto leg = legendre_transform(M.st, M.lag, cfg);
  const SymbolTable& ph = leg.phase;
  DynamicalSystem flow{hamilton_equations(ph, HamiltonianSystem{leg.H})};
  Expr G = parse("q1*p1 + p2", ph);
  Expr rate = parse("-q1*(q1*p1 + p2)", ph);
  std::vector<double> x0{1.0, 0.5, 0.5, 0.2};

  Trajectory coarse = integrate_rk4(ph, flow, x0, 0.0, 1e-3, 500);
  Trajectory fine = integrate_rk4(ph, flow, x0, 0.0, 5e-4, 1000);
  DeviationResult rc = check_trace_deviation(ph, coarse, G, rate, kTraceTol);
  DeviationResult rf = check_trace_deviation(ph, fine, G, rate, kTraceTol);
  if (!rc.pass || !rf.pass) {
    why += "deviation residual exceeds tolerance; ";
    return false;
  }
  double gain = rc.max_abs_err / rf.max_abs_err;
  if (gain < kOrderGain) {
    why += "residual gain " + std::to_string(gain) + " below " +
           std::to_string(kOrderGain) + "; ";
    return false;
  }
  return true;
}

bool verdicts_are_reproducible(std::string& why) {
  bool ok = true;
  const char* names[] = {"intro_ds", "example1", "example2",
                         "example3", "example4", "example5"};
  for (const char* name : names) {
    ProblemFile a = load_problem_file(fixture(name));
    ProblemFile b = load_problem_file(fixture(name));
    VerificationReport ra = run_verify(a);
    VerificationReport rb = run_verify(b);
    if (ra.to_text() != rb.to_text() || ra.to_json() != rb.to_json()) {
      why += std::string(name) + " is not reproducible; ";
      ok = false;
    }
    if (!ra.overall()) {
      why += std::string(name) + " does not pass; ";
      ok = false;
    }
  }
  return ok;
}

bool criterion7(std::string& why) {
  bool ok = zero_deformation_degenerates(why);
  ok &= derivatives_match_finite_differences(why);
  ok &= single_entry_mutations_flip(why);
  ok &= halving_h_sharpens_residuals(why);
  ok &= verdicts_are_reproducible(why);
  return ok;
}

}  // namespace

int main() {
  Gate gate;
  gate.run("1. rotation system: determining equations, adapted chart, conserved radius",
           criterion1);
  gate.run("2. scaling pair: phase-space lift, generating function, decay law",
           criterion2);
  gate.run("3. logarithmic pair: charge decay, identity lift, invariant reduction",
           criterion3);
  gate.run("4. exponential well: velocity-dependent lift, divergence constant",
           criterion4);
  gate.run("5. planar pair: flat deformation, factored gauge, on-shell current",
           criterion5);
  gate.run("6. perturbed Laplace: weighted invariance, gauge field, variational equation",
           criterion6);
  gate.run("7. properties: degeneration, derivative agreement, mutations, step order, reproducibility",
           criterion7);
  if (gate.failed == 0) {
    std::printf("acceptance: all 7 criteria hold\n");
    return 0;
  }
  std::printf("acceptance: %d of 7 criteria failed\n", gate.failed);
  return 1;
}
