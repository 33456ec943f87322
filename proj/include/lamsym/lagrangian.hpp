#pragma once
// Lagrangian mechanics with deformed symmetries.
//
//  - invariance: X^(1)_Lambda L = 0 with the deformed first prolongation
//  - charges: P = phi_a p_a with p_a = dL/d(dq_a); along solutions
//    D_t P = -(Lambda phi)_a p_a, equivalently the trace of the covariant
//    derivative of the charge matrix P_ab = phi_a p_b vanishes
//  - Legendre transform to a phase table, the lifted phase-space field
//    (phi, psi), and the phase deformation assembled from the configuration
//    one; the lower-right block is a verified candidate, not a derivation,
//    because the defining constraint does not pin it uniquely
//  - reduction of an invariant Lagrangian through invariant coordinates and
//    an invariant first-order quantity zeta: d Ltilde / d zeta = 0 becomes a
//    first-order equation in the original variables

#include <optional>
#include <string>
#include <vector>

#include "hamiltonian.hpp"

namespace lamsym {

struct NonaffineMomentaError : Error {
  using Error::Error;
};

struct Lagrangian {
  Expr L;  // over a time-mode table; first order in the velocities unless
           // explicitly handled by the second-order charge routine
};

namespace detail {

inline int max_jet_order(const SymbolTable& st, const Expr& e) {
  int m = 0;
  for (const auto& s : free_symbols(e)) {
    auto ord = st.symbol_order(s);
    if (ord) m = std::max(m, *ord);
  }
  return m;
}

inline void require_order(const SymbolTable& st, const Expr& e, int max_order,
                          const char* what) {
  if (max_jet_order(st, e) > max_order)
    throw DimensionError(std::string(what) + " exceeds jet order " +
                         std::to_string(max_order));
}

}  // namespace detail

// ------------------------------------------------------------- EL equations

inline std::vector<Expr> euler_lagrange(const SymbolTable& st, const Lagrangian& lag) {
  if (st.order() < 2)
    throw TableError("declare the table with order >= 2 for variational equations");
  detail::require_order(st, lag.L, 1, "lagrangian");
  std::vector<Expr> out;
  for (const auto& q : st.states()) {
    Expr p = diff(lag.L, st.derivative(q, 1));
    out.push_back(simplify(
        Expr::sub(total_derivative(st, p, st.time_var()), diff(lag.L, q))));
  }
  return out;
}

// Solve the variational equations for the accelerations: they are linear in
// the second derivatives with the velocity Hessian as the matrix.
inline std::vector<Expr> symbolic_accelerations(const SymbolTable& st,
                                                const Lagrangian& lag) {
  detail::require_order(st, lag.L, 1, "lagrangian");
  const std::size_t n = st.states().size();
  MatrixExpr H(static_cast<int>(n), static_cast<int>(n));
  std::vector<Expr> rhs;
  for (std::size_t a = 0; a < n; ++a) {
    Expr pa = diff(lag.L, st.derivative(st.states()[a], 1));
    for (std::size_t b = 0; b < n; ++b)
      H.at(static_cast<int>(a), static_cast<int>(b)) =
          diff(pa, st.derivative(st.states()[b], 1));
    Expr r = Expr::sub(diff(lag.L, st.states()[a]), diff(pa, st.time_var()));
    for (std::size_t b = 0; b < n; ++b)
      r = Expr::sub(std::move(r),
                    Expr::mul(Expr::sym(st.derivative(st.states()[b], 1)),
                              diff(pa, st.states()[b])));
    rhs.push_back(simplify(r));
  }
  Expr d = H.det();
  if (d.is_num(0.0))
    throw SingularMatrixError("velocity Hessian is identically singular");
  return H.inverse().apply(rhs);
}

// Check lhs = rhs along solutions: accelerations are eliminated symbolically
// and the remainder sampled over (t, q, dq).
inline EquivResult onshell_el_equiv(const SymbolTable& st, const Lagrangian& lag,
                                    const Expr& lhs, const Expr& rhs,
                                    const SamplingConfig& cfg) {
  std::vector<Expr> acc = symbolic_accelerations(st, lag);
  std::map<std::string, Expr> repl;
  for (std::size_t a = 0; a < st.states().size(); ++a)
    repl[st.derivative(st.states()[a], 2)] = acc[a];
  return equiv(st, substitute(lhs, repl), substitute(rhs, repl), cfg);
}

// ------------------------------------------------------------- invariance

inline VerificationReport check_deformed_invariance(const SymbolTable& st,
                                                    const Lagrangian& lag,
                                                    const VectorField& X,
                                                    const LambdaMatrix& lam,
                                                    const SamplingConfig& cfg) {
  detail::require_order(st, lag.L, 1, "lagrangian");
  VerificationReport rep;
  auto P = deformed_prolongation(st, X, lam);
  rep.add_equiv(st, "deformed invariance", "X^(1)_Lambda L = 0", apply(st, P, lag.L),
                Expr::num(0.0), cfg);
  return rep;
}

// ------------------------------------------------------------- charges

struct ChargeResult {
  Expr P;          // phi . p
  MatrixExpr Pmat; // phi_a p_b
  VerificationReport report;
};

inline ChargeResult noether_charge(const SymbolTable& st, const Lagrangian& lag,
                                   const VectorField& X, const LambdaMatrix& lam,
                                   const SamplingConfig& cfg) {
  detail::require_order(st, lag.L, 1, "lagrangian");
  detail::validate_field(st, X);
  const std::size_t n = st.states().size();
  if (lam.n() != static_cast<int>(n))
    throw DimensionError("deformation matrix size does not match the state count");

  ChargeResult out{Expr::num(0.0), MatrixExpr(static_cast<int>(n), static_cast<int>(n)), {}};
  std::vector<Expr> p;
  for (std::size_t a = 0; a < n; ++a)
    p.push_back(simplify(diff(lag.L, st.derivative(st.states()[a], 1))));

  Expr P = Expr::num(0.0);
  for (std::size_t a = 0; a < n; ++a) {
    P = Expr::add(std::move(P), Expr::mul(X.phi[a], p[a]));
    for (std::size_t b = 0; b < n; ++b)
      out.Pmat.at(static_cast<int>(a), static_cast<int>(b)) =
          simplify(Expr::mul(X.phi[a], p[b]));
  }
  out.P = simplify(P);
  out.report.note_quantity("charge", out.P);

  out.report.add_equiv(st, "charge is the matrix trace", "P = Tr(phi_a p_b)",
                       out.Pmat.trace(), out.P, cfg);

  std::vector<Expr> gain = lam.m.apply(X.phi);
  Expr decay = total_derivative(st, out.P, st.time_var());
  for (std::size_t a = 0; a < n; ++a)
    decay = Expr::add(std::move(decay), Expr::mul(gain[a], p[a]));
  out.report.add_result("charge decay law", "D_t P = -(Lambda phi) . p",
                        onshell_el_equiv(st, lag, simplify(decay), Expr::num(0.0), cfg));

  // matrix form: trace of D_t P_ab + Lambda_ac P_cb vanishes along solutions
  Expr tr = Expr::num(0.0);
  for (std::size_t a = 0; a < n; ++a) {
    Expr entry = total_derivative(st, out.Pmat.at(static_cast<int>(a),
                                                  static_cast<int>(a)),
                                  st.time_var());
    for (std::size_t c = 0; c < n; ++c)
      entry = Expr::add(std::move(entry),
                        Expr::mul(lam.m.at(static_cast<int>(a), static_cast<int>(c)),
                                  out.Pmat.at(static_cast<int>(c), static_cast<int>(a))));
    tr = Expr::add(std::move(tr), std::move(entry));
  }
  out.report.add_result("covariant matrix decay", "Tr(D_t P + Lambda P) = 0",
                        onshell_el_equiv(st, lag, simplify(tr), Expr::num(0.0), cfg));

  // off-shell identity tying the decay to the variational equations; holds
  // exactly when the invariance condition does
  std::vector<Expr> el = euler_lagrange(st, lag);
  Expr ident = total_derivative(st, out.P, st.time_var());
  for (std::size_t a = 0; a < n; ++a) {
    ident = Expr::add(std::move(ident), Expr::mul(gain[a], p[a]));
    ident = Expr::sub(std::move(ident), Expr::mul(X.phi[a], el[a]));
  }
  out.report.add_equiv(st, "off-shell charge identity",
                       "D_t P + (Lambda phi) . p = phi . EL", simplify(ident),
                       Expr::num(0.0), cfg);
  return out;
}

// Charge matrix for a second-order Lagrangian (structure only; no on-shell
// claim is attached here).
inline ChargeResult second_order_charge(const SymbolTable& st, const Lagrangian& lag,
                                        const VectorField& X, const LambdaMatrix& lam,
                                        const SamplingConfig& cfg) {
  if (st.order() < 3)
    throw TableError("declare the table with order >= 3 for second-order charges");
  detail::require_order(st, lag.L, 2, "lagrangian");
  detail::validate_field(st, X);
  const std::size_t n = st.states().size();
  const std::string& t = st.time_var();

  ChargeResult out{Expr::num(0.0), MatrixExpr(static_cast<int>(n), static_cast<int>(n)), {}};
  std::vector<Expr> p1, p2, dp2, dhat_phi;
  std::vector<Expr> gain = lam.m.apply(X.phi);
  for (std::size_t b = 0; b < n; ++b) {
    p1.push_back(simplify(diff(lag.L, st.derivative(st.states()[b], 1))));
    p2.push_back(simplify(diff(lag.L, st.derivative(st.states()[b], 2))));
    dp2.push_back(total_derivative(st, p2.back(), t));
  }
  for (std::size_t a = 0; a < n; ++a)
    dhat_phi.push_back(
        simplify(Expr::add(total_derivative(st, X.phi[a], t), gain[a])));

  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      Expr e = Expr::mul(X.phi[a], p1[b]);
      e = Expr::add(std::move(e), Expr::mul(dhat_phi[a], p2[b]));
      e = Expr::sub(std::move(e), Expr::mul(X.phi[a], dp2[b]));
      out.Pmat.at(static_cast<int>(a), static_cast<int>(b)) = simplify(e);
    }
  out.P = out.Pmat.trace();
  out.report.note_quantity("charge", out.P);

  // independently assembled trace must agree
  Expr tr = Expr::num(0.0);
  for (std::size_t a = 0; a < n; ++a) {
    Expr term = Expr::mul(X.phi[a], p1[a]);
    term = Expr::add(std::move(term), Expr::mul(dhat_phi[a], p2[a]));
    term = Expr::sub(std::move(term), Expr::mul(X.phi[a], dp2[a]));
    tr = Expr::add(std::move(tr), std::move(term));
  }
  out.report.add_equiv(st, "trace assembly cross-check", "P = Tr(P_ab)", simplify(tr),
                       out.P, cfg);
  return out;
}

// ------------------------------------------------------------- Legendre

struct LegendreResult {
  SymbolTable phase;           // (q, p) table with canonical momentum names
  std::vector<Expr> momenta;   // p_a(q, dq, t)
  std::vector<Expr> velocity;  // dq_a(q, p, t)
  Expr H;
  VerificationReport report;
};

inline LegendreResult legendre_transform(
    const SymbolTable& st, const Lagrangian& lag, const SamplingConfig& cfg,
    std::optional<std::vector<Expr>> user_velocity = std::nullopt) {
  detail::require_order(st, lag.L, 1, "lagrangian");
  const std::size_t n = st.states().size();
  LegendreResult out{SymbolTable::phase(st.time_var(), st.states(), st.params()),
                     {},
                     {},
                     Expr::num(0.0),
                     {}};

  for (std::size_t a = 0; a < n; ++a)
    out.momenta.push_back(simplify(diff(lag.L, st.derivative(st.states()[a], 1))));

  MatrixExpr H(static_cast<int>(n), static_cast<int>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      H.at(static_cast<int>(a), static_cast<int>(b)) =
          diff(out.momenta[a], st.derivative(st.states()[b], 1));

  if (equiv_zero(st, H.det(), cfg).pass)
    throw SingularMatrixError("velocity Hessian is singular: momenta are dependent");

  if (user_velocity) {
    if (user_velocity->size() != n)
      throw DimensionError("velocity map must have one component per state");
    out.velocity = *user_velocity;
  } else {
    bool affine = true;
    for (std::size_t a = 0; a < n && affine; ++a)
      for (std::size_t b = 0; b < n && affine; ++b)
        for (std::size_t c = 0; c < n && affine; ++c)
          if (!equiv_zero(st,
                          diff(H.at(static_cast<int>(a), static_cast<int>(b)),
                               st.derivative(st.states()[c], 1)),
                          cfg)
                   .pass)
            affine = false;
    if (!affine)
      throw NonaffineMomentaError(
          "momenta are not affine in the velocities; supply the inverse velocity map");
    // p = H(q, t) dq + c(q, t)  =>  dq = H^{-1} (p - c)
    std::map<std::string, Expr> zero_vel;
    for (std::size_t a = 0; a < n; ++a)
      zero_vel[st.derivative(st.states()[a], 1)] = Expr::num(0.0);
    std::vector<Expr> pc;
    for (std::size_t a = 0; a < n; ++a)
      pc.push_back(simplify(Expr::sub(Expr::sym(out.phase.p_names()[a]),
                                      substitute(out.momenta[a], zero_vel))));
    out.velocity = H.inverse().apply(pc);
  }

  for (const auto& v : out.velocity)
    for (const auto& s : free_symbols(v))
      if (!out.phase.knows(s))
        throw UnknownSymbolError(s);

  std::map<std::string, Expr> vel_map, mom_map;
  for (std::size_t a = 0; a < n; ++a) {
    vel_map[st.derivative(st.states()[a], 1)] = out.velocity[a];
    mom_map[out.phase.p_names()[a]] = out.momenta[a];
  }
  for (std::size_t a = 0; a < n; ++a) {
    out.report.add_equiv(out.phase, "momentum round trip [" + out.phase.p_names()[a] + "]",
                         "p_a(q, dq(q, p)) = p_a",
                         simplify(substitute(out.momenta[a], vel_map)),
                         Expr::sym(out.phase.p_names()[a]), cfg);
    out.report.add_equiv(st, "velocity round trip [" + st.derivative(st.states()[a], 1) + "]",
                         "dq_a(q, p(q, dq)) = dq_a",
                         simplify(substitute(out.velocity[a], mom_map)),
                         Expr::sym(st.derivative(st.states()[a], 1)), cfg);
  }

  Expr h = Expr::num(0.0);
  for (std::size_t a = 0; a < n; ++a)
    h = Expr::add(std::move(h),
                  Expr::mul(Expr::sym(out.phase.p_names()[a]), out.velocity[a]));
  h = Expr::sub(std::move(h), substitute(lag.L, vel_map));
  out.H = simplify(h);
  out.report.note_quantity("hamiltonian", out.H);
  return out;
}

// ------------------------------------------------------------- phase lift

// Lift (phi, Lambda) to the phase field (phi, psi):
//   psi_a = -(dLambda_bc/d dq_a)|_vel phi_c p_b - p_b dphi_b/dq_a
// (first term only when the deformation depends on the velocities).
inline std::vector<Expr> lift_field(const SymbolTable& st, const VectorField& X,
                                    const LambdaMatrix& lam, const LegendreResult& leg) {
  detail::validate_field(st, X);
  const std::size_t n = st.states().size();
  std::map<std::string, Expr> vel_map;
  for (std::size_t a = 0; a < n; ++a)
    vel_map[st.derivative(st.states()[a], 1)] = leg.velocity[a];

  std::vector<Expr> out = X.phi;  // phi(q, t) reads unchanged on phase space
  for (std::size_t a = 0; a < n; ++a) {
    Expr psi = Expr::num(0.0);
    for (std::size_t b = 0; b < n; ++b) {
      Expr pb = Expr::sym(leg.phase.p_names()[b]);
      for (std::size_t c = 0; c < n; ++c) {
        Expr dl = diff(lam.m.at(static_cast<int>(b), static_cast<int>(c)),
                       st.derivative(st.states()[a], 1));
        if (dl.is_num(0.0)) continue;
        psi = Expr::sub(std::move(psi),
                        Expr::mul(Expr::mul(substitute(dl, vel_map), X.phi[c]), pb));
      }
      psi = Expr::sub(std::move(psi), Expr::mul(pb, diff(X.phi[b], st.states()[a])));
    }
    out.push_back(simplify(psi));
  }
  return out;
}

// Assemble the phase-space deformation acting on (phi, psi): upper-left is
// the configuration deformation with velocities eliminated, lower-left is
// -(d Lambda_bc / d q_a) p_c (the jet-coordinate partial taken before the
// velocity substitution), upper-right vanishes, and the lower-right block is
// a candidate to be verified: the compatibility constraint
//   sum_b [ L2_ab dphi_c/dq_b - Lambda_cb dphi_b/dq_a ] = 0
// admits more than one solution, so a supplied block is checked, never derived.
struct PhaseDeformationResult {
  LambdaMatrix lam;
  bool defaulted_lower_right = false;
  VerificationReport report;
};

inline PhaseDeformationResult assemble_phase_deformation(
    const SymbolTable& st, const VectorField& X, const LambdaMatrix& lam,
    const LegendreResult& leg, std::optional<MatrixExpr> lower_right,
    const SamplingConfig& cfg) {
  const std::size_t n = st.states().size();
  std::map<std::string, Expr> vel_map;
  for (std::size_t a = 0; a < n; ++a)
    vel_map[st.derivative(st.states()[a], 1)] = leg.velocity[a];

  MatrixExpr M(static_cast<int>(2 * n), static_cast<int>(2 * n));
  MatrixExpr UL(static_cast<int>(n), static_cast<int>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      UL.at(static_cast<int>(a), static_cast<int>(b)) = simplify(substitute(
          lam.m.at(static_cast<int>(a), static_cast<int>(b)), vel_map));

  PhaseDeformationResult out;
  MatrixExpr LR(static_cast<int>(n), static_cast<int>(n));
  if (lower_right) {
    if (lower_right->rows() != static_cast<int>(n) ||
        lower_right->cols() != static_cast<int>(n))
      throw DimensionError("lower-right deformation block has the wrong shape");
    LR = lower_right->map([&](const Expr& e) { return simplify(substitute(e, vel_map)); });
  } else {
    LR = UL;
    out.defaulted_lower_right = true;
    out.report.add("lower-right block", "candidate = upper-left block", Verdict::Skipped)
        .detail = "no block supplied; trying the upper-left block (not unique)";
  }

  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      M.at(static_cast<int>(a), static_cast<int>(b)) = UL.at(static_cast<int>(a),
                                                             static_cast<int>(b));
      M.at(static_cast<int>(n + a), static_cast<int>(n + b)) =
          LR.at(static_cast<int>(a), static_cast<int>(b));
      // lower-left: -(sum_c d Lambda_bc / d q_a p_c), then velocities out
      Expr e = Expr::num(0.0);
      for (std::size_t c = 0; c < n; ++c)
        e = Expr::sub(std::move(e),
                      Expr::mul(diff(lam.m.at(static_cast<int>(b), static_cast<int>(c)),
                                     st.states()[a]),
                                Expr::sym(leg.phase.p_names()[c])));
      M.at(static_cast<int>(n + a), static_cast<int>(b)) =
          simplify(substitute(e, vel_map));
    }

  // verify the lower-right candidate against the constraint
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = 0; c < n; ++c) {
      Expr lhs = Expr::num(0.0), rhs = Expr::num(0.0);
      for (std::size_t b = 0; b < n; ++b) {
        lhs = Expr::add(std::move(lhs),
                        Expr::mul(LR.at(static_cast<int>(a), static_cast<int>(b)),
                                  diff(X.phi[c], st.states()[b])));
        rhs = Expr::add(std::move(rhs),
                        Expr::mul(UL.at(static_cast<int>(c), static_cast<int>(b)),
                                  diff(X.phi[b], st.states()[a])));
      }
      out.report.add_equiv(leg.phase,
                           "lower-right constraint [" + std::to_string(a + 1) + "," +
                               std::to_string(c + 1) + "]",
                           "L2 dphi/dq = Lambda dphi/dq (paired indices)",
                           simplify(lhs), simplify(rhs), cfg);
    }
  out.lam = LambdaMatrix::full(M.simplified());
  return out;
}

// ------------------------------------------------------------- full pipeline

struct LiftPipelineResult {
  std::optional<LegendreResult> leg;
  std::optional<HamiltonianSystem> hs;
  std::vector<Expr> Phi;          // lifted field (phi, psi)
  std::optional<LambdaMatrix> phase_lam;
  std::optional<Expr> G;          // generating function when one exists
  std::optional<Expr> S;          // divergence otherwise (and alongside)
  bool velocity_dependent = false;
  VerificationReport report;
};

inline LiftPipelineResult run_lift_pipeline(const SymbolTable& st, const Lagrangian& lag,
                                            const VectorField& X, const LambdaMatrix& lam,
                                            std::optional<MatrixExpr> lower_right,
                                            const SamplingConfig& cfg) {
  LiftPipelineResult out;
  out.report.absorb(check_deformed_invariance(st, lag, X, lam, cfg), "invariance");
  if (!out.report.overall()) return out;

  out.leg = legendre_transform(st, lag, cfg);
  out.report.absorb(out.leg->report, "legendre");
  const SymbolTable& ph = out.leg->phase;

  out.hs = HamiltonianSystem{out.leg->H};
  out.Phi = lift_field(st, X, lam, *out.leg);
  const std::size_t n = st.states().size();
  for (std::size_t a = 0; a < n; ++a)
    out.report.note_quantity("lifted component [" + ph.p_names()[a] + "]",
                             out.Phi[n + a]);

  for (std::size_t a = 0; a < n && !out.velocity_dependent; ++a)
    for (int i = 0; i < lam.m.rows() && !out.velocity_dependent; ++i)
      for (int j = 0; j < lam.m.cols() && !out.velocity_dependent; ++j)
        if (!diff(lam.m.at(i, j), st.derivative(st.states()[a], 1)).is_num(0.0))
          out.velocity_dependent = true;

  auto pd = assemble_phase_deformation(st, X, lam, *out.leg, std::move(lower_right), cfg);
  out.phase_lam = pd.lam;
  out.report.absorb(pd.report, "phase deformation");

  DynamicalSystem flow{hamilton_equations(ph, *out.hs)};
  VectorField Xp{out.Phi, std::nullopt};
  out.report.absorb(check_deformed_symmetry(ph, flow, Xp, *out.phase_lam, cfg),
                    "canonical flow");

  // generating function if the field admits one; the divergence law otherwise
  // (and in any case, since it holds in both situations)
  GeneratingFunctionResult gf;
  bool unsupported = false;
  try {
    gf = find_generating_function(ph, out.Phi, cfg);
  } catch (const ReconstructionUnsupportedError& e) {
    unsupported = true;
    out.report.add_skip("generating function", "Phi = J grad G", e.what());
  }
  if (gf.G) {
    // shift so the function matches phi . p on the nose when that quantity is
    // time independent (both satisfy the same gradient conditions)
    Expr pp = Expr::num(0.0);
    for (std::size_t a = 0; a < n; ++a)
      pp = Expr::add(std::move(pp),
                     Expr::mul(X.phi[a], Expr::sym(ph.p_names()[a])));
    pp = simplify(pp);
    Expr G = *gf.G;
    if (!free_symbols(pp).count(ph.time_var())) {
      std::map<std::string, double> base;
      for (const auto& s : ph.states()) {
        auto [lo, hi] = cfg.range(s);
        base[s] = 0.5 * (lo + hi);
      }
      G = simplify(Expr::add(G, Expr::num(eval(pp, ph.with_params(base)))));
    }
    out.G = G;
    out.report.absorb(gf.report, "generating function");
    out.report.add_equiv(ph, "generating function is the charge", "G = phi . p", G, pp,
                         cfg);
    out.report.note_quantity("generating function", G);
    out.report.absorb(
        check_gradient_deviation(ph, *out.hs, out.Phi, *out.phase_lam, G, cfg),
        "gradient law");
  } else if (!unsupported) {
    if (out.velocity_dependent) {
      auto& rec = out.report.add("generating function", "Phi = J grad G", Verdict::Pass);
      rec.detail = "none exists (gradient candidate not closed at [" + gf.asym_a + "," +
                   gf.asym_b + "]); expected for a velocity-dependent deformation";
    } else {
      out.report.absorb(gf.report, "generating function");
    }
  }

  auto dv = check_divergence_deviation(ph, *out.hs, out.Phi, *out.phase_lam, cfg);
  out.S = divergence(ph, out.Phi);
  out.report.absorb(dv, "divergence law");
  return out;
}

// ------------------------------------------------------------- reduction

struct ReductionInput {
  std::vector<std::string> w_names;
  std::vector<Expr> w;       // invariant coordinates over (q, t)
  std::string zeta_name = "zeta";
  Expr zeta;                 // invariant first-order quantity over (q, dq, t)
  std::string Ltilde_text;   // Lagrangian over (w, dw, zeta, t)
};

struct PartialReductionResult {
  SymbolTable reduced_table;
  Expr Ltilde;
  Expr reduced_equation;  // E(q, dq, t) with E = 0 the reduced dynamics
  bool degenerate = false;
  VerificationReport report;
};

inline PartialReductionResult reduce_by_invariants(const SymbolTable& st,
                                                   const Lagrangian& lag,
                                                   const VectorField& X,
                                                   const LambdaMatrix& lam,
                                                   const ReductionInput& in,
                                                   const SamplingConfig& cfg) {
  detail::require_order(st, lag.L, 1, "lagrangian");
  if (in.w.size() != in.w_names.size())
    throw DimensionError("invariant name/expression count mismatch");
  for (const auto& w : in.w) detail::require_order(st, w, 0, "invariant coordinate");
  detail::require_order(st, in.zeta, 1, "invariant quantity");

  std::vector<std::string> names = in.w_names;
  names.push_back(in.zeta_name);
  PartialReductionResult out{SymbolTable::ode(st.time_var(), names, 1, st.params()),
                             Expr::num(0.0), Expr::num(0.0), false, {}};
  out.Ltilde = parse(in.Ltilde_text, out.reduced_table);
  std::string dzeta = out.reduced_table.derivative(in.zeta_name, 1);
  if (free_symbols(out.Ltilde).count(dzeta))
    throw DimensionError("the reduced Lagrangian must not differentiate " + in.zeta_name);

  // substitution rules from reduced to original coordinates
  std::map<std::string, Expr> defs;
  for (std::size_t j = 0; j < in.w.size(); ++j) {
    defs[in.w_names[j]] = in.w[j];
    defs[out.reduced_table.derivative(in.w_names[j], 1)] =
        total_derivative(st, in.w[j], st.time_var());
  }
  defs[in.zeta_name] = in.zeta;

  auto P = deformed_prolongation(st, X, lam);

  // the deformation must act as a scalar on the field for this reduction
  int pivot = -1;
  for (std::size_t a = 0; a < X.phi.size(); ++a)
    if (!equiv_zero(st, X.phi[a], cfg).pass) {
      pivot = static_cast<int>(a);
      break;
    }
  if (pivot < 0) throw DimensionError("the symmetry field is identically zero");
  std::vector<Expr> gain = lam.m.apply(X.phi);
  Expr scale = simplify(Expr::div(gain[static_cast<std::size_t>(pivot)],
                                  X.phi[static_cast<std::size_t>(pivot)]));
  for (std::size_t a = 0; a < X.phi.size(); ++a)
    out.report.add_equiv(st, "scalar deformation [" + st.states()[a] + "]",
                         "(Lambda phi)_a = lambda phi_a", gain[a],
                         simplify(Expr::mul(scale, X.phi[a])), cfg);

  // all declared building blocks must be invariants of the deformed field
  for (std::size_t j = 0; j < in.w.size(); ++j) {
    out.report.add_equiv(st, "invariant [" + in.w_names[j] + "]", "X^(1)_Lambda w = 0",
                         apply(st, P, in.w[j]), Expr::num(0.0), cfg);
    out.report.add_equiv(st, "invariant [d" + in.w_names[j] + "]",
                         "X^(1)_Lambda D_t w = 0",
                         apply(st, P, total_derivative(st, in.w[j], st.time_var())),
                         Expr::num(0.0), cfg);
  }
  out.report.add_equiv(st, "invariant [" + in.zeta_name + "]", "X^(1)_Lambda zeta = 0",
                       apply(st, P, in.zeta), Expr::num(0.0), cfg);

  out.report.add_equiv(st, "reduced form rewrites to the Lagrangian",
                       "Ltilde(w, dw, zeta) = L", simplify(substitute(out.Ltilde, defs)),
                       lag.L, cfg);

  Expr dLdz = diff(out.Ltilde, in.zeta_name);
  if (equiv_zero(out.reduced_table, dLdz, cfg).pass) {
    out.degenerate = true;
    out.reduced_equation = Expr::num(0.0);
    out.report.add("reduced equation", "d Ltilde / d zeta = 0", Verdict::Skipped)
        .detail = "the reduced Lagrangian does not involve " + in.zeta_name +
                  ": the equation degenerates to 0 = 0";
  } else {
    out.reduced_equation = simplify(substitute(dLdz, defs));
    out.report.note_quantity("reduced equation", out.reduced_equation);
  }
  return out;
}

}  // namespace lamsym
