#pragma once
// Hamiltonian side: canonical equations, the symplectic pairing, generating
// functions for phase-space vector fields, and the two deviation laws obeyed
// by deformed symmetries.
//
// Conventions on a phase table (q_1..q_n, p_1..p_n):
//   J = [[0, I], [-I, 0]];  canonical flow  f = (dH/dp, -dH/dq).
//   A field Phi = (phi, psi) has a generating function G when Phi = J grad G,
//   i.e. grad G = (-psi, phi); then phi = grad_p G, psi = -grad_q G.
//   Deviation laws (deformation entries evaluated along the flow first):
//     grad(D_t G) = J Lambda Phi                   (gradient form)
//     D_t S = -div(Lambda Phi), S = div Phi        (divergence form)

#include <optional>
#include <string>
#include <vector>

#include "dynsys.hpp"

namespace lamsym {

struct ReconstructionUnsupportedError : Error {
  using Error::Error;
};

struct HamiltonianSystem {
  Expr H;  // over a phase table
};

namespace detail {

inline void require_phase(const SymbolTable& st) {
  if (!st.is_phase()) throw DimensionError("phase-space table required");
}

}  // namespace detail

inline std::vector<Expr> hamilton_equations(const SymbolTable& st,
                                            const HamiltonianSystem& hs) {
  detail::require_phase(st);
  detail::require_first_jet_free(st, hs.H, "hamiltonian");
  std::vector<Expr> f;
  for (const auto& p : st.p_names()) f.push_back(diff(hs.H, p));
  for (const auto& q : st.q_names()) f.push_back(simplify(Expr::neg(diff(hs.H, q))));
  return f;
}

// J v for v = (top, bottom): (bottom, -top).
inline std::vector<Expr> symplectic_apply(const std::vector<Expr>& v) {
  if (v.size() % 2 != 0) throw DimensionError("symplectic pairing needs an even size");
  const std::size_t n = v.size() / 2;
  std::vector<Expr> out;
  out.reserve(v.size());
  for (std::size_t a = 0; a < n; ++a) out.push_back(v[n + a]);
  for (std::size_t a = 0; a < n; ++a) out.push_back(simplify(Expr::neg(v[a])));
  return out;
}

inline MatrixExpr symplectic_matrix(int n) {
  MatrixExpr J(2 * n, 2 * n);
  for (int a = 0; a < n; ++a) {
    J.at(a, n + a) = Expr::num(1.0);
    J.at(n + a, a) = Expr::num(-1.0);
  }
  return J;
}

// Total time derivative of a phase function along the canonical flow.
inline Expr flow_derivative(const SymbolTable& st, const HamiltonianSystem& hs,
                            const Expr& g) {
  detail::require_phase(st);
  detail::require_first_jet_free(st, g, "phase function");
  std::vector<Expr> f = hamilton_equations(st, hs);
  Expr acc = diff(g, st.time_var());
  for (std::size_t a = 0; a < st.states().size(); ++a)
    acc = Expr::add(std::move(acc), Expr::mul(f[a], diff(g, st.states()[a])));
  return simplify(acc);
}

inline Expr divergence(const SymbolTable& st, const std::vector<Expr>& v) {
  if (v.size() != st.states().size())
    throw DimensionError("divergence needs one component per state");
  Expr acc = Expr::num(0.0);
  for (std::size_t a = 0; a < v.size(); ++a)
    acc = Expr::add(std::move(acc), diff(v[a], st.states()[a]));
  return simplify(acc);
}

// ------------------------------------------------- generating function

struct GeneratingFunctionResult {
  std::optional<Expr> G;  // fixed to vanish at the box-center base point
  VerificationReport report;
  // set when the symmetry test failed: the witnessing pair of coordinates
  std::string asym_a, asym_b;
};

// Reconstruct G with Phi = J grad G by line integration along coordinate
// segments from the box-center base point.  The Jacobian of V = -J Phi must
// be symmetric for G to exist; a failed pair is reported with a witness.
inline GeneratingFunctionResult find_generating_function(const SymbolTable& st,
                                                         const std::vector<Expr>& Phi,
                                                         const SamplingConfig& cfg) {
  detail::require_phase(st);
  if (Phi.size() != st.states().size())
    throw DimensionError("phase field must have one component per state");
  for (const auto& c : Phi) detail::require_first_jet_free(st, c, "phase field component");
  const std::size_t n2 = Phi.size();
  const std::size_t n = n2 / 2;

  GeneratingFunctionResult out;

  // V = grad G candidate = (-psi, phi)
  std::vector<Expr> V;
  for (std::size_t a = 0; a < n; ++a) V.push_back(simplify(Expr::neg(Phi[n + a])));
  for (std::size_t a = 0; a < n; ++a) V.push_back(Phi[a]);

  bool symmetric = true;
  for (std::size_t a = 0; a < n2; ++a) {
    for (std::size_t b = a + 1; b < n2; ++b) {
      auto er = equiv(st, diff(V[a], st.states()[b]), diff(V[b], st.states()[a]), cfg);
      if (!er.pass) {
        symmetric = false;
        auto& rec = out.report.add_result(
            "gradient symmetry [" + st.states()[a] + "," + st.states()[b] + "]",
            "d V_a / du_b = d V_b / du_a", er);
        rec.detail = "no generating function: candidate gradient is not closed";
        if (out.asym_a.empty()) {
          out.asym_a = st.states()[a];
          out.asym_b = st.states()[b];
        }
      }
    }
  }
  if (!symmetric) return out;
  out.report.add("gradient symmetry", "d V_a / du_b = d V_b / du_a", Verdict::Pass);

  // line integration from the box-center base point
  std::map<std::string, Expr> fixed;
  std::vector<double> base(n2, 0.0);
  for (std::size_t a = 0; a < n2; ++a) {
    auto [lo, hi] = cfg.range(st.states()[a]);
    base[a] = 0.5 * (lo + hi);
  }
  Expr G = Expr::num(0.0);
  for (std::size_t k = 0; k < n2; ++k) {
    // V_k with coordinates k+1.. frozen at the base point
    std::map<std::string, Expr> freeze;
    for (std::size_t j = k + 1; j < n2; ++j)
      freeze[st.states()[j]] = Expr::num(base[j]);
    Expr integrand = simplify(substitute(V[k], freeze));
    auto F = antiderivative(integrand, st.states()[k]);
    if (!F)
      throw ReconstructionUnsupportedError(
          "cannot integrate component '" + print(integrand) + "' along " +
          st.states()[k]);
    Expr at_base = substitute(*F, {{st.states()[k], Expr::num(base[k])}});
    G = Expr::add(std::move(G), Expr::sub(*F, std::move(at_base)));
  }
  G = simplify(G);

  // round trip: the reconstructed G must reproduce the field
  for (std::size_t a = 0; a < n; ++a) {
    out.report.add_equiv(st, "field from gradient [" + st.p_names()[a] + "]",
                         "dG/dp_a = phi_a", diff(G, st.p_names()[a]), Phi[a], cfg);
    out.report.add_equiv(st, "field from gradient [" + st.q_names()[a] + "]",
                         "-dG/dq_a = psi_a", simplify(Expr::neg(diff(G, st.q_names()[a]))),
                         Phi[n + a], cfg);
  }
  if (out.report.overall()) out.G = G;
  return out;
}

// ------------------------------------------------- deviation laws

// gradient form: grad(D_t G) = J Lambda Phi with Lambda evaluated along the
// flow before anything else.
inline VerificationReport check_gradient_deviation(const SymbolTable& st,
                                                   const HamiltonianSystem& hs,
                                                   const std::vector<Expr>& Phi,
                                                   const LambdaMatrix& lam, const Expr& G,
                                                   const SamplingConfig& cfg) {
  detail::require_phase(st);
  if (lam.n() != static_cast<int>(st.states().size()))
    throw DimensionError("deformation matrix must act on the full phase space");
  VerificationReport rep;
  std::vector<Expr> f = hamilton_equations(st, hs);
  MatrixExpr lam_on = detail::onshell_matrix(st, lam.m, f);
  std::vector<Expr> rhs = symplectic_apply(lam_on.apply(Phi));
  Expr dg = flow_derivative(st, hs, G);
  for (std::size_t a = 0; a < st.states().size(); ++a)
    rep.add_equiv(st, "gradient deviation [" + st.states()[a] + "]",
                  "grad(D_t G) = J Lambda Phi", diff(dg, st.states()[a]), rhs[a], cfg);
  return rep;
}

// divergence form: D_t S = -div(Lambda Phi), with the same along-the-flow
// convention; the substitution happens before the divergence is taken.
inline VerificationReport check_divergence_deviation(const SymbolTable& st,
                                                     const HamiltonianSystem& hs,
                                                     const std::vector<Expr>& Phi,
                                                     const LambdaMatrix& lam,
                                                     const SamplingConfig& cfg) {
  detail::require_phase(st);
  VerificationReport rep;
  std::vector<Expr> f = hamilton_equations(st, hs);
  Expr S = divergence(st, Phi);
  rep.note_quantity("field divergence", S);
  MatrixExpr lam_on = detail::onshell_matrix(st, lam.m, f);
  std::vector<Expr> lphi = lam_on.apply(Phi);
  Expr rhs = simplify(Expr::neg(divergence(st, lphi)));
  rep.add_equiv(st, "divergence deviation", "D_t S = -div(Lambda Phi)",
                flow_derivative(st, hs, S), rhs, cfg);
  return rep;
}

// ------------------------------------------------- separated evolution

// Verify that D_t G = gamma(t, G) for a user-supplied gamma written over the
// restricted vocabulary {time, value slot, parameters}.  A gamma that smuggles
// in other coordinates is rejected by name.
inline VerificationReport check_separated_evolution(const SymbolTable& st,
                                                    const HamiltonianSystem& hs,
                                                    const Expr& G,
                                                    const std::string& gamma_text,
                                                    const SamplingConfig& cfg,
                                                    const std::string& slot = "Gval") {
  detail::require_phase(st);
  VerificationReport rep;
  SymbolTable restricted = SymbolTable::ode(st.time_var(), {slot}, 0, st.params());
  Expr gamma;
  try {
    gamma = parse(gamma_text, restricted);
  } catch (const UnknownSymbolError& e) {
    auto& rec = rep.add("separated evolution", "D_t G = gamma(t, G)", Verdict::Fail);
    rec.detail = "gamma must be a function of t and " + slot + " only; found '" +
                 e.symbol + "'";
    return rep;
  }
  Expr lhs = flow_derivative(st, hs, G);
  Expr rhs = substitute(gamma, {{slot, G}});
  rep.add_equiv(st, "separated evolution", "D_t G = gamma(t, G)", lhs, simplify(rhs),
                cfg);
  return rep;
}

}  // namespace lamsym
