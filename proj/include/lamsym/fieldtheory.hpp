#pragma once
// Deformed symmetries of first-order field Lagrangians.
//
// A deformation here is one matrix per independent variable.  The machinery
// covers:
//  - the zero-curvature compatibility of the deformation matrices
//  - the deformed prolongation coefficients and invariance of the density
//  - current matrices and the on-shell conservation law, with the on-shell
//    projection done by eliminating one pure second derivative per equation
//    of motion (they enter affinely)
//  - an integrating factor Gamma with D_i Gamma = Gamma Lambda_i, the
//    off-shell factorized divergence identity, and the gauge-equivalent
//    ordinary symmetry it produces
//
// Vertical fields act on the dependent variables only.  A motion of the
// independent variables (xi) is supported for a single dependent variable,
// where the invariance condition picks up the density terms
// L sum_i D_i xi_i + L sum_i lambda_i xi_i.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prolong.hpp"
#include "report.hpp"

namespace lamsym {

struct FieldVectorField {
  std::vector<Expr> phi;                       // one per dependent variable
  std::optional<std::vector<Expr>> xi;         // one per independent variable
};

namespace detail {

inline void validate_field_symmetry(const SymbolTable& st, const FieldVectorField& X) {
  if (st.mode() != SymbolTable::Mode::Field)
    throw TableError("field symmetries need a field-mode table");
  if (X.phi.size() != st.states().size())
    throw DimensionError("vector field must have one component per dependent variable");
  for (const auto& c : X.phi) require_first_jet_free(st, c, "vector field component");
  if (X.xi) {
    if (st.states().size() != 1)
      throw DimensionError(
          "moving the independent variables is supported for one dependent variable");
    if (X.xi->size() != st.indep_vars().size())
      throw DimensionError("xi must have one component per independent variable");
    for (const auto& c : *X.xi) require_first_jet_free(st, c, "xi component");
  }
}

inline void validate_deformation(const SymbolTable& st,
                                 const std::vector<MatrixExpr>& lams) {
  const int n = static_cast<int>(st.states().size());
  if (lams.size() != st.indep_vars().size())
    throw DimensionError("one deformation matrix per independent variable expected");
  for (const auto& m : lams) {
    if (m.rows() != n || m.cols() != n)
      throw DimensionError("deformation matrix size does not match the field count");
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        require_first_jet_free(st, m.at(a, b), "deformation entry", 1);
  }
}

inline MatrixExpr total_derivative(const SymbolTable& st, const MatrixExpr& m,
                                   const std::string& wrt) {
  return m.map([&](const Expr& e) { return lamsym::total_derivative(st, e, wrt); });
}

}  // namespace detail

// ----------------------------------------------------------- compatibility

inline VerificationReport check_compatibility(const SymbolTable& st,
                                              const std::vector<MatrixExpr>& lams,
                                              const SamplingConfig& cfg) {
  detail::validate_deformation(st, lams);
  VerificationReport rep;
  const auto& xs = st.indep_vars();
  for (std::size_t i = 0; i < lams.size(); ++i)
    for (std::size_t j = i + 1; j < lams.size(); ++j) {
      MatrixExpr curv = detail::total_derivative(st, lams[j], xs[i]) -
                        detail::total_derivative(st, lams[i], xs[j]) +
                        lams[i] * lams[j] - lams[j] * lams[i];
      for (int a = 0; a < curv.rows(); ++a)
        for (int b = 0; b < curv.cols(); ++b)
          rep.add_equiv(st,
                        "compatibility [" + xs[i] + "," + xs[j] + "] (" +
                            std::to_string(a + 1) + "," + std::to_string(b + 1) + ")",
                        "D_i Lambda_j - D_j Lambda_i + [Lambda_i, Lambda_j] = 0",
                        curv.at(a, b), Expr::num(0.0), cfg);
    }
  return rep;
}

// ----------------------------------------------------------- prolongation

// Coefficient of d/du_{a,i} in the deformed first prolongation.
inline std::vector<std::vector<Expr>> deformed_field_prolongation(
    const SymbolTable& st, const FieldVectorField& X,
    const std::vector<MatrixExpr>& lams) {
  detail::validate_field_symmetry(st, X);
  detail::validate_deformation(st, lams);
  const auto& xs = st.indep_vars();
  const auto& us = st.states();
  const std::size_t n = us.size();

  // Q_a = phi_a - sum_j xi_j u_{a,j}
  std::vector<Expr> Q = X.phi;
  if (X.xi)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t j = 0; j < xs.size(); ++j)
        Q[a] = Expr::sub(std::move(Q[a]),
                         Expr::mul((*X.xi)[j], Expr::sym(st.field_derivative(
                                                   us[a], {static_cast<int>(j)}))));

  std::vector<std::vector<Expr>> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<Expr> gain = lams[i].apply(Q);
    for (std::size_t a = 0; a < n; ++a) {
      Expr c = total_derivative(st, X.phi[a], xs[i]);
      if (X.xi)
        for (std::size_t j = 0; j < xs.size(); ++j)
          c = Expr::sub(std::move(c),
                        Expr::mul(Expr::sym(st.field_derivative(
                                      us[a], {static_cast<int>(j)})),
                                  total_derivative(st, (*X.xi)[j], xs[i])));
      out[i].push_back(simplify(Expr::add(std::move(c), gain[a])));
    }
  }
  return out;
}

// ----------------------------------------------------------- invariance

inline Expr deformed_field_invariance_residual(const SymbolTable& st, const Expr& L,
                                               const std::vector<MatrixExpr>& lams,
                                               const FieldVectorField& X) {
  detail::require_first_jet_free(st, L, "lagrangian density", 1);
  auto Psi = deformed_field_prolongation(st, X, lams);
  const auto& xs = st.indep_vars();
  const auto& us = st.states();

  Expr r = Expr::num(0.0);
  for (std::size_t a = 0; a < us.size(); ++a) {
    r = Expr::add(std::move(r), Expr::mul(X.phi[a], diff(L, us[a])));
    for (std::size_t i = 0; i < xs.size(); ++i)
      r = Expr::add(std::move(r),
                    Expr::mul(Psi[i][a],
                              diff(L, st.field_derivative(us[a],
                                                          {static_cast<int>(i)}))));
  }
  if (X.xi)
    for (std::size_t i = 0; i < xs.size(); ++i) {
      r = Expr::add(std::move(r), Expr::mul((*X.xi)[i], diff(L, xs[i])));
      // density terms: L (D_i xi_i + lambda_i xi_i)
      r = Expr::add(std::move(r),
                    Expr::mul(L, total_derivative(st, (*X.xi)[i], xs[i])));
      r = Expr::add(std::move(r),
                    Expr::mul(L, Expr::mul(lams[i].at(0, 0), (*X.xi)[i])));
    }
  return simplify(r);
}

inline VerificationReport check_deformed_field_invariance(
    const SymbolTable& st, const Expr& L, const FieldVectorField& X,
    const std::vector<MatrixExpr>& lams, const SamplingConfig& cfg) {
  VerificationReport rep;
  rep.add_equiv(st, "deformed invariance",
                X.xi ? "X^(1)_Lambda L + L (div xi + lambda . xi) = 0"
                     : "X^(1)_Lambda L = 0",
                deformed_field_invariance_residual(st, L, lams, X), Expr::num(0.0),
                cfg);
  return rep;
}

// ----------------------------------------------------------- equations of motion

inline std::vector<Expr> field_euler_lagrange(const SymbolTable& st, const Expr& L) {
  if (st.mode() != SymbolTable::Mode::Field)
    throw TableError("field equations need a field-mode table");
  if (st.order() < 2)
    throw TableError("declare the table with order >= 2 for variational equations");
  detail::require_first_jet_free(st, L, "lagrangian density", 1);
  std::vector<Expr> out;
  const auto& xs = st.indep_vars();
  for (const auto& u : st.states()) {
    Expr e = Expr::neg(diff(L, u));
    for (std::size_t i = 0; i < xs.size(); ++i)
      e = Expr::add(
          std::move(e),
          total_derivative(
              st, diff(L, st.field_derivative(u, {static_cast<int>(i)})), xs[i]));
    out.push_back(simplify(e));
  }
  return out;
}

// Check that an expression vanishes along solutions.  The equations of motion
// are affine in the second derivatives, so one pure second derivative per
// equation is eliminated numerically at each sample; everything else is drawn
// from the sampling box.
inline EquivResult el_projected_zero(const SymbolTable& st, const Expr& L,
                                     const Expr& R, const SamplingConfig& cfg,
                                     double tol = 1e-8) {
  std::vector<Expr> els = field_euler_lagrange(st, L);
  const auto& us = st.states();
  const std::size_t n = us.size();
  const std::size_t s = st.indep_vars().size();

  std::vector<Expr> all = els;
  all.push_back(R);
  std::vector<std::string> vars = sampled_variables(st, all);
  PointSource probe_src(vars, cfg);
  auto probe = st.with_params(probe_src.point(0, 0));

  // pivot selection: newest fields and directions first
  std::vector<std::string> pivots;
  std::set<std::string> taken;
  for (std::size_t a = 0; a < n; ++a) {
    bool found = false;
    for (std::size_t b = n; b-- > 0 && !found;) {
      for (std::size_t i = s; i-- > 0 && !found;) {
        std::string cand = st.field_derivative(
            us[b], {static_cast<int>(i), static_cast<int>(i)});
        if (taken.count(cand)) continue;
        double c = eval(diff(els[a], cand), probe);
        if (std::isfinite(c) && std::fabs(c) > 1e-8) {
          pivots.push_back(cand);
          taken.insert(cand);
          found = true;
        }
      }
    }
    if (!found)
      throw DimensionError("no second derivative to eliminate in the equation for " +
                           us[a]);
  }

  // coefficients of the affine system, fixed once
  std::vector<std::vector<Expr>> coef(n, std::vector<Expr>(n, Expr::num(0.0)));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) coef[a][b] = diff(els[a], pivots[b]);

  std::vector<std::string> free_vars;
  for (const auto& v : vars)
    if (!taken.count(v)) free_vars.push_back(v);
  PointSource src(free_vars, cfg);

  EquivResult res;
  double worst = -1.0;
  for (int k = 0; k < cfg.samples; ++k) {
    double r = 0.0;
    std::map<std::string, double> pt;
    bool accepted = false;
    for (int attempt = 0; attempt <= cfg.max_retries && !accepted; ++attempt) {
      pt = src.point(static_cast<std::uint64_t>(k), attempt);
      auto env = st.with_params(pt);
      for (const auto& p : pivots) env[p] = 0.0;
      std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
      std::vector<double> rhs(n, 0.0);
      bool finite = true;
      for (std::size_t a = 0; a < n && finite; ++a) {
        rhs[a] = -eval(els[a], env);
        if (!std::isfinite(rhs[a])) finite = false;
        for (std::size_t b = 0; b < n && finite; ++b) {
          A[a][b] = eval(coef[a][b], env);
          if (!std::isfinite(A[a][b])) finite = false;
        }
      }
      if (!finite) continue;
      auto sol = solve_linear(A, rhs);
      if (!sol) continue;
      for (std::size_t b = 0; b < n; ++b) env[pivots[b]] = (*sol)[b];
      r = eval(R, env);
      if (!std::isfinite(r)) continue;
      accepted = true;
      for (std::size_t b = 0; b < n; ++b) pt[pivots[b]] = (*sol)[b];
    }
    if (!accepted)
      throw DomainExhaustedError(
          "could not solve the equations of motion at any sampled point (sample " +
          std::to_string(k) + ", " + std::to_string(cfg.max_retries) + " retries)");
    ++res.samples_used;
    double d = std::fabs(r);
    res.max_abs_diff = std::max(res.max_abs_diff, d);
    if (d > tol) {
      res.pass = false;
      if (d > worst) {
        worst = d;
        res.witness = pt;
        res.witness_lhs = r;
        res.witness_rhs = 0.0;
      }
    }
  }
  return res;
}

// ----------------------------------------------------------- currents

struct FieldCurrents {
  std::vector<MatrixExpr> mats;  // (P_i)_{ab} = phi_a dL/du_{b,i}
  std::vector<Expr> P;           // scalar currents (traces, or the xi form)
};

inline FieldCurrents current_density(const SymbolTable& st, const Expr& L,
                                     const FieldVectorField& X,
                                     const std::vector<MatrixExpr>& lams) {
  detail::validate_field_symmetry(st, X);
  detail::validate_deformation(st, lams);
  detail::require_first_jet_free(st, L, "lagrangian density", 1);
  const auto& xs = st.indep_vars();
  const auto& us = st.states();
  const std::size_t n = us.size();

  FieldCurrents out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    MatrixExpr m(static_cast<int>(n), static_cast<int>(n));
    if (!X.xi) {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          m.at(static_cast<int>(a), static_cast<int>(b)) = simplify(Expr::mul(
              X.phi[a],
              diff(L, st.field_derivative(us[b], {static_cast<int>(i)}))));
      out.mats.push_back(m);
      out.P.push_back(m.trace());
    } else {
      Expr Q = X.phi[0];
      for (std::size_t j = 0; j < xs.size(); ++j)
        Q = Expr::sub(std::move(Q),
                      Expr::mul((*X.xi)[j], Expr::sym(st.field_derivative(
                                                us[0], {static_cast<int>(j)}))));
      Expr core = simplify(Expr::mul(
          Q, diff(L, st.field_derivative(us[0], {static_cast<int>(i)}))));
      m.at(0, 0) = core;
      out.mats.push_back(m);
      out.P.push_back(simplify(Expr::add(core, Expr::mul((*X.xi)[i], L))));
    }
  }
  return out;
}

struct ConservationResult {
  FieldCurrents currents;
  VerificationReport report;
};

inline ConservationResult check_conservation(const SymbolTable& st, const Expr& L,
                                             const FieldVectorField& X,
                                             const std::vector<MatrixExpr>& lams,
                                             const SamplingConfig& cfg,
                                             double tol = 1e-8) {
  ConservationResult out{current_density(st, L, X, lams), {}};
  const auto& xs = st.indep_vars();

  Expr R = Expr::num(0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    R = Expr::add(std::move(R), total_derivative(st, out.currents.P[i], xs[i]));
    if (!X.xi)
      R = Expr::add(std::move(R), (lams[i] * out.currents.mats[i]).trace());
    else
      R = Expr::add(std::move(R), Expr::mul(lams[i].at(0, 0), out.currents.P[i]));
    out.report.note_quantity("current [" + xs[i] + "]", out.currents.P[i]);
  }
  out.report.add_result("conservation law",
                        X.xi ? "sum_i (D_i P_i + lambda_i P_i) = 0 on shell"
                             : "sum_i (D_i P_i + tr(Lambda_i P_i)) = 0 on shell",
                        el_projected_zero(st, L, simplify(R), cfg, tol));
  return out;
}

// Second-order charge matrices: the transposed placement pairs the field
// component with the equation index,
//   (P_i)_{ab} = phi_b dL/du_{a,i} + (Dhat_j phi)_b W_{aij} - phi_b D_j W_{aij}
// with W_{aij} the symmetrized derivative of L by u_{a,ij} and
// Dhat_j = D_j + Lambda_j.  Needs a table of order >= 3.
inline FieldCurrents second_order_current_density(const SymbolTable& st, const Expr& L,
                                                  const FieldVectorField& X,
                                                  const std::vector<MatrixExpr>& lams) {
  detail::validate_field_symmetry(st, X);
  detail::validate_deformation(st, lams);
  if (st.order() < 3)
    throw TableError("declare the table with order >= 3 for second-order currents");
  detail::require_first_jet_free(st, L, "lagrangian density", 2);
  if (X.xi) throw DimensionError("second-order currents support vertical fields only");
  const auto& xs = st.indep_vars();
  const auto& us = st.states();
  const std::size_t n = us.size();
  const std::size_t s = xs.size();

  // covariant derivatives of the field components, one per direction
  std::vector<std::vector<Expr>> dhat(s);
  for (std::size_t j = 0; j < s; ++j) {
    std::vector<Expr> gain = lams[j].apply(X.phi);
    for (std::size_t b = 0; b < n; ++b)
      dhat[j].push_back(simplify(
          Expr::add(total_derivative(st, X.phi[b], xs[j]), gain[b])));
  }

  FieldCurrents out;
  for (std::size_t i = 0; i < s; ++i) {
    MatrixExpr m(static_cast<int>(n), static_cast<int>(n));
    for (std::size_t a = 0; a < n; ++a) {
      std::vector<Expr> W(s, Expr::num(0.0));  // W_{aij}, j varying
      for (std::size_t j = 0; j < s; ++j) {
        Expr w = diff(L, st.field_derivative(us[a], {static_cast<int>(i),
                                                     static_cast<int>(j)}));
        if (i != j) w = Expr::mul(Expr::num(0.5), std::move(w));
        W[j] = simplify(w);
      }
      for (std::size_t b = 0; b < n; ++b) {
        Expr e = Expr::mul(X.phi[b],
                           diff(L, st.field_derivative(us[a], {static_cast<int>(i)})));
        for (std::size_t j = 0; j < s; ++j) {
          e = Expr::add(std::move(e), Expr::mul(dhat[j][b], W[j]));
          e = Expr::sub(std::move(e),
                        Expr::mul(X.phi[b], total_derivative(st, W[j], xs[j])));
        }
        m.at(static_cast<int>(a), static_cast<int>(b)) = simplify(e);
      }
    }
    out.mats.push_back(m);
    out.P.push_back(m.trace());
  }
  return out;
}

// ----------------------------------------------------------- integrating factor

inline VerificationReport check_gamma_factorization(const SymbolTable& st,
                                                    const MatrixExpr& gamma,
                                                    const std::vector<MatrixExpr>& lams,
                                                    const SamplingConfig& cfg) {
  detail::validate_deformation(st, lams);
  const int n = static_cast<int>(st.states().size());
  if (gamma.rows() != n || gamma.cols() != n)
    throw DimensionError("integrating factor size does not match the field count");
  VerificationReport rep;
  const auto& xs = st.indep_vars();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    MatrixExpr lhs = gamma * lams[i];
    MatrixExpr rhs = detail::total_derivative(st, gamma, xs[i]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        rep.add_equiv(st,
                      "factorization [" + xs[i] + "] (" + std::to_string(a + 1) + "," +
                          std::to_string(b + 1) + ")",
                      "Gamma Lambda_i = D_i Gamma", lhs.at(a, b), rhs.at(a, b), cfg);
  }
  auto z = equiv_zero(st, gamma.det(), cfg);
  auto& rec = rep.add("invertibility", "det Gamma != 0",
                      z.pass ? Verdict::Fail : Verdict::Pass);
  if (z.pass) rec.detail = "the factor is singular everywhere sampled";
  return rep;
}

// Off-shell: once Gamma Lambda_i = D_i Gamma, the deformed divergence
// expression factorizes through Gamma identically.
inline VerificationReport check_factorized_divergence(const SymbolTable& st,
                                                      const Expr& L,
                                                      const FieldVectorField& X,
                                                      const std::vector<MatrixExpr>& lams,
                                                      const MatrixExpr& gamma,
                                                      const SamplingConfig& cfg) {
  FieldCurrents cur = current_density(st, L, X, lams);
  const auto& xs = st.indep_vars();
  Expr lhs = Expr::num(0.0), rhs = Expr::num(0.0);
  if (!X.xi) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      lhs = Expr::add(std::move(lhs),
                      detail::total_derivative(st, gamma * cur.mats[i], xs[i]).trace());
      rhs = Expr::add(
          std::move(rhs),
          (gamma * (detail::total_derivative(st, cur.mats[i], xs[i]) +
                    lams[i] * cur.mats[i]))
              .trace());
    }
  } else {
    Expr g = gamma.at(0, 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      lhs = Expr::add(std::move(lhs),
                      total_derivative(st, Expr::mul(g, cur.P[i]), xs[i]));
      rhs = Expr::add(std::move(rhs),
                      Expr::mul(g, Expr::add(total_derivative(st, cur.P[i], xs[i]),
                                             Expr::mul(lams[i].at(0, 0), cur.P[i]))));
    }
  }
  VerificationReport rep;
  rep.add_equiv(st, "factorized divergence identity",
                "sum tr(D_i(Gamma P_i)) = sum tr(Gamma (D_i P_i + Lambda_i P_i))",
                simplify(lhs), simplify(rhs), cfg);
  return rep;
}

// ----------------------------------------------------------- gauge field

struct GaugeFieldResult {
  FieldVectorField Xt;
  std::vector<Expr> P;  // standard currents of the gauge field (xi form only)
  VerificationReport report;
};

inline GaugeFieldResult gauge_equivalent_field(const SymbolTable& st, const Expr& L,
                                               const FieldVectorField& X,
                                               const std::vector<MatrixExpr>& lams,
                                               const MatrixExpr& gamma,
                                               const SamplingConfig& cfg,
                                               double tol = 1e-8) {
  detail::validate_field_symmetry(st, X);
  detail::validate_deformation(st, lams);
  const auto& xs = st.indep_vars();
  const auto& us = st.states();
  const std::size_t n = us.size();
  const std::size_t s = xs.size();
  if (gamma.rows() != static_cast<int>(n) || gamma.cols() != static_cast<int>(n))
    throw DimensionError("integrating factor size does not match the field count");

  GaugeFieldResult out;
  auto Psi = deformed_field_prolongation(st, X, lams);
  std::vector<MatrixExpr> zeros(s, MatrixExpr::zero(static_cast<int>(n),
                                                    static_cast<int>(n)));

  if (!X.xi) {
    std::vector<Expr> phit = gamma.apply(X.phi);
    out.Xt = FieldVectorField{phit, std::nullopt};
    for (std::size_t a = 0; a < n; ++a)
      out.report.note_quantity("gauge component [" + us[a] + "]", phit[a]);
    auto Psit = deformed_field_prolongation(st, out.Xt, zeros);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t a = 0; a < n; ++a) {
        Expr lhs = Expr::num(0.0);
        for (std::size_t b = 0; b < n; ++b)
          lhs = Expr::add(std::move(lhs),
                          Expr::mul(gamma.at(static_cast<int>(a), static_cast<int>(b)),
                                    Psi[i][b]));
        out.report.add_equiv(st, "prolongation relation [" + xs[i] + "," + us[a] + "]",
                             "Gamma Psi^(i) = Psi_std^(i)(Gamma phi)", simplify(lhs),
                             Psit[i][a], cfg);
      }
    return out;
  }

  // one dependent variable: scale both parts by the factor
  Expr g = gamma.at(0, 0);
  std::vector<Expr> xit;
  for (std::size_t i = 0; i < s; ++i) xit.push_back(simplify(Expr::mul(g, (*X.xi)[i])));
  out.Xt = FieldVectorField{{simplify(Expr::mul(g, X.phi[0]))}, xit};
  for (std::size_t i = 0; i < s; ++i)
    out.report.note_quantity("gauge component [" + xs[i] + "]", xit[i]);

  auto Psit = deformed_field_prolongation(st, out.Xt, zeros);
  for (std::size_t i = 0; i < s; ++i)
    out.report.add_equiv(st, "prolongation relation [" + xs[i] + "]",
                         "gamma Psi^(i) = Psi_std^(i)(gauge field)",
                         simplify(Expr::mul(g, Psi[i][0])), Psit[i][0], cfg);

  out.report.add_equiv(st, "standard invariance of the gauge field",
                       "X~^(1) L + L div xi~ = 0",
                       deformed_field_invariance_residual(st, L, zeros, out.Xt),
                       Expr::num(0.0), cfg);

  FieldCurrents cur = current_density(st, L, out.Xt, zeros);
  out.P = cur.P;
  Expr R = Expr::num(0.0);
  for (std::size_t i = 0; i < s; ++i) {
    R = Expr::add(std::move(R), total_derivative(st, cur.P[i], xs[i]));
    out.report.note_quantity("gauge current [" + xs[i] + "]", cur.P[i]);
  }
  out.report.add_result("conserved gauge current", "sum_i D_i P~_i = 0 on shell",
                        el_projected_zero(st, L, simplify(R), cfg, tol));
  return out;
}

}  // namespace lamsym
