#pragma once
// First prolongations of vector fields on (t, u) to the first jet (t, u, du),
// in three flavors: the standard prolongation, the scalar deformed version
// with one multiplier, and the matrix-deformed version.
//
// Conventions:
//  - X = tau d/dt + sum_a phi_a d/du_a; tau is only supported for a single
//    state, matching how the deformed single-equation theory is stated.
//  - phi (and tau) live on (t, u): no derivative coordinates.
//  - deformed coefficients: standard + lambda (phi_a - tau du_a), or
//    standard_a + (Lambda phi)_a with tau absent.

#include <optional>
#include <vector>

#include "matrix.hpp"
#include "sampling.hpp"
#include "symtab.hpp"

namespace lamsym {

struct VectorField {
  std::vector<Expr> phi;
  std::optional<Expr> tau;  // coefficient on d/dt (single-state problems only)
};

struct ProlongedField {
  VectorField base;
  std::vector<Expr> dot;  // coefficients on d/du_a
};

namespace detail {

inline void require_first_jet_free(const SymbolTable& st, const Expr& e,
                                   const char* what, int max_order = 0) {
  for (const auto& s : free_symbols(e)) {
    auto ord = st.symbol_order(s);
    if (ord && *ord > max_order)
      throw DimensionError(std::string(what) + " must not depend on '" + s + "'");
  }
}

inline void validate_field(const SymbolTable& st, const VectorField& X) {
  if (st.mode() != SymbolTable::Mode::Time)
    throw DimensionError("time-mode table required for ODE prolongations");
  if (X.phi.size() != st.states().size())
    throw DimensionError("vector field has " + std::to_string(X.phi.size()) +
                         " components for " + std::to_string(st.states().size()) +
                         " states");
  for (const auto& c : X.phi) require_first_jet_free(st, c, "vector field component");
  if (X.tau) {
    if (st.states().size() != 1)
      throw DimensionError("a time component is only supported for one state");
    require_first_jet_free(st, *X.tau, "time component");
  }
}

}  // namespace detail

inline ProlongedField standard_prolongation(const SymbolTable& st, const VectorField& X) {
  detail::validate_field(st, X);
  const std::string& t = st.time_var();
  ProlongedField out;
  out.base = X;
  for (std::size_t a = 0; a < X.phi.size(); ++a) {
    Expr coeff = total_derivative(st, X.phi[a], t);
    if (X.tau) {
      Expr du = Expr::sym(st.derivative(st.states()[a], 1));
      coeff = Expr::sub(std::move(coeff),
                        Expr::mul(std::move(du), total_derivative(st, *X.tau, t)));
    }
    out.dot.push_back(simplify(coeff));
  }
  return out;
}

// Scalar multiplier: coefficient gains lambda (phi_a - tau du_a).  The
// multiplier may depend on the first jet.
inline ProlongedField deformed_prolongation(const SymbolTable& st, const VectorField& X,
                                            const Expr& lambda) {
  ProlongedField out = standard_prolongation(st, X);
  for (std::size_t a = 0; a < X.phi.size(); ++a) {
    Expr gain = X.phi[a];
    if (X.tau) {
      Expr du = Expr::sym(st.derivative(st.states()[a], 1));
      gain = Expr::sub(std::move(gain), Expr::mul(*X.tau, std::move(du)));
    }
    out.dot[a] = simplify(Expr::add(out.dot[a], Expr::mul(lambda, std::move(gain))));
  }
  return out;
}

// Matrix multiplier: coefficient_a = D_t phi_a + (Lambda phi)_a; no time
// component in this flavor.
inline ProlongedField deformed_prolongation(const SymbolTable& st, const VectorField& X,
                                            const LambdaMatrix& lam) {
  if (X.tau)
    throw DimensionError("matrix deformation does not support a time component");
  if (lam.n() != static_cast<int>(st.states().size()))
    throw DimensionError("deformation matrix size does not match the state count");
  ProlongedField out = standard_prolongation(st, X);
  std::vector<Expr> gain = lam.m.apply(X.phi);
  for (std::size_t a = 0; a < X.phi.size(); ++a)
    out.dot[a] = simplify(Expr::add(out.dot[a], gain[a]));
  return out;
}

// Apply a prolonged field to a function on the first jet.
inline Expr apply(const SymbolTable& st, const ProlongedField& P, const Expr& e) {
  detail::require_first_jet_free(st, e, "first-jet function", 1);
  Expr acc = Expr::num(0.0);
  if (P.base.tau)
    acc = Expr::add(std::move(acc), Expr::mul(*P.base.tau, diff(e, st.time_var())));
  for (std::size_t a = 0; a < P.base.phi.size(); ++a) {
    const std::string& u = st.states()[a];
    acc = Expr::add(std::move(acc), Expr::mul(P.base.phi[a], diff(e, u)));
    acc = Expr::add(std::move(acc),
                    Expr::mul(P.dot[a], diff(e, st.derivative(u, 1))));
  }
  return simplify(acc);
}

}  // namespace lamsym
