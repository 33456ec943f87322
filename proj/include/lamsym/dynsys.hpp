#pragma once
// First-order dynamical systems du/dt = f(u, t) and their deformed
// symmetries.
//
// The symmetry condition for X = phi_a d/du_a with deformation matrix Lambda
// (entries may depend on the first jet; derivatives are replaced by f before
// use) reads, componentwise,
//
//     [f, phi]_a + d phi_a / dt + (Lambda phi)_a = 0,
//     [f, phi]_a = f_b d phi_a / du_b - phi_b d f_a / du_b .
//
// Adapted coordinates (w_1..w_{m-1}, z) with X w_j = 0, X z = 1 turn the
// system into dW_j/dt = W_j(w, z, t), dz/dt = Z(w, z, t); how much of the
// z-dependence survives is measured by M_j = (dw_j/du . Lambda phi) written
// in the new coordinates, and the profile classifies the outcome.

#include <optional>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "prolong.hpp"
#include "report.hpp"

namespace lamsym {

struct DynamicalSystem {
  std::vector<Expr> f;  // right-hand side over (u, t)
};

struct InverseMapIncompleteError : Error {
  using Error::Error;
};

namespace detail {

inline void validate_system(const SymbolTable& st, const DynamicalSystem& ds) {
  if (st.mode() != SymbolTable::Mode::Time)
    throw DimensionError("time-mode table required for dynamical systems");
  if (ds.f.size() != st.states().size())
    throw DimensionError("right-hand side has " + std::to_string(ds.f.size()) +
                         " components for " + std::to_string(st.states().size()) +
                         " states");
  for (const auto& c : ds.f) require_first_jet_free(st, c, "right-hand side");
}

inline MatrixExpr onshell_matrix(const SymbolTable& st, const MatrixExpr& m,
                                 const std::vector<Expr>& f) {
  return m.map([&](const Expr& e) { return onshell_substitute(st, e, f); });
}

}  // namespace detail

inline std::vector<Expr> lie_bracket(const SymbolTable& st, const std::vector<Expr>& f,
                                     const std::vector<Expr>& phi) {
  if (f.size() != phi.size()) throw DimensionError("bracket arguments differ in size");
  const auto& u = st.states();
  std::vector<Expr> out;
  for (std::size_t a = 0; a < f.size(); ++a) {
    Expr acc = Expr::num(0.0);
    for (std::size_t b = 0; b < f.size(); ++b) {
      acc = Expr::add(std::move(acc), Expr::mul(f[b], diff(phi[a], u[b])));
      acc = Expr::sub(std::move(acc), Expr::mul(phi[b], diff(f[a], u[b])));
    }
    out.push_back(simplify(acc));
  }
  return out;
}

// Determining equations for a deformed symmetry of du/dt = f.
inline VerificationReport check_deformed_symmetry(const SymbolTable& st,
                                                  const DynamicalSystem& ds,
                                                  const VectorField& X,
                                                  const LambdaMatrix& lam,
                                                  const SamplingConfig& cfg) {
  detail::validate_system(st, ds);
  detail::validate_field(st, X);
  if (X.tau) throw DimensionError("symmetry fields of systems carry no time component");
  if (lam.n() != static_cast<int>(st.states().size()))
    throw DimensionError("deformation matrix size does not match the state count");

  VerificationReport rep;
  MatrixExpr lam_on = detail::onshell_matrix(st, lam.m, ds.f);
  std::vector<Expr> gain = lam_on.apply(X.phi);
  std::vector<Expr> br = lie_bracket(st, ds.f, X.phi);
  for (std::size_t a = 0; a < ds.f.size(); ++a) {
    Expr residual = simplify(Expr::add(
        Expr::add(br[a], diff(X.phi[a], st.time_var())), gain[a]));
    rep.add_equiv(st, "determining equation [" + st.states()[a] + "]",
                  "[f,phi]_a + d_t phi_a + (Lambda phi)_a = 0", residual,
                  Expr::num(0.0), cfg);
  }
  return rep;
}

// Recover a scalar multiplier from the determining equations: the first
// component with phi_a not identically zero fixes the candidate, the rest
// must agree.
struct MultiplierResult {
  std::optional<Expr> lambda;
  VerificationReport report;
};

inline MultiplierResult recover_scalar_multiplier(const SymbolTable& st,
                                                  const DynamicalSystem& ds,
                                                  const VectorField& X,
                                                  const SamplingConfig& cfg) {
  detail::validate_system(st, ds);
  detail::validate_field(st, X);
  MultiplierResult out;
  std::vector<Expr> br = lie_bracket(st, ds.f, X.phi);
  std::vector<Expr> g;  // g_a = -([f,phi]_a + d_t phi_a) must equal lambda phi_a
  for (std::size_t a = 0; a < ds.f.size(); ++a)
    g.push_back(simplify(Expr::neg(
        Expr::add(br[a], diff(X.phi[a], st.time_var())))));

  int pivot = -1;
  for (std::size_t a = 0; a < X.phi.size(); ++a) {
    if (!equiv_zero(st, X.phi[a], cfg).pass) {
      pivot = static_cast<int>(a);
      break;
    }
  }
  if (pivot < 0) {
    out.report.add("multiplier recovery", "lambda phi_a = -([f,phi]_a + d_t phi_a)",
                   Verdict::Fail)
        .detail = "every symmetry component is identically zero";
    return out;
  }
  Expr lambda = simplify(Expr::div(g[static_cast<std::size_t>(pivot)],
                                   X.phi[static_cast<std::size_t>(pivot)]));
  out.report.note_quantity("recovered multiplier", lambda);
  bool all_ok = true;
  for (std::size_t a = 0; a < X.phi.size(); ++a) {
    auto er = equiv(st, g[a], simplify(Expr::mul(lambda, X.phi[a])), cfg);
    all_ok = all_ok && er.pass;
    out.report.add_result("multiplier consistency [" + st.states()[a] + "]",
                          "-([f,phi]_a + d_t phi_a) = lambda phi_a", er);
  }
  if (all_ok) out.lambda = lambda;
  return out;
}

// ------------------------------------------------------- adapted coordinates

// Invariants w_j (functions of the old coordinates), a rectifying coordinate
// z, and the inverse map old = inverse(w, z).  The forward expression for z
// is optional: some charts cannot spell it in the expression grammar, and the
// inverse map determines everything that is needed.
struct CoordinateMap {
  std::vector<std::string> w_names;
  std::vector<Expr> w;       // over the old table
  std::string z_name = "z";
  std::optional<Expr> z;     // over the old table, when expressible
  std::vector<Expr> inverse; // old states in terms of (w, z), over the new table
};

inline SymbolTable adapted_table(const SymbolTable& st, const CoordinateMap& map) {
  std::vector<std::string> names = map.w_names;
  names.push_back(map.z_name);
  return SymbolTable::ode(st.time_var(), names, 1, st.params());
}

inline VerificationReport verify_adapted_coordinates(const SymbolTable& st,
                                                     const VectorField& X,
                                                     const CoordinateMap& map,
                                                     const SamplingConfig& cfg) {
  detail::validate_field(st, X);
  const std::size_t m = st.states().size();
  if (map.w.size() != map.w_names.size())
    throw DimensionError("invariant name/expression count mismatch");
  if (map.w.size() + 1 != m)
    throw DimensionError("expected " + std::to_string(m - 1) + " invariants");
  if (map.inverse.size() != m)
    throw DimensionError("inverse map must cover every old state");

  SymbolTable nt = adapted_table(st, map);
  VerificationReport rep;

  // X annihilates each invariant
  for (std::size_t j = 0; j < map.w.size(); ++j) {
    Expr xw = Expr::num(0.0);
    for (std::size_t a = 0; a < m; ++a)
      xw = Expr::add(std::move(xw), Expr::mul(X.phi[a], diff(map.w[j], st.states()[a])));
    rep.add_equiv(st, "invariant [" + map.w_names[j] + "]", "X w_j = 0", simplify(xw),
                  Expr::num(0.0), cfg);
  }

  std::map<std::string, Expr> old_to_new;
  for (std::size_t a = 0; a < m; ++a) old_to_new[st.states()[a]] = map.inverse[a];

  if (map.z) {
    // X z = 1 and the round trip u -> (w, z) -> u
    Expr xz = Expr::num(0.0);
    for (std::size_t a = 0; a < m; ++a)
      xz = Expr::add(std::move(xz), Expr::mul(X.phi[a], diff(*map.z, st.states()[a])));
    rep.add_equiv(st, "rectified coordinate", "X z = 1", simplify(xz), Expr::num(1.0),
                  cfg);
    std::map<std::string, Expr> new_to_old;
    for (std::size_t j = 0; j < map.w.size(); ++j) new_to_old[map.w_names[j]] = map.w[j];
    new_to_old[map.z_name] = *map.z;
    for (std::size_t a = 0; a < m; ++a) {
      Expr round = substitute(map.inverse[a], new_to_old);
      rep.add_equiv(st, "round trip [" + st.states()[a] + "]",
                    "inverse(w(u), z(u)) = u", simplify(round),
                    Expr::sym(st.states()[a]), cfg);
    }
  } else {
    // chart form: the inverse is the authority; check w(inverse) = w and the
    // rectification d inverse / dz = phi(inverse)
    for (std::size_t j = 0; j < map.w.size(); ++j) {
      Expr round = substitute(map.w[j], old_to_new);
      rep.add_equiv(nt, "round trip [" + map.w_names[j] + "]", "w(inverse(w, z)) = w",
                    simplify(round), Expr::sym(map.w_names[j]), cfg);
    }
    for (std::size_t a = 0; a < m; ++a) {
      Expr lhs = diff(map.inverse[a], map.z_name);
      Expr rhs = simplify(substitute(X.phi[a], old_to_new));
      rep.add_equiv(nt, "rectification [" + st.states()[a] + "]",
                    "d inverse_a / dz = phi_a(inverse)", lhs, rhs, cfg);
    }
  }
  return rep;
}

// ------------------------------------------------------- transformed system

struct TransformedSystem {
  SymbolTable table;         // states (w_1..w_{m-1}, z)
  std::vector<Expr> W;       // dw_j/dt in the new coordinates
  Expr Z;                    // dz/dt in the new coordinates
  VerificationReport report; // consistency checks that were run on the way
};

namespace detail {

inline Expr push_through_inverse(const SymbolTable& st, const SymbolTable& nt,
                                 const Expr& e_old,
                                 const std::map<std::string, Expr>& old_to_new,
                                 const char* what) {
  Expr moved = simplify(substitute(e_old, old_to_new));
  for (const auto& s : free_symbols(moved)) {
    if (!nt.knows(s))
      throw InverseMapIncompleteError(std::string(what) +
                                      " still depends on old coordinate '" + s +
                                      "' after applying the inverse map");
  }
  (void)st;
  return moved;
}

}  // namespace detail

inline TransformedSystem transform_system(const SymbolTable& st, const DynamicalSystem& ds,
                                          const CoordinateMap& map,
                                          const SamplingConfig& cfg) {
  detail::validate_system(st, ds);
  const std::size_t m = st.states().size();
  if (map.inverse.size() != m) throw DimensionError("inverse map must cover every state");
  SymbolTable nt = adapted_table(st, map);
  for (const auto& inv : map.inverse)
    for (const auto& s : free_symbols(inv))
      if (!nt.knows(s)) throw InverseMapIncompleteError(
          "inverse map expression depends on '" + s + "', not a new coordinate");

  std::map<std::string, Expr> old_to_new;
  for (std::size_t a = 0; a < m; ++a) old_to_new[st.states()[a]] = map.inverse[a];

  TransformedSystem out{nt, {}, Expr::num(0.0), {}};

  // dw_j/dt = sum_a (dw_j/du_a) f_a + dw_j/dt, pushed through the inverse
  for (std::size_t j = 0; j < map.w.size(); ++j) {
    Expr rate = diff(map.w[j], st.time_var());
    for (std::size_t a = 0; a < m; ++a)
      rate = Expr::add(std::move(rate), Expr::mul(diff(map.w[j], st.states()[a]), ds.f[a]));
    out.W.push_back(detail::push_through_inverse(st, nt, simplify(rate), old_to_new,
                                                 "transformed rate"));
  }

  if (map.z) {
    Expr rate = diff(*map.z, st.time_var());
    for (std::size_t a = 0; a < m; ++a)
      rate = Expr::add(std::move(rate), Expr::mul(diff(*map.z, st.states()[a]), ds.f[a]));
    out.Z = detail::push_through_inverse(st, nt, simplify(rate), old_to_new,
                                         "transformed rate");
  } else {
    // implicit route: differentiate u_a = inverse_a(w, z, t) along t and solve
    // the component with d inverse_a / dz not identically zero for dz/dt
    int pivot = -1;
    std::vector<Expr> dz(m, Expr::num(0.0));
    for (std::size_t a = 0; a < m; ++a) {
      dz[a] = diff(map.inverse[a], map.z_name);
      if (pivot < 0 && !equiv_zero(nt, dz[a], cfg).pass) pivot = static_cast<int>(a);
    }
    if (pivot < 0)
      throw InverseMapIncompleteError("inverse map does not depend on the rectified coordinate");
    auto rate_via = [&](std::size_t a) {
      // f_a(inverse) - sum_j d inverse_a/dw_j W_j - d inverse_a/dt
      Expr acc = detail::push_through_inverse(st, nt, ds.f[a], old_to_new,
                                              "transformed rate");
      for (std::size_t j = 0; j < map.w.size(); ++j)
        acc = Expr::sub(std::move(acc),
                        Expr::mul(diff(map.inverse[a], map.w_names[j]), out.W[j]));
      acc = Expr::sub(std::move(acc), diff(map.inverse[a], nt.time_var()));
      return simplify(acc);
    };
    std::size_t pa = static_cast<std::size_t>(pivot);
    out.Z = simplify(Expr::div(rate_via(pa), dz[pa]));
    // every other component must tell the same story
    for (std::size_t a = 0; a < m; ++a) {
      if (a == pa) continue;
      out.report.add_equiv(nt, "chain-rule consistency [" + st.states()[a] + "]",
                           "d inverse_a/dz dz/dt + ... = f_a(inverse)",
                           simplify(Expr::mul(dz[a], out.Z)), rate_via(a), cfg);
    }
  }
  return out;
}

// ------------------------------------------------------- reduction profile

enum class ReductionClass { Exact, UniformMultiplier, Partial };

inline const char* reduction_class_name(ReductionClass c) {
  switch (c) {
    case ReductionClass::Exact: return "exact";
    case ReductionClass::UniformMultiplier: return "uniform-multiplier";
    case ReductionClass::Partial: return "partial";
  }
  return "?";
}

// How a deformed symmetry obstructs full reduction: in adapted coordinates
// the z-dependence of the transformed rates is generated by
// M_j = (dw_j/du . Lambda phi) o inverse (and likewise for z).  Full
// independence of z in the w-rates means the classical picture survives;
// M_j = 0 for all j but not for z is the uniform case; otherwise only the
// rates with vanishing M_j stay z-free.
struct ReductionProfile {
  TransformedSystem sys;
  std::vector<Expr> M;  // one per invariant, in the new coordinates
  Expr Mz;
  ReductionClass cls = ReductionClass::Exact;
  int z_free_count = 0;  // invariants whose rate is z-free
  VerificationReport report;
};

inline ReductionProfile reduction_profile(const SymbolTable& st, const DynamicalSystem& ds,
                                          const VectorField& X, const LambdaMatrix& lam,
                                          const CoordinateMap& map,
                                          const SamplingConfig& cfg) {
  ReductionProfile out{transform_system(st, ds, map, cfg), {}, Expr::num(0.0), {}, 0, {}};
  out.report.absorb(out.sys.report);
  const SymbolTable& nt = out.sys.table;
  const std::size_t m = st.states().size();

  MatrixExpr lam_on = detail::onshell_matrix(st, lam.m, ds.f);
  std::vector<Expr> gain = lam_on.apply(X.phi);

  std::map<std::string, Expr> old_to_new;
  for (std::size_t a = 0; a < m; ++a) old_to_new[st.states()[a]] = map.inverse[a];

  for (std::size_t j = 0; j < map.w.size(); ++j) {
    Expr mj = Expr::num(0.0);
    for (std::size_t a = 0; a < m; ++a)
      mj = Expr::add(std::move(mj), Expr::mul(diff(map.w[j], st.states()[a]), gain[a]));
    out.M.push_back(detail::push_through_inverse(st, nt, simplify(mj), old_to_new,
                                                 "z-dependence generator"));
  }

  if (map.z) {
    Expr mz = Expr::num(0.0);
    for (std::size_t a = 0; a < m; ++a)
      mz = Expr::add(std::move(mz), Expr::mul(diff(*map.z, st.states()[a]), gain[a]));
    out.Mz = detail::push_through_inverse(st, nt, simplify(mz), old_to_new,
                                          "z-dependence generator");
  } else {
    // dz/du o inverse is the last row of the inverse of the Jacobian of the
    // inverse map; assemble it symbolically
    MatrixExpr jac(static_cast<int>(m), static_cast<int>(m));
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t j = 0; j < map.w.size(); ++j)
        jac.at(static_cast<int>(a), static_cast<int>(j)) =
            diff(map.inverse[a], map.w_names[j]);
      jac.at(static_cast<int>(a), static_cast<int>(m - 1)) =
          diff(map.inverse[a], map.z_name);
    }
    MatrixExpr jinv = jac.inverse();
    Expr mz = Expr::num(0.0);
    for (std::size_t a = 0; a < m; ++a) {
      Expr g_new = detail::push_through_inverse(st, nt, gain[a], old_to_new,
                                                "z-dependence generator");
      mz = Expr::add(std::move(mz),
                     Expr::mul(jinv.at(static_cast<int>(m - 1), static_cast<int>(a)),
                               std::move(g_new)));
    }
    out.Mz = simplify(mz);
  }

  // the generators are exactly the z-derivatives of the transformed rates
  bool all_w_free = true;
  for (std::size_t j = 0; j < map.w.size(); ++j) {
    out.report.add_equiv(nt, "z-dependence of rate [" + map.w_names[j] + "]",
                         "dW_j/dz = M_j", diff(out.sys.W[j], map.z_name), out.M[j], cfg);
    bool zfree = equiv_zero(nt, out.M[j], cfg).pass;
    if (zfree)
      ++out.z_free_count;
    else
      all_w_free = false;
  }
  out.report.add_equiv(nt, "z-dependence of rate [" + map.z_name + "]", "dZ/dz = M_z",
                       diff(out.sys.Z, map.z_name), out.Mz, cfg);
  bool z_zfree = equiv_zero(nt, out.Mz, cfg).pass;

  if (all_w_free && z_zfree)
    out.cls = ReductionClass::Exact;
  else if (all_w_free)
    out.cls = ReductionClass::UniformMultiplier;
  else
    out.cls = ReductionClass::Partial;
  out.report.note_quantity("reduction class", reduction_class_name(out.cls));
  return out;
}

}  // namespace lamsym
