#pragma once
// Fixed-step numeric traces of dynamical systems and drift checks for the
// symbolic conservation statements.  The integrator is plain RK4 with a fixed
// evaluation order, so a trace is bit-reproducible for identical inputs.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dynsys.hpp"

namespace lamsym {

struct NonFiniteStateError : Error {
  std::size_t step;
  explicit NonFiniteStateError(std::size_t at)
      : Error("state became non-finite at step " + std::to_string(at)), step(at) {}
};

struct Trajectory {
  std::vector<std::string> names;         // state names, column order
  std::vector<double> times;              // one per row
  std::vector<std::vector<double>> rows;  // rows[k][a] = state a at times[k]
  double t0 = 0.0;
  double h = 0.0;
};

inline Trajectory integrate_rk4(const SymbolTable& st, const DynamicalSystem& ds,
                                const std::vector<double>& x0, double t0, double h,
                                int steps) {
  detail::validate_system(st, ds);
  const std::size_t n = st.states().size();
  if (x0.size() != n) throw DimensionError("initial state must match the state count");
  if (steps < 0) throw DimensionError("negative step count");
  if (!(h > 0.0) && !(h < 0.0)) throw DimensionError("step size must be nonzero");

  Trajectory out;
  out.names = st.states();
  out.t0 = t0;
  out.h = h;

  auto rhs = [&](double t, const std::vector<double>& x) {
    std::map<std::string, double> env = st.params();
    env[st.time_var()] = t;
    for (std::size_t a = 0; a < n; ++a) env[st.states()[a]] = x[a];
    std::vector<double> dx(n);
    for (std::size_t a = 0; a < n; ++a) dx[a] = eval(ds.f[a], env);
    return dx;
  };

  std::vector<double> x = x0;
  for (int k = 0; k <= steps; ++k) {
    double t = t0 + k * h;
    for (double v : x)
      if (!std::isfinite(v)) throw NonFiniteStateError(static_cast<std::size_t>(k));
    out.times.push_back(t);
    out.rows.push_back(x);
    if (k == steps) break;

    std::vector<double> k1 = rhs(t, x);
    std::vector<double> xt(n);
    for (std::size_t a = 0; a < n; ++a) xt[a] = x[a] + 0.5 * h * k1[a];
    std::vector<double> k2 = rhs(t + 0.5 * h, xt);
    for (std::size_t a = 0; a < n; ++a) xt[a] = x[a] + 0.5 * h * k2[a];
    std::vector<double> k3 = rhs(t + 0.5 * h, xt);
    for (std::size_t a = 0; a < n; ++a) xt[a] = x[a] + h * k3[a];
    std::vector<double> k4 = rhs(t + h, xt);
    for (std::size_t a = 0; a < n; ++a)
      x[a] += h * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]) / 6.0;
  }
  return out;
}

inline std::vector<double> trace_quantity(const SymbolTable& st, const Trajectory& traj,
                                          const Expr& q) {
  detail::require_first_jet_free(st, q, "traced quantity");
  std::vector<double> out;
  out.reserve(traj.rows.size());
  for (std::size_t k = 0; k < traj.rows.size(); ++k) {
    std::map<std::string, double> env = st.params();
    env[st.time_var()] = traj.times[k];
    for (std::size_t a = 0; a < traj.names.size(); ++a)
      env[traj.names[a]] = traj.rows[k][a];
    out.push_back(eval(q, env));
  }
  return out;
}

struct DeviationResult {
  bool pass = true;
  double max_abs_err = 0.0;
  std::size_t worst_step = 0;
  double worst_t = 0.0;
};

// Compare the numeric rate of a traced quantity against a claimed rate
// expression: centered differences on the interior rows.
inline DeviationResult check_trace_deviation(const SymbolTable& st,
                                             const Trajectory& traj, const Expr& q,
                                             const Expr& rate, double tol = 1e-5) {
  detail::require_first_jet_free(st, rate, "claimed rate");
  if (traj.rows.size() < 3)
    throw DimensionError("need at least three rows for a centered difference");
  std::vector<double> qv = trace_quantity(st, traj, q);
  DeviationResult res;
  for (std::size_t k = 1; k + 1 < traj.rows.size(); ++k) {
    double fd = (qv[k + 1] - qv[k - 1]) / (2.0 * traj.h);
    std::map<std::string, double> env = st.params();
    env[st.time_var()] = traj.times[k];
    for (std::size_t a = 0; a < traj.names.size(); ++a)
      env[traj.names[a]] = traj.rows[k][a];
    double err = std::fabs(fd - eval(rate, env));
    if (err > res.max_abs_err) {
      res.max_abs_err = err;
      res.worst_step = k;
      res.worst_t = traj.times[k];
    }
  }
  res.pass = res.max_abs_err <= tol;
  return res;
}

// --------------------------------------------------------------- flat table

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trajectory_table(const Trajectory& traj) {
  std::string out = "t";
  for (const auto& n : traj.names) {
    out += '\t';
    out += n;
  }
  out += '\n';
  for (std::size_t k = 0; k < traj.rows.size(); ++k) {
    out += format_full(traj.times[k]);
    for (double v : traj.rows[k]) {
      out += '\t';
      out += format_full(v);
    }
    out += '\n';
  }
  return out;
}

inline Trajectory parse_trajectory_table(const std::string& text) {
  Trajectory out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t c = 0;
    while (true) {
      std::size_t tab = line.find('\t', c);
      cells.push_back(line.substr(c, tab == std::string::npos ? tab : tab - c));
      if (tab == std::string::npos) break;
      c = tab + 1;
    }
    if (header) {
      if (cells.empty() || cells[0] != "t")
        throw SyntaxError("trajectory table must start with a 't' column", 0);
      out.names.assign(cells.begin() + 1, cells.end());
      header = false;
      continue;
    }
    if (cells.size() != out.names.size() + 1)
      throw SyntaxError("trajectory row width does not match the header", pos);
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(std::stod(cells[i]));
    out.times.push_back(std::stod(cells[0]));
    out.rows.push_back(std::move(row));
  }
  if (out.times.size() >= 1) out.t0 = out.times[0];
  if (out.times.size() >= 2) out.h = out.times[1] - out.times[0];
  return out;
}

}  // namespace lamsym
