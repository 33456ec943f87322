#pragma once
// Symbol tables: declared variables, parameters, and derivative coordinates.
//
// Two modes.  Time mode covers ODE/mechanics problems: one independent
// variable, states u_a, derivative chains u -> du -> ddu -> dddu up to the
// declared order.  Field mode covers several independent variables x_i and
// fields u_alpha with multi-index derivative names u_x, u_xy (indices kept
// sorted, so mixed partials have one canonical spelling).
//
// Expressions are parsed against a table; any identifier the table does not
// know is rejected up front.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "expr.hpp"

namespace lamsym {

struct TableError : Error {
  using Error::Error;
};

struct MissingDerivativeError : Error {
  std::string symbol;
  explicit MissingDerivativeError(const std::string& sym)
      : Error("expression depends on '" + sym +
              "' whose derivative is beyond the declared order"),
        symbol(sym) {}
};

namespace detail {

inline bool valid_ident(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return !func_by_name(s).has_value();
}

}  // namespace detail

class SymbolTable {
 public:
  enum class Mode { Time, Field };

 private:
  Mode mode_ = Mode::Time;
  std::string time_;
  std::vector<std::string> indep_;
  std::vector<std::string> states_;  // states (Time) or fields (Field)
  std::map<std::string, double> params_;
  int order_ = 1;

  // phase-space structure, set by the phase() factory
  bool phase_ = false;
  std::vector<std::string> qs_, ps_;

  std::set<std::string> names_;                       // every legal identifier
  std::map<std::string, std::string> succ_;           // Time: v -> Dv
  std::map<std::string, int> time_order_;             // Time: v -> derivative order
  // Field: (name, indep index) -> derivative name
  std::map<std::pair<std::string, int>, std::string> fsucc_;
  std::map<std::string, int> field_order_;

  void add_name(const std::string& n, const char* what) {
    if (!detail::valid_ident(n))
      throw TableError(std::string(what) + " '" + n + "' is not a valid identifier");
    if (!names_.insert(n).second)
      throw TableError(std::string("duplicate symbol '") + n + "'");
  }

  void build_time_chains() {
    add_name(time_, "time variable");
    for (const auto& s : states_) add_name(s, "state");
    for (const auto& s : states_) {
      std::string prev = s;
      time_order_[s] = 0;
      for (int k = 1; k <= order_; ++k) {
        std::string d = std::string(static_cast<std::size_t>(k), 'd') + s;
        add_name(d, "derivative");
        succ_[prev] = d;
        time_order_[d] = k;
        prev = d;
      }
    }
    for (const auto& kv : params_) add_name(kv.first, "parameter");
  }

  static std::string multi_index_name(const std::string& base,
                                      const std::vector<std::string>& indep,
                                      std::vector<int> idx) {
    std::sort(idx.begin(), idx.end());
    std::string n = base + "_";
    for (int i : idx) n += indep[static_cast<std::size_t>(i)];
    return n;
  }

  void build_field_chains() {
    for (const auto& x : indep_) {
      if (x.find('_') != std::string::npos)
        throw TableError("independent variable '" + x + "' must not contain '_'");
      add_name(x, "independent variable");
    }
    for (const auto& f : states_) {
      if (f.find('_') != std::string::npos)
        throw TableError("field name '" + f + "' must not contain '_'");
      add_name(f, "field");
    }
    const int s = static_cast<int>(indep_.size());
    struct Chain {
      std::string name;
      std::string root;
      std::vector<int> idx;
    };
    // breadth-first over derivative orders so successors always exist
    std::vector<Chain> frontier;
    for (const auto& f : states_) {
      frontier.push_back({f, f, {}});
      field_order_[f] = 0;
    }
    for (int k = 1; k <= order_; ++k) {
      std::vector<Chain> next;
      std::set<std::string> seen_this_level;
      for (const auto& ch : frontier) {
        for (int i = 0; i < s; ++i) {
          std::vector<int> ni = ch.idx;
          ni.push_back(i);
          std::string child = multi_index_name(ch.root, indep_, ni);
          fsucc_[{ch.name, i}] = child;
          if (seen_this_level.insert(child).second) {
            add_name(child, "derivative");
            field_order_[child] = k;
            std::sort(ni.begin(), ni.end());
            next.push_back({child, ch.root, ni});
          }
        }
      }
      frontier = std::move(next);
    }
    for (const auto& kv : params_) add_name(kv.first, "parameter");
  }

 public:
  static SymbolTable ode(std::string time, std::vector<std::string> states, int order = 1,
                         std::map<std::string, double> params = {}) {
    if (order < 0 || order > 3) throw TableError("derivative order must be 0..3");
    SymbolTable t;
    t.mode_ = Mode::Time;
    t.time_ = std::move(time);
    t.states_ = std::move(states);
    t.params_ = std::move(params);
    t.order_ = order;
    t.build_time_chains();
    return t;
  }

  // Canonical momentum names: a leading 'q' becomes 'p'; otherwise "p_" + name.
  static std::string momentum_name(const std::string& q) {
    if (!q.empty() && q[0] == 'q') return "p" + q.substr(1);
    return "p_" + q;
  }

  static SymbolTable phase(std::string time, std::vector<std::string> q,
                           std::map<std::string, double> params = {}) {
    std::vector<std::string> st = q;
    for (const auto& name : q) st.push_back(momentum_name(name));
    SymbolTable t = ode(std::move(time), std::move(st), 1, std::move(params));
    t.phase_ = true;
    t.qs_ = q;
    for (const auto& name : q) t.ps_.push_back(momentum_name(name));
    return t;
  }

  static SymbolTable field(std::vector<std::string> indep, std::vector<std::string> fields,
                           int order = 1, std::map<std::string, double> params = {}) {
    if (order < 0 || order > 3) throw TableError("derivative order must be 0..3");
    if (indep.empty()) throw TableError("need at least one independent variable");
    SymbolTable t;
    t.mode_ = Mode::Field;
    t.indep_ = std::move(indep);
    t.states_ = std::move(fields);
    t.params_ = std::move(params);
    t.order_ = order;
    t.build_field_chains();
    return t;
  }

  Mode mode() const { return mode_; }
  const std::string& time_var() const { return time_; }
  const std::vector<std::string>& indep_vars() const { return indep_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::map<std::string, double>& params() const { return params_; }
  int order() const { return order_; }

  bool is_phase() const { return phase_; }
  const std::vector<std::string>& q_names() const { return qs_; }
  const std::vector<std::string>& p_names() const { return ps_; }
  int half() const { return static_cast<int>(qs_.size()); }

  bool knows(const std::string& n) const { return names_.count(n) > 0; }
  bool is_param(const std::string& n) const { return params_.count(n) > 0; }

  void set_param(const std::string& n, double v) {
    if (!params_.count(n)) throw TableError("no parameter named '" + n + "'");
    params_[n] = v;
  }

  // Time mode: the k-th derivative name of a state.
  std::string derivative(const std::string& base, int k) const {
    std::string d = std::string(static_cast<std::size_t>(k), 'd') + base;
    if (!knows(d)) throw TableError("no derivative '" + d + "' declared");
    return d;
  }

  // Order of a symbol as a derivative coordinate (0 for states/fields),
  // nullopt for time, independent variables, and parameters.
  std::optional<int> symbol_order(const std::string& n) const {
    if (mode_ == Mode::Time) {
      auto it = time_order_.find(n);
      if (it == time_order_.end()) return std::nullopt;
      return it->second;
    }
    auto it = field_order_.find(n);
    if (it == field_order_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::string> time_successor(const std::string& n) const {
    auto it = succ_.find(n);
    if (it == succ_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::string> field_successor(const std::string& n, int indep_index) const {
    auto it = fsucc_.find({n, indep_index});
    if (it == fsucc_.end()) return std::nullopt;
    return it->second;
  }

  // Field mode: derivative name for a base field and (unsorted) index list.
  std::string field_derivative(const std::string& base, std::vector<int> idx) const {
    std::string n = multi_index_name(base, indep_, std::move(idx));
    if (!knows(n)) throw TableError("no derivative '" + n + "' declared");
    return n;
  }

  // Jet coordinates in canonical order (no parameters, no time/indep vars).
  std::vector<std::string> jet_symbols() const {
    std::vector<std::string> out;
    const auto& omap = mode_ == Mode::Time ? time_order_ : field_order_;
    for (int k = 0; k <= order_; ++k)
      for (const auto& [n, o] : omap)
        if (o == k) out.push_back(n);
    return out;
  }

  std::map<std::string, double> with_params(std::map<std::string, double> point) const {
    for (const auto& [p, v] : params_) point[p] = v;
    return point;
  }
};

// Parse and validate: every symbol must be declared in the table.
inline Expr parse(std::string_view text, const SymbolTable& table) {
  Expr e = parse_raw(text);
  for (const auto& s : free_symbols(e))
    if (!table.knows(s)) throw UnknownSymbolError(s);
  return e;
}

// ------------------------------------------------------- total derivatives

// Formal total derivative along the time variable: terms d/dt plus successor
// coordinates times partials.  An expression that depends on a top-order
// derivative coordinate cannot be differentiated within the declared order.
inline Expr total_derivative(const SymbolTable& st, const Expr& e,
                             const std::string& wrt) {
  if (st.mode() == SymbolTable::Mode::Time) {
    if (wrt != st.time_var())
      throw TableError("total derivative must be taken along '" + st.time_var() + "'");
    Expr acc = diff(e, wrt);
    for (const auto& v : st.jet_symbols()) {
      Expr pe = diff(e, v);
      if (pe.is_num(0.0)) continue;
      auto succ = st.time_successor(v);
      if (!succ) throw MissingDerivativeError(v);
      acc = Expr::add(std::move(acc), Expr::mul(Expr::sym(*succ), std::move(pe)));
    }
    return simplify(acc);
  }
  const auto& xs = st.indep_vars();
  auto it = std::find(xs.begin(), xs.end(), wrt);
  if (it == xs.end()) throw TableError("'" + wrt + "' is not an independent variable");
  int i = static_cast<int>(it - xs.begin());
  Expr acc = diff(e, wrt);
  for (const auto& v : st.jet_symbols()) {
    Expr pe = diff(e, v);
    if (pe.is_num(0.0)) continue;
    auto succ = st.field_successor(v, i);
    if (!succ) throw MissingDerivativeError(v);
    acc = Expr::add(std::move(acc), Expr::mul(Expr::sym(*succ), std::move(pe)));
  }
  return simplify(acc);
}

// ------------------------------------------------------------ on-shell

// Replace first derivatives of the states by the right-hand side of a first
// order system.  Substitution only; no simplification, so evaluating before
// or after substituting gives bitwise identical doubles.
inline Expr onshell_substitute(const SymbolTable& st, const Expr& e,
                               const std::vector<Expr>& f) {
  if (st.mode() != SymbolTable::Mode::Time)
    throw TableError("on-shell substitution applies to time-mode tables");
  if (f.size() != st.states().size())
    throw DimensionError("right-hand side size does not match the state count");
  for (const auto& s : free_symbols(e)) {
    auto ord = st.symbol_order(s);
    if (ord && *ord >= 2)
      throw TableError("on-shell substitution limited to first-order expressions; '" +
                       s + "' is higher order");
  }
  std::map<std::string, Expr> repl;
  for (std::size_t a = 0; a < f.size(); ++a)
    repl[st.derivative(st.states()[a], 1)] = f[a];
  return substitute(e, repl);
}

}  // namespace lamsym
