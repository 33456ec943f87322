#pragma once
// Declarative problem files.  A small key-value table format (sections,
// strings, numbers, booleans, nested arrays) selects one of the verification
// pipelines and feeds it expression strings; the same file can carry numeric
// trace parameters.  Files are meant to be diffable fixtures that double as
// documentation of a worked example.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dynsys.hpp"
#include "fieldtheory.hpp"
#include "hamiltonian.hpp"
#include "lagrangian.hpp"
#include "numtrace.hpp"

namespace lamsym {

// ------------------------------------------------------------- value model

struct PValue {
  enum class Type { Str, Num, Bool, Arr, Tab };
  Type type = Type::Tab;
  std::string str;
  double num = 0.0;
  bool flag = false;
  std::vector<PValue> arr;
  std::vector<std::pair<std::string, PValue>> tab;  // insertion order kept
  std::size_t line = 0;

  const PValue* find(const std::string& key) const {
    for (const auto& kv : tab)
      if (kv.first == key) return &kv.second;
    return nullptr;
  }
};

namespace detail {

// ----------------------------------------------------------------- parser

class ProblemParser {
 public:
  explicit ProblemParser(const std::string& text) : text_(text) {}

  PValue parse() {
    PValue root;
    root.type = PValue::Type::Tab;
    root.line = 1;
    PValue* cur = &root;
    std::string line;
    while (next_line(line)) {
      std::string s = trim(line);
      if (s.empty()) continue;
      if (s[0] == '[')
        cur = open_section(root, s);
      else
        read_pair(*cur, s);
    }
    return root;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw SyntaxError(msg, at);
  }

  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  // one physical line with its comment removed (respecting quotes)
  bool next_line(std::string& out) {
    if (pos_ >= text_.size()) return false;
    std::size_t eol = text_.find('\n', pos_);
    if (eol == std::string::npos) eol = text_.size();
    std::string raw = text_.substr(pos_, eol - pos_);
    pos_ = eol + 1;
    ++line_no_;
    bool quoted = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') quoted = !quoted;
      if (raw[i] == '#' && !quoted) {
        raw.resize(i);
        break;
      }
    }
    out = raw;
    return true;
  }

  static bool ident_ok(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
  }

  PValue* open_section(PValue& root, const std::string& s) {
    bool aot = s.size() >= 2 && s[1] == '[';
    std::size_t open = aot ? 2 : 1;
    std::string close = aot ? "]]" : "]";
    std::size_t end = s.find(close, open);
    if (end == std::string::npos) fail("unterminated section header", line_no_);
    if (!trim(s.substr(end + close.size())).empty())
      fail("trailing input after section header", line_no_);
    std::string path = trim(s.substr(open, end - open));

    std::vector<std::string> comps;
    std::size_t c = 0;
    while (true) {
      std::size_t dot = path.find('.', c);
      comps.push_back(path.substr(c, dot == std::string::npos ? dot : dot - c));
      if (dot == std::string::npos) break;
      c = dot + 1;
    }
    for (auto& comp : comps) {
      comp = trim(comp);
      if (!ident_ok(comp)) fail("bad section name '" + comp + "'", line_no_);
    }

    PValue* cur = &root;
    for (std::size_t i = 0; i + 1 < comps.size(); ++i) cur = descend(cur, comps[i]);
    const std::string& leaf = comps.back();
    for (auto& kv : cur->tab) {
      if (kv.first != leaf) continue;
      if (aot) {
        if (kv.second.type != PValue::Type::Arr)
          fail("'" + leaf + "' is not an array of sections", line_no_);
        kv.second.arr.push_back(make_tab());
        return &kv.second.arr.back();
      }
      if (kv.second.type != PValue::Type::Tab)
        fail("'" + leaf + "' is not a section", line_no_);
      return &kv.second;
    }
    PValue fresh = make_tab();
    if (aot) {
      PValue arr;
      arr.type = PValue::Type::Arr;
      arr.line = line_no_;
      arr.arr.push_back(std::move(fresh));
      cur->tab.emplace_back(leaf, std::move(arr));
      return &cur->tab.back().second.arr.back();
    }
    cur->tab.emplace_back(leaf, std::move(fresh));
    return &cur->tab.back().second;
  }

  PValue make_tab() const {
    PValue v;
    v.type = PValue::Type::Tab;
    v.line = line_no_;
    return v;
  }

  PValue* descend(PValue* cur, const std::string& comp) {
    for (auto& kv : cur->tab) {
      if (kv.first != comp) continue;
      if (kv.second.type == PValue::Type::Tab) return &kv.second;
      if (kv.second.type == PValue::Type::Arr && !kv.second.arr.empty() &&
          kv.second.arr.back().type == PValue::Type::Tab)
        return &kv.second.arr.back();
      fail("'" + comp + "' is not a section", line_no_);
    }
    cur->tab.emplace_back(comp, make_tab());
    return &cur->tab.back().second;
  }

  void read_pair(PValue& tab, const std::string& first) {
    std::size_t key_line = line_no_;
    std::size_t eq = std::string::npos;
    bool quoted = false;
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (first[i] == '"') quoted = !quoted;
      if (first[i] == '=' && !quoted) {
        eq = i;
        break;
      }
    }
    if (eq == std::string::npos) fail("expected 'key = value'", key_line);
    std::string key = trim(first.substr(0, eq));
    if (!ident_ok(key)) fail("bad key '" + key + "'", key_line);
    if (tab.find(key)) fail("duplicate key '" + key + "'", key_line);

    std::string value = trim(first.substr(eq + 1));
    // arrays may continue over several lines until brackets balance
    while (bracket_depth(value) > 0) {
      std::string more;
      if (!next_line(more)) fail("unterminated array for '" + key + "'", key_line);
      value += ' ';
      value += trim(more);
    }
    if (value.empty()) fail("missing value for '" + key + "'", key_line);

    std::size_t i = 0;
    PValue v = parse_value(value, i, key_line);
    skip_ws(value, i);
    if (i != value.size()) fail("trailing input after value of '" + key + "'", key_line);
    tab.tab.emplace_back(key, std::move(v));
  }

  static int bracket_depth(const std::string& s) {
    int d = 0;
    bool quoted = false;
    for (char c : s) {
      if (c == '"') quoted = !quoted;
      if (quoted) continue;
      if (c == '[') ++d;
      if (c == ']') --d;
    }
    return d;
  }

  static void skip_ws(const std::string& s, std::size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }

  PValue parse_value(const std::string& s, std::size_t& i, std::size_t at) {
    skip_ws(s, i);
    if (i >= s.size()) fail("missing value", at);
    PValue v;
    v.line = at;
    if (s[i] == '"') {
      std::size_t end = s.find('"', i + 1);
      if (end == std::string::npos) fail("unterminated string", at);
      v.type = PValue::Type::Str;
      v.str = s.substr(i + 1, end - i - 1);
      i = end + 1;
      return v;
    }
    if (s[i] == '[') {
      ++i;
      v.type = PValue::Type::Arr;
      skip_ws(s, i);
      if (i < s.size() && s[i] == ']') {
        ++i;
        return v;
      }
      while (true) {
        v.arr.push_back(parse_value(s, i, at));
        skip_ws(s, i);
        if (i < s.size() && s[i] == ',') {
          ++i;
          skip_ws(s, i);
          if (i < s.size() && s[i] == ']') {  // trailing comma
            ++i;
            return v;
          }
          continue;
        }
        if (i < s.size() && s[i] == ']') {
          ++i;
          return v;
        }
        fail("expected ',' or ']' in array", at);
      }
    }
    if (s.compare(i, 4, "true") == 0) {
      v.type = PValue::Type::Bool;
      v.flag = true;
      i += 4;
      return v;
    }
    if (s.compare(i, 5, "false") == 0) {
      v.type = PValue::Type::Bool;
      v.flag = false;
      i += 5;
      return v;
    }
    const char* begin = s.c_str() + i;
    char* end = nullptr;
    double num = std::strtod(begin, &end);
    if (end == begin) fail("expected a string, number, boolean, or array", at);
    v.type = PValue::Type::Num;
    v.num = num;
    i += static_cast<std::size_t>(end - begin);
    return v;
  }
};

// -------------------------------------------------------------- accessors

inline const PValue& need(const PValue& tab, const std::string& key,
                          const std::string& ctx) {
  const PValue* v = tab.find(key);
  if (!v) throw SyntaxError(ctx + " is missing '" + key + "'", tab.line);
  return *v;
}

inline std::string need_str(const PValue& tab, const std::string& key,
                            const std::string& ctx) {
  const PValue& v = need(tab, key, ctx);
  if (v.type != PValue::Type::Str)
    throw SyntaxError("'" + key + "' must be a string", v.line);
  return v.str;
}

inline double need_num(const PValue& tab, const std::string& key,
                       const std::string& ctx) {
  const PValue& v = need(tab, key, ctx);
  if (v.type != PValue::Type::Num)
    throw SyntaxError("'" + key + "' must be a number", v.line);
  return v.num;
}

inline bool get_flag(const PValue& tab, const std::string& key, bool dflt) {
  const PValue* v = tab.find(key);
  if (!v) return dflt;
  if (v->type != PValue::Type::Bool)
    throw SyntaxError("'" + key + "' must be true or false", v->line);
  return v->flag;
}

inline std::vector<std::string> str_list(const PValue& v, const std::string& ctx) {
  if (v.type != PValue::Type::Arr)
    throw SyntaxError(ctx + " must be an array of strings", v.line);
  std::vector<std::string> out;
  for (const auto& e : v.arr) {
    if (e.type != PValue::Type::Str)
      throw SyntaxError(ctx + " must contain only strings", e.line);
    out.push_back(e.str);
  }
  return out;
}

inline std::vector<double> num_list(const PValue& v, const std::string& ctx) {
  if (v.type != PValue::Type::Arr)
    throw SyntaxError(ctx + " must be an array of numbers", v.line);
  std::vector<double> out;
  for (const auto& e : v.arr) {
    if (e.type != PValue::Type::Num)
      throw SyntaxError(ctx + " must contain only numbers", e.line);
    out.push_back(e.num);
  }
  return out;
}

inline Expr parse_expr(const SymbolTable& st, const PValue& v, const std::string& ctx) {
  if (v.type != PValue::Type::Str)
    throw SyntaxError(ctx + " must be an expression string", v.line);
  try {
    return parse(v.str, st);
  } catch (const SyntaxError& e) {
    throw SyntaxError(ctx + ": " + e.what(), v.line);
  } catch (const TableError& e) {
    throw SyntaxError(ctx + ": " + e.what(), v.line);
  }
}

inline std::vector<Expr> parse_vector(const SymbolTable& st, const PValue& v,
                                      const std::string& ctx) {
  if (v.type != PValue::Type::Arr)
    throw SyntaxError(ctx + " must be an array of expression strings", v.line);
  std::vector<Expr> out;
  for (std::size_t i = 0; i < v.arr.size(); ++i)
    out.push_back(parse_expr(st, v.arr[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

inline MatrixExpr parse_matrix(const SymbolTable& st, const PValue& v,
                               const std::string& ctx) {
  if (v.type != PValue::Type::Arr || v.arr.empty())
    throw SyntaxError(ctx + " must be a non-empty array of rows", v.line);
  std::vector<std::vector<Expr>> rows;
  for (std::size_t r = 0; r < v.arr.size(); ++r)
    rows.push_back(parse_vector(st, v.arr[r], ctx + "[" + std::to_string(r) + "]"));
  for (const auto& row : rows)
    if (row.size() != rows[0].size())
      throw SyntaxError(ctx + " rows must have equal length", v.line);
  return MatrixExpr::from_rows(rows);
}

}  // namespace detail

// ------------------------------------------------------------ file model

enum class ProblemKind { DynSystem, Lagrangian, Hamiltonian, Field };

struct DeviationSpec {
  std::string name = "deviation";
  std::string quantity;
  std::string rate;
  double tolerance = 1e-5;
};

struct TraceSpec {
  std::optional<std::vector<double>> x0;
  std::optional<double> t0;
  std::optional<double> h;
  std::optional<int> steps;
  std::vector<DeviationSpec> deviations;
};

struct ProblemFile {
  ProblemKind kind = ProblemKind::DynSystem;
  std::string name = "problem";
  SymbolTable st = SymbolTable::ode("t", {"u"}, 1);
  SamplingConfig cfg;
  TraceSpec trace;
  PValue root;
};

inline ProblemFile load_problem_text(const std::string& text) {
  using detail::need;
  using detail::need_num;
  using detail::need_str;
  ProblemFile pf;
  pf.root = detail::ProblemParser(text).parse();
  const PValue& root = pf.root;

  std::string kind = need_str(root, "kind", "problem file");
  if (kind == "dynamical_system")
    pf.kind = ProblemKind::DynSystem;
  else if (kind == "lagrangian")
    pf.kind = ProblemKind::Lagrangian;
  else if (kind == "hamiltonian")
    pf.kind = ProblemKind::Hamiltonian;
  else if (kind == "field")
    pf.kind = ProblemKind::Field;
  else
    throw SyntaxError("unknown kind '" + kind + "'", root.find("kind")->line);
  if (const PValue* n = root.find("name")) {
    if (n->type != PValue::Type::Str)
      throw SyntaxError("'name' must be a string", n->line);
    pf.name = n->str;
  }

  const PValue& sym = need(root, "symbols", "problem file");
  std::map<std::string, double> params;
  if (const PValue* p = sym.find("params")) {
    if (p->type != PValue::Type::Tab)
      throw SyntaxError("[symbols.params] must be a section", p->line);
    for (const auto& kv : p->tab) {
      if (kv.second.type != PValue::Type::Num)
        throw SyntaxError("parameter '" + kv.first + "' must be a number",
                          kv.second.line);
      params[kv.first] = kv.second.num;
    }
  }
  std::string time = sym.find("time") ? need_str(sym, "time", "[symbols]") : "t";
  switch (pf.kind) {
    case ProblemKind::DynSystem:
      pf.st = SymbolTable::ode(time, detail::str_list(need(sym, "states", "[symbols]"),
                                                      "states"),
                               1, params);
      break;
    case ProblemKind::Lagrangian:
      pf.st = SymbolTable::ode(time, detail::str_list(need(sym, "states", "[symbols]"),
                                                      "states"),
                               2, params);
      break;
    case ProblemKind::Hamiltonian:
      pf.st = SymbolTable::phase(time,
                                 detail::str_list(need(sym, "positions", "[symbols]"),
                                                  "positions"),
                                 params);
      break;
    case ProblemKind::Field: {
      int order = 2;
      if (sym.find("order")) order = static_cast<int>(need_num(sym, "order", "[symbols]"));
      pf.st = SymbolTable::field(
          detail::str_list(need(sym, "indep", "[symbols]"), "indep"),
          detail::str_list(need(sym, "fields", "[symbols]"), "fields"), order, params);
      break;
    }
  }

  if (const PValue* s = root.find("sampling")) {
    if (s->type != PValue::Type::Tab)
      throw SyntaxError("[sampling] must be a section", s->line);
    if (s->find("seed"))
      pf.cfg.seed = static_cast<std::uint64_t>(need_num(*s, "seed", "[sampling]"));
    if (s->find("samples"))
      pf.cfg.samples = static_cast<int>(need_num(*s, "samples", "[sampling]"));
    if (s->find("lo")) pf.cfg.lo = need_num(*s, "lo", "[sampling]");
    if (s->find("hi")) pf.cfg.hi = need_num(*s, "hi", "[sampling]");
    if (s->find("rel_tol")) pf.cfg.rel_tol = need_num(*s, "rel_tol", "[sampling]");
    if (s->find("abs_tol")) pf.cfg.abs_tol = need_num(*s, "abs_tol", "[sampling]");
    if (s->find("max_retries"))
      pf.cfg.max_retries = static_cast<int>(need_num(*s, "max_retries", "[sampling]"));
    if (const PValue* b = s->find("box")) {
      if (b->type != PValue::Type::Tab)
        throw SyntaxError("[sampling.box] must be a section", b->line);
      for (const auto& kv : b->tab) {
        std::vector<double> r = detail::num_list(kv.second, "box '" + kv.first + "'");
        if (r.size() != 2)
          throw SyntaxError("box '" + kv.first + "' must be [lo, hi]", kv.second.line);
        pf.cfg.box[kv.first] = {r[0], r[1]};
      }
    }
  }

  if (const PValue* tr = root.find("trace")) {
    if (tr->type != PValue::Type::Tab)
      throw SyntaxError("[trace] must be a section", tr->line);
    if (tr->find("x0")) pf.trace.x0 = detail::num_list(*tr->find("x0"), "x0");
    if (tr->find("t0")) pf.trace.t0 = need_num(*tr, "t0", "[trace]");
    if (tr->find("h")) pf.trace.h = need_num(*tr, "h", "[trace]");
    if (tr->find("steps"))
      pf.trace.steps = static_cast<int>(need_num(*tr, "steps", "[trace]"));
    if (const PValue* dv = tr->find("deviation")) {
      if (dv->type != PValue::Type::Arr)
        throw SyntaxError("[[trace.deviation]] must be used as a section array",
                          dv->line);
      for (const auto& d : dv->arr) {
        DeviationSpec spec;
        if (d.find("name")) spec.name = need_str(d, "name", "[[trace.deviation]]");
        spec.quantity = need_str(d, "quantity", "[[trace.deviation]]");
        spec.rate = need_str(d, "rhs", "[[trace.deviation]]");
        if (d.find("tolerance"))
          spec.tolerance = need_num(d, "tolerance", "[[trace.deviation]]");
        pf.trace.deviations.push_back(std::move(spec));
      }
    }
  }
  return pf;
}

inline ProblemFile load_problem_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SyntaxError("cannot open '" + path + "'", 0);
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_problem_text(ss.str());
}

// --------------------------------------------------------- verify drivers

namespace detail {

inline LambdaMatrix load_deformation(const SymbolTable& st, const PValue& sym, int n) {
  const PValue* full = sym.find("Lambda");
  const PValue* scal = sym.find("lambda");
  if (full && scal)
    throw SyntaxError("give either 'lambda' or 'Lambda', not both", sym.line);
  if (scal) return LambdaMatrix::scalar(parse_expr(st, *scal, "lambda"), n);
  if (full) {
    MatrixExpr m = parse_matrix(st, *full, "Lambda");
    if (m.rows() != n || m.cols() != n)
      throw SyntaxError("Lambda must be " + std::to_string(n) + "x" + std::to_string(n),
                        full->line);
    return LambdaMatrix::full(m);
  }
  return LambdaMatrix::zero(n);
}

inline CoordinateMap load_chart(const SymbolTable& st, const PValue& coords,
                                SymbolTable& nt_out) {
  CoordinateMap m;
  m.w = parse_vector(st, need(coords, "w", "[coordinates]"), "w");
  if (coords.find("w_names"))
    m.w_names = str_list(*coords.find("w_names"), "w_names");
  else
    for (std::size_t j = 0; j < m.w.size(); ++j)
      m.w_names.push_back("w" + std::to_string(j + 1));
  if (coords.find("z_name")) m.z_name = need_str(coords, "z_name", "[coordinates]");
  if (coords.find("z")) m.z = parse_expr(st, *coords.find("z"), "z");
  nt_out = adapted_table(st, m);
  m.inverse = parse_vector(nt_out, need(coords, "inverse", "[coordinates]"), "inverse");
  return m;
}

inline VerificationReport verify_dynsys(const ProblemFile& pf) {
  const SymbolTable& st = pf.st;
  const int n = static_cast<int>(st.states().size());
  VerificationReport rep;
  rep.problem = pf.name;

  const PValue& sys = need(pf.root, "system", "problem file");
  DynamicalSystem ds{parse_vector(st, need(sys, "f", "[system]"), "f")};
  const PValue& sym = need(pf.root, "symmetry", "problem file");
  VectorField X{parse_vector(st, need(sym, "phi", "[symmetry]"), "phi"), std::nullopt};
  LambdaMatrix lam = load_deformation(st, sym, n);

  if (get_flag(sym, "solve_lambda", false)) {
    MultiplierResult mr = recover_scalar_multiplier(st, ds, X, pf.cfg);
    rep.absorb(mr.report, "multiplier");
    if (mr.lambda) {
      rep.note_quantity("recovered multiplier", *mr.lambda);
      lam = LambdaMatrix::scalar(*mr.lambda, n);
    }
  }
  rep.absorb(check_deformed_symmetry(st, ds, X, lam, pf.cfg), "symmetry");

  if (const PValue* coords = pf.root.find("coordinates")) {
    SymbolTable nt = st;
    CoordinateMap m = load_chart(st, *coords, nt);
    rep.absorb(verify_adapted_coordinates(st, X, m, pf.cfg), "chart");
    ReductionProfile prof = reduction_profile(st, ds, X, lam, m, pf.cfg);
    rep.absorb(prof.report, "reduction");
    for (std::size_t j = 0; j < m.w_names.size(); ++j)
      rep.note_quantity("transformed rate [" + m.w_names[j] + "]", prof.sys.W[j]);
    rep.note_quantity("transformed rate [" + m.z_name + "]", prof.sys.Z);

    const SymbolTable& nt2 = prof.sys.table;
    if (coords->find("expect_W")) {
      std::vector<Expr> ew = parse_vector(nt2, *coords->find("expect_W"), "expect_W");
      if (ew.size() != m.w.size())
        throw SyntaxError("expect_W must list one rate per invariant",
                          coords->find("expect_W")->line);
      for (std::size_t j = 0; j < ew.size(); ++j)
        rep.add_equiv(nt2, "declared reduced rate [" + m.w_names[j] + "]",
                      "transformed rate matches the declared form", prof.sys.W[j],
                      ew[j], pf.cfg);
    }
    if (coords->find("expect_Z"))
      rep.add_equiv(nt2, "declared reduced rate [" + m.z_name + "]",
                    "transformed rate matches the declared form", prof.sys.Z,
                    parse_expr(nt2, *coords->find("expect_Z"), "expect_Z"), pf.cfg);
    if (coords->find("expect_class")) {
      std::string want = need_str(*coords, "expect_class", "[coordinates]");
      std::string got = reduction_class_name(prof.cls);
      rep.add("declared reduction class", "classification matches the declared one",
              want == got ? Verdict::Pass : Verdict::Fail)
          .detail = "classified as " + got;
    }
  }
  return rep;
}

inline VerificationReport verify_lagrangian(const ProblemFile& pf) {
  const SymbolTable& st = pf.st;
  const std::size_t n = st.states().size();
  VerificationReport rep;
  rep.problem = pf.name;

  const PValue& lsec = need(pf.root, "lagrangian", "problem file");
  Lagrangian lag{parse_expr(st, need(lsec, "L", "[lagrangian]"), "L")};
  const PValue& sym = need(pf.root, "symmetry", "problem file");
  VectorField X{parse_vector(st, need(sym, "phi", "[symmetry]"), "phi"), std::nullopt};
  LambdaMatrix lam = load_deformation(st, sym, static_cast<int>(n));

  rep.absorb(check_deformed_invariance(st, lag, X, lam, pf.cfg), "invariance");
  if (sym.find("uniform_scale_c")) {
    double c = need_num(sym, "uniform_scale_c", "[symmetry]");
    std::vector<Expr> g = lam.m.apply(X.phi);
    for (std::size_t a = 0; a < n; ++a)
      rep.add_equiv(st, "uniform multiplier [" + st.states()[a] + "]",
                    "Lambda phi = c phi", g[a],
                    simplify(Expr::mul(Expr::num(c), X.phi[a])), pf.cfg);
  }
  ChargeResult ch = noether_charge(st, lag, X, lam, pf.cfg);
  rep.absorb(ch.report, "charge");

  if (const PValue* lift = pf.root.find("lift")) {
    SymbolTable ph = SymbolTable::phase(st.time_var(), st.states(), st.params());
    std::optional<MatrixExpr> lr;
    if (lift->find("Lambda2"))
      lr = parse_matrix(ph, *lift->find("Lambda2"), "Lambda2");
    LiftPipelineResult res = run_lift_pipeline(st, lag, X, lam, lr, pf.cfg);
    rep.absorb(res.report);  // stages carry their own prefixes

    if (lift->find("gamma")) {
      if (res.G && res.hs)
        rep.absorb(check_separated_evolution(res.leg->phase, *res.hs, *res.G,
                                             need_str(*lift, "gamma", "[lift]"),
                                             pf.cfg),
                   "separated evolution");
      else
        rep.add("separated evolution", "D_t G = gamma(t, G)", Verdict::Fail).detail =
            "no generating function to evolve";
    }
    if (lift->find("expect_psi")) {
      std::vector<Expr> want = parse_vector(ph, *lift->find("expect_psi"), "expect_psi");
      if (res.Phi.size() == 2 * n && want.size() == n) {
        for (std::size_t a = 0; a < n; ++a)
          rep.add_equiv(ph, "declared lift [" + ph.states()[n + a] + "]",
                        "momentum component matches the declared form",
                        res.Phi[n + a], want[a], pf.cfg);
      } else {
        rep.add("declared lift", "momentum component matches the declared form",
                Verdict::Fail)
            .detail = "pipeline stopped before the lift";
      }
    }
    if (lift->find("expect_G")) {
      Expr want = parse_expr(ph, *lift->find("expect_G"), "expect_G");
      if (res.G)
        rep.add_equiv(ph, "declared generating function",
                      "G matches the declared form", *res.G, want, pf.cfg);
      else
        rep.add("declared generating function", "G matches the declared form",
                Verdict::Fail)
            .detail = "no generating function was produced";
    }
    if (get_flag(*lift, "expect_no_generating", false)) {
      rep.add("declared absence of a generating function",
              "the lifted field is not a gradient",
              res.G ? Verdict::Fail : Verdict::Pass)
          .detail = res.G ? "a generating function was found" : "";
    }
    if (lift->find("expect_S")) {
      Expr want = parse_expr(ph, *lift->find("expect_S"), "expect_S");
      if (res.S)
        rep.add_equiv(ph, "declared divergence", "div Phi matches the declared form",
                      *res.S, want, pf.cfg);
      else
        rep.add("declared divergence", "div Phi matches the declared form",
                Verdict::Fail)
            .detail = "pipeline stopped before the divergence";
    }
    if (lift->find("expect_Lambda_H")) {
      MatrixExpr want = parse_matrix(ph, *lift->find("expect_Lambda_H"),
                                     "expect_Lambda_H");
      if (res.phase_lam && want.rows() == res.phase_lam->m.rows() &&
          want.cols() == res.phase_lam->m.cols()) {
        for (int a = 0; a < want.rows(); ++a)
          for (int b = 0; b < want.cols(); ++b)
            rep.add_equiv(ph,
                          "declared phase deformation [" + std::to_string(a + 1) +
                              "," + std::to_string(b + 1) + "]",
                          "phase deformation matches the declared form",
                          res.phase_lam->m.at(a, b), want.at(a, b), pf.cfg);
      } else {
        rep.add("declared phase deformation",
                "phase deformation matches the declared form", Verdict::Fail)
            .detail = "pipeline produced no phase deformation of that shape";
      }
    }
  }

  if (const PValue* rsec = pf.root.find("reduction_input")) {
    ReductionInput in;
    in.w = parse_vector(st, need(*rsec, "w", "[reduction_input]"), "w");
    if (rsec->find("w_names"))
      in.w_names = str_list(*rsec->find("w_names"), "w_names");
    else if (in.w.size() == 1)
      in.w_names = {"w"};
    else
      for (std::size_t j = 0; j < in.w.size(); ++j)
        in.w_names.push_back("w" + std::to_string(j + 1));
    if (rsec->find("zeta_name"))
      in.zeta_name = need_str(*rsec, "zeta_name", "[reduction_input]");
    in.zeta = parse_expr(st, need(*rsec, "zeta", "[reduction_input]"), "zeta");
    in.Ltilde_text = need_str(*rsec, "Ltilde", "[reduction_input]");
    PartialReductionResult red = reduce_by_invariants(st, lag, X, lam, in, pf.cfg);
    rep.absorb(red.report, "reduction");
    if (rsec->find("expect_reduced")) {
      if (red.degenerate)
        rep.add("declared reduced equation", "reduced equation matches the declared form",
                Verdict::Fail)
            .detail = "the reduced form is degenerate";
      else
        rep.add_equiv(st, "declared reduced equation",
                      "reduced equation matches the declared form",
                      red.reduced_equation,
                      parse_expr(st, *rsec->find("expect_reduced"), "expect_reduced"),
                      pf.cfg);
    }
  }
  return rep;
}

inline VerificationReport verify_hamiltonian(const ProblemFile& pf) {
  const SymbolTable& st = pf.st;
  const int m = static_cast<int>(st.states().size());
  VerificationReport rep;
  rep.problem = pf.name;

  const PValue& hsec = need(pf.root, "hamiltonian", "problem file");
  HamiltonianSystem hs{parse_expr(st, need(hsec, "H", "[hamiltonian]"), "H")};
  const PValue& sym = need(pf.root, "symmetry", "problem file");
  std::vector<Expr> Phi = parse_vector(st, need(sym, "Phi", "[symmetry]"), "Phi");
  LambdaMatrix lam = load_deformation(st, sym, m);

  DynamicalSystem ds{hamilton_equations(st, hs)};
  VectorField X{Phi, std::nullopt};
  rep.absorb(check_deformed_symmetry(st, ds, X, lam, pf.cfg), "symmetry");

  std::optional<Expr> G;
  try {
    GeneratingFunctionResult gr = find_generating_function(st, Phi, pf.cfg);
    rep.absorb(gr.report, "generating function");
    G = gr.G;
  } catch (const ReconstructionUnsupportedError& e) {
    rep.add_skip("generating function", "Phi = J grad G", e.what());
  }
  if (G) {
    rep.absorb(check_gradient_deviation(st, hs, Phi, lam, *G, pf.cfg), "gradient law");
    if (sym.find("gamma"))
      rep.absorb(check_separated_evolution(st, hs, *G,
                                           need_str(sym, "gamma", "[symmetry]"), pf.cfg),
                 "separated evolution");
    if (hsec.find("expect_G"))
      rep.add_equiv(st, "declared generating function", "G matches the declared form",
                    *G, parse_expr(st, *hsec.find("expect_G"), "expect_G"), pf.cfg);
  }
  rep.absorb(check_divergence_deviation(st, hs, Phi, lam, pf.cfg), "divergence law");
  return rep;
}

inline VerificationReport verify_field(const ProblemFile& pf) {
  const SymbolTable& st = pf.st;
  const std::size_t s = st.indep_vars().size();
  const std::size_t n = st.states().size();
  VerificationReport rep;
  rep.problem = pf.name;

  const PValue& fsec = need(pf.root, "field", "problem file");
  Expr L = parse_expr(st, need(fsec, "L", "[field]"), "L");
  const PValue& sym = need(pf.root, "symmetry", "problem file");
  FieldVectorField X{parse_vector(st, need(sym, "phi", "[symmetry]"), "phi"),
                     std::nullopt};
  if (sym.find("xi")) X.xi = parse_vector(st, *sym.find("xi"), "xi");

  std::vector<MatrixExpr> lams;
  for (std::size_t i = 0; i < s; ++i) {
    std::string key = "Lambda" + std::to_string(i + 1);
    if (const PValue* v = sym.find(key))
      lams.push_back(parse_matrix(st, *v, key));
    else
      lams.push_back(MatrixExpr::zero(static_cast<int>(n), static_cast<int>(n)));
  }

  rep.absorb(check_compatibility(st, lams, pf.cfg), "compatibility");
  rep.absorb(check_deformed_field_invariance(st, L, X, lams, pf.cfg), "invariance");
  ConservationResult cons = check_conservation(st, L, X, lams, pf.cfg);
  rep.absorb(cons.report, "conservation");

  if (fsec.find("expect_P")) {
    std::vector<Expr> want = parse_vector(st, *fsec.find("expect_P"), "expect_P");
    if (want.size() != s)
      throw SyntaxError("expect_P must list one current per independent variable",
                        fsec.find("expect_P")->line);
    for (std::size_t i = 0; i < s; ++i)
      rep.add_equiv(st, "declared current [" + st.indep_vars()[i] + "]",
                    "current matches the declared form", cons.currents.P[i], want[i],
                    pf.cfg);
  }
  if (fsec.find("expect_divP")) {
    Expr want = parse_expr(st, *fsec.find("expect_divP"), "expect_divP");
    Expr div = Expr::num(0.0);
    for (std::size_t i = 0; i < s; ++i)
      div = Expr::add(div, total_derivative(st, cons.currents.P[i], st.indep_vars()[i]));
    EquivResult er =
        el_projected_zero(st, L, simplify(Expr::sub(div, want)), pf.cfg);
    rep.add_result("declared current divergence",
                   "sum_i D_i P_i matches the declared form on shell", er);
  }
  if (fsec.find("expect_EL")) {
    std::vector<Expr> want = parse_vector(st, *fsec.find("expect_EL"), "expect_EL");
    // the declared equation may differ by a stated nonvanishing factor
    Expr factor = fsec.find("el_factor")
                      ? parse_expr(st, *fsec.find("el_factor"), "el_factor")
                      : Expr::num(1.0);
    std::vector<Expr> els = field_euler_lagrange(st, L);
    if (want.size() != n)
      throw SyntaxError("expect_EL must list one equation per field",
                        fsec.find("expect_EL")->line);
    for (std::size_t a = 0; a < n; ++a)
      rep.add_equiv(st, "declared field equation [" + st.states()[a] + "]",
                    "variational equation matches the declared form", els[a],
                    simplify(Expr::mul(factor, want[a])), pf.cfg);
  }

  if (const PValue* cand = pf.root.find("candidates")) {
    if (cand->find("gamma")) {
      MatrixExpr gamma = parse_matrix(st, *cand->find("gamma"), "gamma");
      rep.absorb(check_gamma_factorization(st, gamma, lams, pf.cfg), "factorization");
      rep.absorb(check_factorized_divergence(st, L, X, lams, gamma, pf.cfg),
                 "factorized divergence");
      GaugeFieldResult gf = gauge_equivalent_field(st, L, X, lams, gamma, pf.cfg);
      rep.absorb(gf.report, "gauge");
      if (fsec.find("expect_P_tilde")) {
        std::vector<Expr> want =
            parse_vector(st, *fsec.find("expect_P_tilde"), "expect_P_tilde");
        if (want.size() != s)
          throw SyntaxError("expect_P_tilde must list one current per independent variable",
                            fsec.find("expect_P_tilde")->line);
        for (std::size_t i = 0; i < s; ++i)
          rep.add_equiv(st, "declared gauge current [" + st.indep_vars()[i] + "]",
                        "gauge current matches the declared form", gf.P[i], want[i],
                        pf.cfg);
      }
    }
  }
  return rep;
}

}  // namespace detail

inline VerificationReport run_verify(const ProblemFile& pf) {
  switch (pf.kind) {
    case ProblemKind::DynSystem: return detail::verify_dynsys(pf);
    case ProblemKind::Lagrangian: return detail::verify_lagrangian(pf);
    case ProblemKind::Hamiltonian: return detail::verify_hamiltonian(pf);
    case ProblemKind::Field: return detail::verify_field(pf);
  }
  throw DimensionError("unreachable problem kind");
}

// ----------------------------------------------------------- trace driver

struct TraceOptions {
  std::optional<double> t0;
  std::optional<double> h;
  std::optional<int> steps;
  std::optional<std::vector<double>> x0;
};

struct TraceRun {
  SymbolTable table = SymbolTable::ode("t", {"u"}, 1);
  Trajectory traj;
  VerificationReport report;
};

inline TraceRun run_trace(const ProblemFile& pf, const TraceOptions& opt = {}) {
  using detail::need;
  if (pf.kind == ProblemKind::Field)
    throw SyntaxError("field problems have no time flow to trace", 0);
  double t0 = opt.t0 ? *opt.t0 : pf.trace.t0.value_or(0.0);
  std::optional<double> h = opt.h ? opt.h : pf.trace.h;
  std::optional<int> steps = opt.steps ? opt.steps : pf.trace.steps;
  std::optional<std::vector<double>> x0 = opt.x0 ? opt.x0 : pf.trace.x0;
  if (!h) throw SyntaxError("trace needs a step size 'h'", 0);
  if (!steps) throw SyntaxError("trace needs a step count 'steps'", 0);
  if (*steps < 1) throw SyntaxError("trace needs at least one step", 0);
  if (!x0) throw SyntaxError("trace needs an initial state 'x0'", 0);

  TraceRun run;
  DynamicalSystem ds;
  switch (pf.kind) {
    case ProblemKind::DynSystem: {
      run.table = pf.st;
      const PValue& sys = need(pf.root, "system", "problem file");
      ds.f = detail::parse_vector(pf.st, need(sys, "f", "[system]"), "f");
      break;
    }
    case ProblemKind::Lagrangian: {
      const PValue& lsec = need(pf.root, "lagrangian", "problem file");
      Lagrangian lag{detail::parse_expr(pf.st, need(lsec, "L", "[lagrangian]"), "L")};
      LegendreResult leg = legendre_transform(pf.st, lag, pf.cfg);
      run.table = leg.phase;
      ds.f = hamilton_equations(run.table, HamiltonianSystem{leg.H});
      break;
    }
    case ProblemKind::Hamiltonian: {
      run.table = pf.st;
      const PValue& hsec = need(pf.root, "hamiltonian", "problem file");
      HamiltonianSystem hs{
          detail::parse_expr(pf.st, need(hsec, "H", "[hamiltonian]"), "H")};
      ds.f = hamilton_equations(run.table, hs);
      break;
    }
    case ProblemKind::Field:
      throw SyntaxError("field problems have no time flow to trace", 0);
  }

  run.traj = integrate_rk4(run.table, ds, *x0, t0, *h, *steps);
  run.report.problem = pf.name;
  for (const DeviationSpec& d : pf.trace.deviations) {
    Expr q = parse(d.quantity, run.table);
    Expr rate = parse(d.rate, run.table);
    DeviationResult res = check_trace_deviation(run.table, run.traj, q, rate,
                                                d.tolerance);
    CheckRecord& rec = run.report.add(d.name, "D_t (" + d.quantity + ") = " + d.rate,
                                      res.pass ? Verdict::Pass : Verdict::Fail);
    rec.has_residual = true;
    rec.residual = res.max_abs_err;
    char buf[64];
    std::snprintf(buf, sizeof buf, "largest residual at t = %.6g", res.worst_t);
    rec.detail = buf;
    if (!res.pass) rec.witness = {{run.table.time_var(), res.worst_t}};
  }
  return run;
}

}  // namespace lamsym
