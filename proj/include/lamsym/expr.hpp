#pragma once
// Expression kernel: immutable shared trees over named symbols.
//
// Semantics pinned by the test suite:
//  - grammar: numbers, identifiers, + - * / ^, unary minus, exp/log/sin/cos/sqrt
//  - precedence: ^ binds tighter than unary minus, which binds tighter than * /
//  - a^b with an integer-constant exponent evaluates by repeated multiplication
//    (so negative bases work); otherwise pow() with NaN for non-positive bases
//  - print() output re-parses to a structurally identical tree
//  - simplify() does conservative exact rewrites only; verification never
//    relies on it deciding equivalence

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lamsym {

// ---------------------------------------------------------------- errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
  std::size_t position;  // byte offset into the source text
  SyntaxError(const std::string& msg, std::size_t pos)
      : Error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

struct UnknownSymbolError : Error {
  std::string symbol;
  explicit UnknownSymbolError(const std::string& sym)
      : Error("unknown symbol '" + sym + "'"), symbol(sym) {}
};

struct DimensionError : Error {
  using Error::Error;
};

struct DomainExhaustedError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------- nodes

enum class Kind { Number, Symbol, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Exp, Log, Sin, Cos, Sqrt };

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

inline std::optional<Func> func_by_name(std::string_view s) {
  if (s == "exp") return Func::Exp;
  if (s == "log") return Func::Log;
  if (s == "sin") return Func::Sin;
  if (s == "cos") return Func::Cos;
  if (s == "sqrt") return Func::Sqrt;
  return std::nullopt;
}

class Expr {
  struct Node {
    Kind kind;
    double value = 0.0;       // Number
    std::string name;         // Symbol
    Func fn = Func::Exp;      // Call
    std::vector<Expr> kids;
  };
  std::shared_ptr<const Node> n_;

  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static Expr make(Node&& n) { return Expr(std::make_shared<const Node>(std::move(n))); }

 public:
  Expr() : Expr(num(0.0)) {}

  static Expr num(double v) {
    Node n;
    n.kind = Kind::Number;
    n.value = v;
    return make(std::move(n));
  }
  static Expr sym(std::string name) {
    Node n;
    n.kind = Kind::Symbol;
    n.name = std::move(name);
    return make(std::move(n));
  }
  static Expr neg(Expr a) {
    // fold numeric negation so "-3" in source and num(-3) in code agree
    if (a.kind() == Kind::Number) return num(-a.value());
    if (a.kind() == Kind::Neg) return a.kid(0);
    Node n;
    n.kind = Kind::Neg;
    n.kids = {std::move(a)};
    return make(std::move(n));
  }
  static Expr binary(Kind k, Expr a, Expr b) {
    Node n;
    n.kind = k;
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
  }
  static Expr add(Expr a, Expr b) { return binary(Kind::Add, std::move(a), std::move(b)); }
  static Expr sub(Expr a, Expr b) { return binary(Kind::Sub, std::move(a), std::move(b)); }
  static Expr mul(Expr a, Expr b) { return binary(Kind::Mul, std::move(a), std::move(b)); }
  static Expr div(Expr a, Expr b) { return binary(Kind::Div, std::move(a), std::move(b)); }
  static Expr pow(Expr a, Expr b) { return binary(Kind::Pow, std::move(a), std::move(b)); }
  static Expr call(Func f, Expr a) {
    Node n;
    n.kind = Kind::Call;
    n.fn = f;
    n.kids = {std::move(a)};
    return make(std::move(n));
  }

  Kind kind() const { return n_->kind; }
  double value() const { return n_->value; }
  const std::string& name() const { return n_->name; }
  Func fn() const { return n_->fn; }
  const Expr& kid(int i) const { return n_->kids[static_cast<std::size_t>(i)]; }
  int nkids() const { return static_cast<int>(n_->kids.size()); }

  bool is_num() const { return kind() == Kind::Number; }
  bool is_num(double v) const { return kind() == Kind::Number && value() == v; }

  bool same_node(const Expr& o) const { return n_ == o.n_; }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.n_ == b.n_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::Number: return a.value() == b.value();
      case Kind::Symbol: return a.name() == b.name();
      case Kind::Call:
        if (a.fn() != b.fn()) return false;
        break;
      default: break;
    }
    if (a.nkids() != b.nkids()) return false;
    for (int i = 0; i < a.nkids(); ++i)
      if (!(a.kid(i) == b.kid(i))) return false;
    return true;
  }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
};

inline Expr operator-(Expr a) { return Expr::neg(std::move(a)); }
inline Expr operator+(Expr a, Expr b) { return Expr::add(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::sub(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::mul(std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::div(std::move(a), std::move(b)); }

// ---------------------------------------------------------------- parsing

namespace detail {

struct Token {
  enum Type { Num, Ident, Op, End } type;
  double num = 0.0;
  std::string text;
  std::size_t pos = 0;
};

class Lexer {
  std::string_view src_;
  std::size_t i_ = 0;

 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    Token t;
    t.pos = i_;
    if (i_ >= src_.size()) {
      t.type = Token::End;
      return t;
    }
    char c = src_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
      std::size_t j = i_;
      while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
      if (j < src_.size() && src_[j] == '.') {
        ++j;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
      }
      if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
        if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
          ++k;
          while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
          j = k;
        }
      }
      double v = 0.0;
      auto res = std::from_chars(src_.data() + i_, src_.data() + j, v);
      if (res.ec != std::errc()) throw SyntaxError("bad numeric literal", i_);
      t.type = Token::Num;
      t.num = v;
      t.text = std::string(src_.substr(i_, j - i_));
      i_ = j;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[j])) ||
                                 src_[j] == '_'))
        ++j;
      t.type = Token::Ident;
      t.text = std::string(src_.substr(i_, j - i_));
      i_ = j;
      return t;
    }
    if (std::string_view("+-*/^(),").find(c) != std::string_view::npos) {
      t.type = Token::Op;
      t.text = std::string(1, c);
      ++i_;
      return t;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", i_);
  }
};

class Parser {
  Lexer lex_;
  Token cur_;

  void advance() { cur_ = lex_.next(); }
  bool is_op(const char* s) const { return cur_.type == Token::Op && cur_.text == s; }
  void expect_op(const char* s) {
    if (!is_op(s))
      throw SyntaxError(std::string("expected '") + s + "'", cur_.pos);
    advance();
  }

 public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  Expr parse_all() {
    Expr e = parse_sum();
    if (cur_.type != Token::End)
      throw SyntaxError("unexpected trailing input '" + cur_.text + "'", cur_.pos);
    return e;
  }

  Expr parse_sum() {
    Expr e = parse_product();
    while (is_op("+") || is_op("-")) {
      bool plus = cur_.text == "+";
      advance();
      Expr rhs = parse_product();
      e = plus ? Expr::add(std::move(e), std::move(rhs))
               : Expr::sub(std::move(e), std::move(rhs));
    }
    return e;
  }

  Expr parse_product() {
    Expr e = parse_unary();
    while (is_op("*") || is_op("/")) {
      bool times = cur_.text == "*";
      advance();
      Expr rhs = parse_unary();
      e = times ? Expr::mul(std::move(e), std::move(rhs))
                : Expr::div(std::move(e), std::move(rhs));
    }
    return e;
  }

  Expr parse_unary() {
    if (is_op("-")) {
      advance();
      return Expr::neg(parse_unary());
    }
    if (is_op("+")) {  // tolerated unary plus
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  // '^' is right-associative and binds tighter than unary minus; the exponent
  // itself may carry a sign: x^-2
  Expr parse_power() {
    Expr base = parse_atom();
    if (is_op("^")) {
      advance();
      Expr exponent = parse_unary();
      return Expr::pow(std::move(base), std::move(exponent));
    }
    return base;
  }

  Expr parse_atom() {
    if (cur_.type == Token::Num) {
      double v = cur_.num;
      advance();
      return Expr::num(v);
    }
    if (cur_.type == Token::Ident) {
      std::string name = cur_.text;
      std::size_t pos = cur_.pos;
      advance();
      if (is_op("(")) {
        advance();
        std::vector<Expr> args;
        args.push_back(parse_sum());
        while (is_op(",")) {
          advance();
          args.push_back(parse_sum());
        }
        expect_op(")");
        auto f = func_by_name(name);
        if (!f) throw SyntaxError("unknown function '" + name + "'", pos);
        if (args.size() != 1)
          throw SyntaxError("function '" + name + "' takes one argument", pos);
        return Expr::call(*f, std::move(args[0]));
      }
      return Expr::sym(std::move(name));
    }
    if (is_op("(")) {
      advance();
      Expr e = parse_sum();
      expect_op(")");
      return e;
    }
    throw SyntaxError("expected a number, symbol, or '('", cur_.pos);
  }
};

}  // namespace detail

// Parse without symbol validation (building block; prefer the table overload).
inline Expr parse_raw(std::string_view text) {
  detail::Parser p(text);
  return p.parse_all();
}

// ---------------------------------------------------------------- traversal

inline void collect_symbols(const Expr& e, std::set<std::string>& out) {
  if (e.kind() == Kind::Symbol) {
    out.insert(e.name());
    return;
  }
  for (int i = 0; i < e.nkids(); ++i) collect_symbols(e.kid(i), out);
}

inline std::set<std::string> free_symbols(const Expr& e) {
  std::set<std::string> out;
  collect_symbols(e, out);
  return out;
}

// Simultaneous substitution of symbols; replacements are not re-scanned.
// No simplification is performed, so evaluation commutes with substitution
// bit-for-bit.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
  switch (e.kind()) {
    case Kind::Number: return e;
    case Kind::Symbol: {
      auto it = repl.find(e.name());
      return it == repl.end() ? e : it->second;
    }
    default: break;
  }
  std::vector<Expr> kids;
  kids.reserve(static_cast<std::size_t>(e.nkids()));
  bool changed = false;
  for (int i = 0; i < e.nkids(); ++i) {
    kids.push_back(substitute(e.kid(i), repl));
    if (!kids.back().same_node(e.kid(i))) changed = true;
  }
  if (!changed) return e;
  switch (e.kind()) {
    case Kind::Neg: return Expr::neg(std::move(kids[0]));
    case Kind::Add: return Expr::add(std::move(kids[0]), std::move(kids[1]));
    case Kind::Sub: return Expr::sub(std::move(kids[0]), std::move(kids[1]));
    case Kind::Mul: return Expr::mul(std::move(kids[0]), std::move(kids[1]));
    case Kind::Div: return Expr::div(std::move(kids[0]), std::move(kids[1]));
    case Kind::Pow: return Expr::pow(std::move(kids[0]), std::move(kids[1]));
    case Kind::Call: return Expr::call(e.fn(), std::move(kids[0]));
    default: return e;  // unreachable
  }
}

// ---------------------------------------------------------------- evaluation

namespace detail {

inline bool integer_exponent(double v, long long& out) {
  if (!std::isfinite(v)) return false;
  if (v != std::nearbyint(v)) return false;
  if (std::fabs(v) > 1e6) return false;
  out = static_cast<long long>(v);
  return true;
}

inline double pow_semantics(double a, double b, const Expr* exponent_node) {
  long long n;
  bool is_int = false;
  if (exponent_node && exponent_node->is_num() &&
      integer_exponent(exponent_node->value(), n)) {
    is_int = true;
  }
  if (is_int) {
    // repeated multiplication: exact for small powers, defined for a <= 0
    double acc = 1.0;
    long long k = n < 0 ? -n : n;
    for (long long i = 0; i < k; ++i) acc *= a;
    return n < 0 ? 1.0 / acc : acc;
  }
  if (a > 0.0) return std::pow(a, b);
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline double eval(const Expr& e, const std::map<std::string, double>& env) {
  switch (e.kind()) {
    case Kind::Number: return e.value();
    case Kind::Symbol: {
      auto it = env.find(e.name());
      if (it == env.end()) throw UnknownSymbolError(e.name());
      return it->second;
    }
    case Kind::Neg: return -eval(e.kid(0), env);
    case Kind::Add: return eval(e.kid(0), env) + eval(e.kid(1), env);
    case Kind::Sub: return eval(e.kid(0), env) - eval(e.kid(1), env);
    case Kind::Mul: return eval(e.kid(0), env) * eval(e.kid(1), env);
    case Kind::Div: return eval(e.kid(0), env) / eval(e.kid(1), env);
    case Kind::Pow: {
      double a = eval(e.kid(0), env);
      double b = eval(e.kid(1), env);
      return detail::pow_semantics(a, b, &e.kid(1));
    }
    case Kind::Call: {
      double a = eval(e.kid(0), env);
      switch (e.fn()) {
        case Func::Exp: return std::exp(a);
        case Func::Log: return std::log(a);
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Sqrt: return std::sqrt(a);
      }
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------- printing

namespace detail {

inline int print_prec(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number: return e.value() < 0 ? 30 : 100;  // negative literals print a sign
    case Kind::Symbol:
    case Kind::Call: return 100;
    case Kind::Pow: return 40;
    case Kind::Neg: return 30;
    case Kind::Mul:
    case Kind::Div: return 20;
    case Kind::Add:
    case Kind::Sub: return 10;
  }
  return 100;
}

inline std::string print_number(double v) {
  if (std::isfinite(v) && std::fabs(v) < 1e15 && v == static_cast<long long>(v)) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void print_rec(const Expr& e, int min_prec, std::string& out) {
  int prec = print_prec(e);
  bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (e.kind()) {
    case Kind::Number: out += print_number(e.value()); break;
    case Kind::Symbol: out += e.name(); break;
    case Kind::Neg:
      out += '-';
      print_rec(e.kid(0), 30, out);
      break;
    case Kind::Add:
      print_rec(e.kid(0), 10, out);
      out += " + ";
      print_rec(e.kid(1), 11, out);
      break;
    case Kind::Sub:
      print_rec(e.kid(0), 10, out);
      out += " - ";
      print_rec(e.kid(1), 11, out);
      break;
    case Kind::Mul:
      print_rec(e.kid(0), 20, out);
      out += '*';
      print_rec(e.kid(1), 21, out);
      break;
    case Kind::Div:
      print_rec(e.kid(0), 20, out);
      out += '/';
      print_rec(e.kid(1), 21, out);
      break;
    case Kind::Pow:
      print_rec(e.kid(0), 41, out);
      out += '^';
      print_rec(e.kid(1), 30, out);
      break;
    case Kind::Call:
      out += func_name(e.fn());
      out += '(';
      print_rec(e.kid(0), 0, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace detail

inline std::string print(const Expr& e) {
  std::string out;
  detail::print_rec(e, 0, out);
  return out;
}

// ---------------------------------------------------------------- simplify

// Conservative exact rewriting: constant folding and unit/zero identities.
// Intentionally no reassociation of symbolic terms and no cancellation beyond
// structurally identical subtraction. Results are for readability and smaller
// trees; equivalence verdicts always go through sampling.
inline Expr simplify(const Expr& e) {
  if (e.kind() == Kind::Number || e.kind() == Kind::Symbol) return e;

  std::vector<Expr> k;
  k.reserve(static_cast<std::size_t>(e.nkids()));
  for (int i = 0; i < e.nkids(); ++i) k.push_back(simplify(e.kid(i)));

  switch (e.kind()) {
    case Kind::Neg: {
      return Expr::neg(k[0]);  // factory folds Neg(Num) and Neg(Neg)
    }
    case Kind::Add: {
      if (k[0].is_num() && k[1].is_num()) return Expr::num(k[0].value() + k[1].value());
      if (k[0].is_num(0.0)) return k[1];
      if (k[1].is_num(0.0)) return k[0];
      if (k[1].kind() == Kind::Neg) return simplify(Expr::sub(k[0], k[1].kid(0)));
      return Expr::add(k[0], k[1]);
    }
    case Kind::Sub: {
      if (k[0].is_num() && k[1].is_num()) return Expr::num(k[0].value() - k[1].value());
      if (k[1].is_num(0.0)) return k[0];
      if (k[0].is_num(0.0)) return Expr::neg(k[1]);
      if (k[0] == k[1]) return Expr::num(0.0);
      if (k[1].kind() == Kind::Neg) return simplify(Expr::add(k[0], k[1].kid(0)));
      return Expr::sub(k[0], k[1]);
    }
    case Kind::Mul: {
      if (k[0].is_num() && k[1].is_num()) return Expr::num(k[0].value() * k[1].value());
      if (k[0].is_num(0.0) || k[1].is_num(0.0)) return Expr::num(0.0);
      if (k[0].is_num(1.0)) return k[1];
      if (k[1].is_num(1.0)) return k[0];
      if (k[0].is_num(-1.0)) return Expr::neg(k[1]);
      if (k[1].is_num(-1.0)) return Expr::neg(k[0]);
      // keep a lone numeric factor on the left, coalesce numeric factors
      if (k[1].is_num()) std::swap(k[0], k[1]);
      if (k[0].is_num()) {
        if (k[1].kind() == Kind::Mul && k[1].kid(0).is_num())
          return simplify(Expr::mul(Expr::num(k[0].value() * k[1].kid(0).value()),
                                    k[1].kid(1)));
        if (k[1].kind() == Kind::Neg)
          return simplify(Expr::mul(Expr::num(-k[0].value()), k[1].kid(0)));
      }
      if (k[0].kind() == Kind::Neg && k[1].kind() == Kind::Neg)
        return simplify(Expr::mul(k[0].kid(0), k[1].kid(0)));
      return Expr::mul(k[0], k[1]);
    }
    case Kind::Div: {
      if (k[0].is_num() && k[1].is_num() && k[1].value() != 0.0)
        return Expr::num(k[0].value() / k[1].value());
      if (k[0].is_num(0.0)) return Expr::num(0.0);
      if (k[1].is_num(1.0)) return k[0];
      if (k[1].is_num(-1.0)) return Expr::neg(k[0]);
      if (k[0].kind() == Kind::Mul && k[0].kid(0).is_num() && k[1].is_num() &&
          k[1].value() != 0.0)
        return simplify(
            Expr::mul(Expr::num(k[0].kid(0).value() / k[1].value()), k[0].kid(1)));
      return Expr::div(k[0], k[1]);
    }
    case Kind::Pow: {
      if (k[1].is_num(1.0)) return k[0];
      if (k[1].is_num(0.0)) return Expr::num(1.0);
      if (k[0].is_num(1.0)) return Expr::num(1.0);
      if (k[0].is_num() && k[1].is_num()) {
        double v = detail::pow_semantics(k[0].value(), k[1].value(), &k[1]);
        if (std::isfinite(v)) return Expr::num(v);
      }
      return Expr::pow(k[0], k[1]);
    }
    case Kind::Call: {
      if (k[0].is_num()) {
        double v = eval(Expr::call(e.fn(), k[0]), {});
        if (std::isfinite(v)) return Expr::num(v);
      }
      if (e.fn() == Func::Exp && k[0].is_num(0.0)) return Expr::num(1.0);
      if (e.fn() == Func::Log && k[0].is_num(1.0)) return Expr::num(0.0);
      return Expr::call(e.fn(), k[0]);
    }
    default: return e;
  }
}

// ---------------------------------------------------------------- derivative

// Partial derivative with respect to a named symbol; result is simplified.
inline Expr diff(const Expr& e, const std::string& var) {
  switch (e.kind()) {
    case Kind::Number: return Expr::num(0.0);
    case Kind::Symbol: return Expr::num(e.name() == var ? 1.0 : 0.0);
    case Kind::Neg: return simplify(Expr::neg(diff(e.kid(0), var)));
    case Kind::Add: return simplify(Expr::add(diff(e.kid(0), var), diff(e.kid(1), var)));
    case Kind::Sub: return simplify(Expr::sub(diff(e.kid(0), var), diff(e.kid(1), var)));
    case Kind::Mul: {
      const Expr& a = e.kid(0);
      const Expr& b = e.kid(1);
      return simplify(Expr::add(Expr::mul(diff(a, var), b), Expr::mul(a, diff(b, var))));
    }
    case Kind::Div: {
      const Expr& a = e.kid(0);
      const Expr& b = e.kid(1);
      return simplify(Expr::div(
          Expr::sub(Expr::mul(diff(a, var), b), Expr::mul(a, diff(b, var))),
          Expr::pow(b, Expr::num(2.0))));
    }
    case Kind::Pow: {
      const Expr& a = e.kid(0);
      const Expr& b = e.kid(1);
      if (b.is_num()) {
        double n = b.value();
        return simplify(Expr::mul(
            Expr::mul(Expr::num(n), Expr::pow(a, Expr::num(n - 1.0))), diff(a, var)));
      }
      // a^b * (b' log a + b a'/a)
      Expr da = diff(a, var);
      Expr db = diff(b, var);
      Expr inner = Expr::add(Expr::mul(db, Expr::call(Func::Log, a)),
                             Expr::div(Expr::mul(b, da), a));
      return simplify(Expr::mul(e, inner));
    }
    case Kind::Call: {
      const Expr& a = e.kid(0);
      Expr da = diff(a, var);
      Expr outer;
      switch (e.fn()) {
        case Func::Exp: outer = Expr::call(Func::Exp, a); break;
        case Func::Log: return simplify(Expr::div(da, a));
        case Func::Sin: outer = Expr::call(Func::Cos, a); break;
        case Func::Cos: outer = Expr::neg(Expr::call(Func::Sin, a)); break;
        case Func::Sqrt:
          return simplify(
              Expr::div(da, Expr::mul(Expr::num(2.0), Expr::call(Func::Sqrt, a))));
      }
      return simplify(Expr::mul(outer, da));
    }
  }
  return Expr::num(0.0);
}

// ---------------------------------------------------------------- antiderivative

// Best-effort antiderivative in one variable for the restricted shapes needed
// by line integration of gradient fields: sums/differences, constants times a
// supported shape, powers v^n, 1/v, log/exp/sin/cos of the bare variable.
// Returns nullopt for anything else.
inline std::optional<Expr> antiderivative(const Expr& e, const std::string& var) {
  auto depends = [&](const Expr& x) { return free_symbols(x).count(var) > 0; };
  if (!depends(e)) return Expr::mul(e, Expr::sym(var));
  switch (e.kind()) {
    case Kind::Symbol:
      // e == var here (otherwise handled above)
      return Expr::div(Expr::pow(Expr::sym(var), Expr::num(2.0)), Expr::num(2.0));
    case Kind::Neg: {
      auto a = antiderivative(e.kid(0), var);
      if (!a) return std::nullopt;
      return Expr::neg(*a);
    }
    case Kind::Add: {
      auto a = antiderivative(e.kid(0), var);
      auto b = antiderivative(e.kid(1), var);
      if (!a || !b) return std::nullopt;
      return Expr::add(*a, *b);
    }
    case Kind::Sub: {
      auto a = antiderivative(e.kid(0), var);
      auto b = antiderivative(e.kid(1), var);
      if (!a || !b) return std::nullopt;
      return Expr::sub(*a, *b);
    }
    case Kind::Mul: {
      if (!depends(e.kid(0))) {
        auto b = antiderivative(e.kid(1), var);
        if (!b) return std::nullopt;
        return Expr::mul(e.kid(0), *b);
      }
      if (!depends(e.kid(1))) {
        auto a = antiderivative(e.kid(0), var);
        if (!a) return std::nullopt;
        return Expr::mul(*a, e.kid(1));
      }
      return std::nullopt;
    }
    case Kind::Div: {
      if (!depends(e.kid(1))) {
        auto a = antiderivative(e.kid(0), var);
        if (!a) return std::nullopt;
        return Expr::div(*a, e.kid(1));
      }
      // c / v^n and c / v with v-free numerator
      if (!depends(e.kid(0))) {
        const Expr& d = e.kid(1);
        if (d.kind() == Kind::Symbol && d.name() == var)
          return Expr::mul(e.kid(0), Expr::call(Func::Log, d));
        if (d.kind() == Kind::Pow && d.kid(0).kind() == Kind::Symbol &&
            d.kid(0).name() == var && d.kid(1).is_num()) {
          double n = d.kid(1).value();
          if (n == 1.0)
            return Expr::mul(e.kid(0), Expr::call(Func::Log, d.kid(0)));
          // c * v^(1-n) / (1-n)
          return Expr::div(
              Expr::mul(e.kid(0), Expr::pow(d.kid(0), Expr::num(1.0 - n))),
              Expr::num(1.0 - n));
        }
      }
      return std::nullopt;
    }
    case Kind::Pow: {
      if (e.kid(0).kind() == Kind::Symbol && e.kid(0).name() == var &&
          e.kid(1).is_num()) {
        double n = e.kid(1).value();
        if (n == -1.0) return Expr::call(Func::Log, e.kid(0));
        return Expr::div(Expr::pow(e.kid(0), Expr::num(n + 1.0)), Expr::num(n + 1.0));
      }
      return std::nullopt;
    }
    case Kind::Call: {
      if (e.kid(0).kind() != Kind::Symbol || e.kid(0).name() != var) return std::nullopt;
      Expr v = e.kid(0);
      switch (e.fn()) {
        case Func::Exp: return Expr::call(Func::Exp, v);
        case Func::Log:
          return Expr::sub(Expr::mul(v, Expr::call(Func::Log, v)), v);
        case Func::Sin: return Expr::neg(Expr::call(Func::Cos, v));
        case Func::Cos: return Expr::call(Func::Sin, v);
        case Func::Sqrt:
          return Expr::div(Expr::mul(Expr::num(2.0), Expr::pow(v, Expr::num(1.5))),
                           Expr::num(3.0));
      }
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

}  // namespace lamsym
