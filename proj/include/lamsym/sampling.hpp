#pragma once
// Randomized equivalence checking.  Two expressions are declared equivalent
// when they agree within tolerance at every sampled point of the variable
// box.  Sampling is fully deterministic: each sample index seeds its own
// generator, so inserting retries at one sample never shifts the others, and
// repeated runs with the same seed reproduce bit-identical verdicts.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "expr.hpp"
#include "symtab.hpp"

namespace lamsym {

struct SamplingConfig {
  std::uint64_t seed = 42;
  int samples = 64;
  double lo = 0.2, hi = 2.0;                                   // default box
  std::map<std::string, std::pair<double, double>> box;        // per-variable override
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  int max_retries = 200;

  std::pair<double, double> range(const std::string& var) const {
    auto it = box.find(var);
    if (it != box.end()) return it->second;
    return {lo, hi};
  }
};

struct EquivResult {
  bool pass = true;
  double max_abs_diff = 0.0;                 // over accepted samples
  std::map<std::string, double> witness;     // worst failing point (empty on pass)
  double witness_lhs = 0.0, witness_rhs = 0.0;
  int samples_used = 0;

  explicit operator bool() const { return pass; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

inline double draw_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Deterministic point source: sample index selects a generator, retries
// continue its stream.
class PointSource {
  std::vector<std::string> vars_;
  const SamplingConfig& cfg_;

 public:
  PointSource(std::vector<std::string> vars, const SamplingConfig& cfg)
      : vars_(std::move(vars)), cfg_(cfg) {}

  const std::vector<std::string>& vars() const { return vars_; }

  std::map<std::string, double> point(std::uint64_t sample_index, int attempt) const {
    std::mt19937_64 g(detail::mix_seed(cfg_.seed, sample_index));
    g.discard(static_cast<unsigned long long>(attempt) * vars_.size());
    std::map<std::string, double> out;
    for (const auto& v : vars_) {
      auto [lo, hi] = cfg_.range(v);
      out[v] = lo + detail::draw_unit(g) * (hi - lo);
    }
    return out;
  }
};

// Variables to sample for a set of expressions: free symbols minus declared
// parameters, in sorted name order.  Unknown symbols are rejected.
inline std::vector<std::string> sampled_variables(const SymbolTable& st,
                                                  const std::vector<Expr>& exprs) {
  std::set<std::string> names;
  for (const auto& e : exprs) collect_symbols(e, names);
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (!st.knows(n)) throw UnknownSymbolError(n);
    if (!st.is_param(n)) out.push_back(n);
  }
  return out;
}

inline EquivResult equiv(const SymbolTable& st, const Expr& a, const Expr& b,
                         const SamplingConfig& cfg) {
  PointSource src(sampled_variables(st, {a, b}), cfg);
  EquivResult res;
  double worst = -1.0;
  for (int i = 0; i < cfg.samples; ++i) {
    std::map<std::string, double> pt;
    double va = 0.0, vb = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
      pt = src.point(static_cast<std::uint64_t>(i), attempt);
      auto env = st.with_params(pt);
      va = eval(a, env);
      vb = eval(b, env);
      if (std::isfinite(va) && std::isfinite(vb)) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw DomainExhaustedError(
          "could not find a point where both sides evaluate finite (sample " +
          std::to_string(i) + ", " + std::to_string(cfg.max_retries) + " retries)");
    ++res.samples_used;
    double d = std::fabs(va - vb);
    res.max_abs_diff = std::max(res.max_abs_diff, d);
    double tol = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(va), std::fabs(vb));
    if (d > tol) {
      res.pass = false;
      if (d > worst) {
        worst = d;
        res.witness = pt;
        res.witness_lhs = va;
        res.witness_rhs = vb;
      }
    }
  }
  return res;
}

inline EquivResult equiv_zero(const SymbolTable& st, const Expr& a,
                              const SamplingConfig& cfg) {
  return equiv(st, a, Expr::num(0.0), cfg);
}

}  // namespace lamsym
