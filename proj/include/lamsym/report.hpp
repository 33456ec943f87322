#pragma once
// Verification reports: an ordered list of named checks, each with a verdict,
// the residual magnitude observed, and a witness point when something failed.
// Renders as aligned text or as JSON with a stable key order.

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sampling.hpp"

namespace lamsym {

enum class Verdict { Pass, Fail, Skipped };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Skipped: return "SKIPPED";
  }
  return "?";
}

struct CheckRecord {
  std::string name;    // which check, instantiated ("determining equation [u1]")
  std::string anchor;  // the formula the check enforces, as a display string
  Verdict verdict = Verdict::Pass;
  bool has_residual = false;
  double residual = 0.0;
  std::map<std::string, double> witness;  // empty unless failing
  std::string detail;                     // free-form annotation
};

struct VerificationReport {
  std::string problem;
  std::vector<CheckRecord> checks;
  // synthesized quantities worth echoing back (momenta, charges, ...)
  std::vector<std::pair<std::string, std::string>> quantities;

  bool overall() const {
    for (const auto& c : checks)
      if (c.verdict == Verdict::Fail) return false;
    return true;
  }

  CheckRecord& add(std::string name, std::string anchor, Verdict v) {
    CheckRecord r;
    r.name = std::move(name);
    r.anchor = std::move(anchor);
    r.verdict = v;
    checks.push_back(std::move(r));
    return checks.back();
  }

  CheckRecord& add_result(std::string name, std::string anchor, const EquivResult& er) {
    CheckRecord& r = add(std::move(name), std::move(anchor),
                         er.pass ? Verdict::Pass : Verdict::Fail);
    r.has_residual = true;
    r.residual = er.max_abs_diff;
    if (!er.pass) r.witness = er.witness;
    return r;
  }

  // Run an equivalence check and record it.
  CheckRecord& add_equiv(const SymbolTable& st, std::string name, std::string anchor,
                         const Expr& lhs, const Expr& rhs, const SamplingConfig& cfg) {
    return add_result(std::move(name), std::move(anchor), equiv(st, lhs, rhs, cfg));
  }

  CheckRecord& add_skip(std::string name, std::string anchor, std::string why) {
    CheckRecord& r = add(std::move(name), std::move(anchor), Verdict::Skipped);
    r.detail = std::move(why);
    return r;
  }

  void note_quantity(std::string label, std::string value) {
    quantities.emplace_back(std::move(label), std::move(value));
  }
  void note_quantity(std::string label, const Expr& e) {
    quantities.emplace_back(std::move(label), print(e));
  }

  void absorb(const VerificationReport& other, const std::string& prefix = "") {
    for (auto c : other.checks) {
      if (!prefix.empty()) c.name = prefix + ": " + c.name;
      checks.push_back(std::move(c));
    }
    for (auto q : other.quantities) {
      if (!prefix.empty()) q.first = prefix + ": " + q.first;
      quantities.push_back(std::move(q));
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "problem: " << problem << "\n";
    if (!quantities.empty()) {
      os << "quantities:\n";
      for (const auto& q : quantities) os << "  " << q.first << " = " << q.second << "\n";
    }
    os << "checks:\n";
    for (const auto& c : checks) {
      os << "  [" << verdict_name(c.verdict) << "] " << c.name;
      if (!c.anchor.empty()) os << "  {" << c.anchor << "}";
      if (c.has_residual) {
        os << "  residual=";
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.3g", c.residual);
        os << buf;
      }
      os << "\n";
      if (!c.witness.empty()) {
        os << "      witness:";
        for (const auto& w : c.witness) {
          char buf[48];
          std::snprintf(buf, sizeof(buf), " %s=%.6g", w.first.c_str(), w.second);
          os << buf;
        }
        os << "\n";
      }
      if (!c.detail.empty()) os << "      note: " << c.detail << "\n";
    }
    os << "overall: " << (overall() ? "PASS" : "FAIL") << "\n";
    return os.str();
  }

  std::string to_json() const {
    nlohmann::ordered_json j;
    j["problem"] = problem;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
      nlohmann::ordered_json jc;
      jc["name"] = c.name;
      jc["anchor"] = c.anchor;
      jc["verdict"] = verdict_name(c.verdict);
      if (c.has_residual)
        jc["residual"] = c.residual;
      else
        jc["residual"] = nullptr;
      if (c.witness.empty()) {
        jc["witness"] = nullptr;
      } else {
        nlohmann::ordered_json w;
        for (const auto& kv : c.witness) w[kv.first] = kv.second;
        jc["witness"] = w;
      }
      if (!c.detail.empty()) jc["detail"] = c.detail;
      j["checks"].push_back(std::move(jc));
    }
    j["overall"] = overall() ? "PASS" : "FAIL";
    return j.dump(2) + "\n";
  }
};

}  // namespace lamsym
