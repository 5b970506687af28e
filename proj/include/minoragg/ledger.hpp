#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "graph.hpp"
#include "json.hpp"

namespace minoragg {

struct Config {
  double bit_factor = 32.0;   // B = ceil(c * log2(n)^2)
  double log_floor = 4.0;     // log2 n is floored here so tiny graphs can still carry ids
  bool strict_bits = false;
  std::size_t n_global = 2;
  int beta_slack = 8;         // virtual node cap is ceil(log2 n) + slack
  std::size_t interest_cap_factor = 4;
  std::size_t max_violation_log = 64;

  double log2n() const { return std::max(log_floor, std::log2(static_cast<double>(std::max<std::size_t>(n_global, 2)))); }
  std::size_t budget_bits() const { return static_cast<std::size_t>(std::ceil(bit_factor * log2n() * log2n())); }
  int beta_cap() const { return static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n_global, 2))))) + beta_slack; }
};

class RoundLedger {
 public:
  long long total = 0;
  std::map<std::string, long long> phases;
  std::vector<std::string> violations;
  long long violation_count = 0;
  std::vector<std::string> stack;

  const std::string& current() const {
    static const std::string none = "unlabeled";
    return stack.empty() ? none : stack.back();
  }
  // Phases are inclusive: a round counts toward every label on the stack.
  void charge(long long own, long long overhead = 0) {
    total += own + overhead;
    if (stack.empty()) phases[current()] += own + overhead;
    for (std::size_t i = 0; i < stack.size(); ++i) {
      bool dup = false;
      for (std::size_t j = 0; j < i; ++j) dup = dup || stack[j] == stack[i];
      if (!dup) phases[stack[i]] += own + overhead;
    }
    if (overhead) phases["virtual-sim"] += overhead;
  }
  void violation(const std::string& what) {
    ++violation_count;
    if (violations.size() < 64) violations.push_back(what);
  }
  void absorb(const RoundLedger& o) {
    total += o.total;
    for (auto& [k, v] : o.phases) phases[k] += v;
    violation_count += o.violation_count;
    for (auto& v : o.violations)
      if (violations.size() < 64) violations.push_back(v);
  }
  // Parallel composition: the longest part is charged, shorter ones are padded.
  void absorb_max(const std::vector<const RoundLedger*>& parts) {
    const RoundLedger* best = nullptr;
    for (auto* p : parts)
      if (!best || p->total > best->total) best = p;
    if (!best) return;
    total += best->total;
    for (auto& [k, v] : best->phases) phases[k] += v;
    for (auto* p : parts) {
      violation_count += p->violation_count;
      for (auto& v : p->violations)
        if (violations.size() < 64) violations.push_back(v);
    }
  }
  RoundLedger child() const {
    RoundLedger c;
    c.stack = stack;
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["total_rounds"] = total;
    j["phases"] = nlohmann::json::array();
    for (auto& [k, v] : phases)
      if (v) j["phases"].push_back({{"label", k}, {"rounds", v}});
    j["violations"] = violations;
    j["violation_count"] = violation_count;
    return j;
  }
};

inline bool trace_enabled() {
  static const bool on = [] {
    const char* s = std::getenv("MINORAGG_LOG");
    return s && *s && std::string(s) != "0";
  }();
  return on;
}

class Phase {
 public:
  Phase(RoundLedger& l, std::string label) : l_(l), start_(l.total) {
    l_.stack.push_back(std::move(label));
    if (trace_enabled()) std::cerr << std::string(2 * (l_.stack.size() - 1), ' ') << "> " << l_.stack.back() << "\n";
  }
  ~Phase() {
    if (trace_enabled())
      std::cerr << std::string(2 * (l_.stack.size() - 1), ' ') << "< " << l_.stack.back() << " +" << (l_.total - start_) << "\n";
    l_.stack.pop_back();
  }
  Phase(const Phase&) = delete;
  Phase& operator=(const Phase&) = delete;

 private:
  RoundLedger& l_;
  long long start_;
};

}  // namespace minoragg
