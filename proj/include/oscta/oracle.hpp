#pragma once

#include <optional>

#include "oscta/ir_interp.hpp"
#include "oscta/while_interp.hpp"

namespace oscta {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exhaustive enumeration parameters for the dynamic checks.
struct EnumSpec {
  int domain = 2;              // cell values range over 0..domain-1
  long long step_cap = 10000;
  long long budget = 1 << 16;  // max number of enumerated stores
  std::map<std::string, long long> pins;  // scalar variables pinned to a value
};

struct OracleStats {
  long long stores = 0;
  long long ok_runs = 0;
  long long timeouts = 0;
  long long runtime_errors = 0;
  long long comparisons = 0;
};

struct OsniCounterexample {
  WhileStore sigma, rho;
  std::string variable;  // first X_L variable that differs
};

struct OsniResult {
  std::optional<OsniCounterexample> counterexample;
  OracleStats stats;
  bool holds() const { return !counterexample.has_value(); }
};

struct OsctCounterexample {
  WhileStore sigma, rho;
  size_t position = 0;  // first differing trace index (or min length)
  LeakTrace trace_sigma, trace_rho;
};

struct OsctResult {
  std::optional<OsctCounterexample> counterexample;
  OracleStats stats;
  bool holds() const { return !counterexample.has_value(); }
};

// Def. 2.1: all pairs of terminating runs from X_I-equivalent stores whose
// final stores agree on X_O must agree on X_L.
OsniResult check_osni(const Policy& policy, const WhileCmd& c, const EnumSpec& spec);

// Def. 3.2: same quantification, but the leak traces must be identical.
OsctResult check_osct(const Policy& policy, const WhileCmd& c, const EnumSpec& spec);

struct IrOsctCounterexample {
  std::map<std::string, std::vector<long long>> mem_sigma, mem_rho;
  size_t position = 0;
  LeakTrace trace_sigma, trace_rho;
};

struct IrOsctResult {
  std::optional<IrOsctCounterexample> counterexample;
  OracleStats stats;
  bool holds() const { return !counterexample.has_value(); }
};

// Def. 3.2 over the IR semantics: initial memories enumerated, X_I ⊆ blocks,
// X_O over final registers and blocks.
IrOsctResult check_osct_ir(const IrProgram& p, const IrPolicy& policy, const EnumSpec& spec);

}  // namespace oscta
