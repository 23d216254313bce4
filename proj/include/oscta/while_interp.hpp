#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "oscta/trace.hpp"
#include "oscta/while_ast.hpp"

namespace oscta {

// Runtime value: an integer, or (for the leakage variable of instrumented
// programs) an event list.
using Value = std::variant<long long, LeakTrace>;

struct WhileStore {
  std::map<std::string, Value> scalars;  // includes xl, initially []
  std::map<std::string, std::vector<long long>> arrays;

  // All scalars 0, all array cells 0, xl -> empty trace.
  static WhileStore zeros(const Policy& p);
  // From a JSON object {name: int | [ints]}; missing policy variables are 0.
  static WhileStore from_json_text(const Policy& p, const std::string& text);

  std::string to_json() const;
  bool equal_on(const WhileStore& other, const std::vector<std::string>& vars) const;
};

enum class RunStatus { Ok, Timeout, RuntimeError };

struct RunLimits {
  long long step_cap = 10000;
};

struct RunOutcome {
  RunStatus status = RunStatus::Ok;
  WhileStore store;
  LeakTrace trace;
  std::string error;
  long long steps = 0;
  long long branch_events = 0;
};

// Small-step execution with the labeled semantics: assignments leak the read
// indexes, array stores leak the written index then the read indexes, tests
// leak the condition value then the read indexes. A condition is true iff its
// value is exactly 1.
RunOutcome run(const WhileCmd& c, WhileStore sigma, const RunLimits& limits);

std::string render_value(const Value& v);

}  // namespace oscta
