#pragma once

#include <map>
#include <variant>

#include "oscta/ir.hpp"
#include "oscta/trace.hpp"
#include "oscta/while_interp.hpp"  // RunStatus, RunLimits

namespace oscta {

// Runtime value of the IR: an integer or a memory-block address.
using IrValue = std::variant<long long, MemAddr>;

struct IrState {
  std::map<std::string, IrValue> regs;
  std::map<std::string, std::vector<IrValue>> mem;
};

struct IrRunOutcome {
  RunStatus status = RunStatus::Ok;
  IrState state;
  LeakTrace trace;
  std::string error;
  long long steps = 0;
};

// Declared registers bound to their block addresses; memory from the given
// per-block integer contents (missing blocks are zero-filled).
IrState initial_ir_state(const IrProgram& p,
                         const std::map<std::string, std::vector<long long>>& memory = {});

// Fig.-11-style execution: load leaks r(ad), store leaks w(ad), cond leaks
// j(1)/j(0) and requires the register value to be exactly 0 or 1.
IrRunOutcome run_ir(const IrProgram& p, IrState init, const RunLimits& limits);

std::string render_ir_value(const IrValue& v);

}  // namespace oscta
