#pragma once

#include <optional>

#include "oscta/ir.hpp"
#include "oscta/ir_graphs.hpp"

namespace oscta {

// Test-only knobs for mutation testing of the soundness harness.
struct IrTransferOptions {
  bool drop_branch_context = false;  // omit τ0 in the Op rules
};

// Program plus all the analyses the transfer functions consult.
struct IrAnalysis {
  const IrProgram* prog = nullptr;
  IrPolicy policy;
  DomInfo dom;
  PtsMap pts;
  std::shared_ptr<const VarUniverse> uni;
  std::map<std::string, std::set<std::string>> dep_by_block;

  SecType branch_context(const TypeEnv& env, const std::string& block,
                         const IrTransferOptions& opt) const;  // τ0
  SecType operand_type(const TypeEnv& env, const IrOperand& o) const;  // Γ[α](v)
  std::set<VarId> outputs_assigned_in(const std::set<std::string>& blocks) const;
  // A for a merge along edge (from, to): outputs assigned in the Hammock
  // regions between idom(to) and to avoiding that edge. Empty at the entry.
  std::set<VarId> merge_substitution(const std::string& from, const std::string& to) const;
};

IrAnalysis prepare_ir(const IrProgram& p, const IrPolicy& policy);

// One instruction's effect on the environment (rules Op1/Op2, Ld1/Ld2, St,
// CJmp, Jmp).
TypeEnv ir_transfer(const IrAnalysis& a, const TypeEnv& env, const IrInstr& ins,
                    const std::string& block, const IrTransferOptions& opt = {});

struct FlowState {
  std::map<std::string, TypeEnv> block_entry;  // reachable blocks only
  int block_visits = 0;
  long long bound = 0;

  // environment after the first n instructions of a block, by replay
  TypeEnv at_point(const IrAnalysis& a, const std::string& block, int n,
                   const IrTransferOptions& opt = {}) const;
  TypeEnv block_exit(const IrAnalysis& a, const std::string& block,
                     const IrTransferOptions& opt = {}) const;
};

FlowState kildall(const IrAnalysis& a, const TypeEnv& init, const IrTransferOptions& opt = {});

struct EdgeCertificate {
  std::string from, to;
  std::vector<std::string> subst_outputs;  // the chosen A
  bool ok = false;
};

struct WellTypedResult {
  bool ok = true;
  std::vector<EdgeCertificate> certificates;
  std::string failure;
};

// Re-verify Def.-4.1 conditions on every CFG edge with the Hammock-derived A
// and check well-formedness of every per-point environment.
WellTypedResult check_welltyped(const IrAnalysis& a, const FlowState& fs,
                                const IrTransferOptions& opt = {});

struct IrVerdictResult {
  bool accepted = false;
  SecType witness;
  SecType allowed;
  TypeEnv exit_env;
  WellTypedResult welltyped;
  FlowState flow;

  IrVerdictResult(TypeEnv env, FlowState f) : exit_env(std::move(env)), flow(std::move(f)) {}
};

IrVerdictResult ir_verdict(const IrAnalysis& a, const IrTransferOptions& opt = {});
IrVerdictResult ir_verdict(const IrProgram& p, const IrPolicy& policy,
                           const IrTransferOptions& opt = {});

long long kildall_bound_hits();

}  // namespace oscta
