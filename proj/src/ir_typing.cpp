#include "oscta/ir_typing.hpp"

#include <atomic>

#include "oscta/while_typing.hpp"  // InternalError

namespace oscta {

namespace {
std::atomic<long long> g_kildall_bound_hits{0};
}

SecType IrAnalysis::branch_context(const TypeEnv& env, const std::string& block,
                                   const IrTransferOptions& opt) const {
  if (opt.drop_branch_context) return SecType::bottom();
  SecType t;
  auto it = dep_by_block.find(block);
  if (it == dep_by_block.end()) return t;
  for (const auto& bp : it->second) {
    VarId r = uni->id(br(*prog, bp));
    t = join(t, env.lookup_alpha({r}));
  }
  return t;
}

SecType IrAnalysis::operand_type(const TypeEnv& env, const IrOperand& o) const {
  switch (o.kind) {
    case IrOperand::Kind::Imm:
      return SecType::bottom();
    case IrOperand::Kind::Reg:
      return env.lookup_alpha({uni->id(o.name)});
    case IrOperand::Kind::Block:
      // a block name used as an operand denotes its (public) address
      return SecType::bottom();
  }
  return SecType::bottom();
}

std::set<VarId> IrAnalysis::outputs_assigned_in(const std::set<std::string>& blocks) const {
  std::set<VarId> out;
  for (const auto& bn : blocks) {
    for (const auto& ins : prog->block(bn).instrs) {
      if (!ins.dest.empty()) {
        VarId v = uni->id(ins.dest);
        if (uni->is_output(v)) out.insert(v);
      }
      if (ins.kind == IrInstr::Kind::Store) {
        for (const auto& m : pts.operand_pts(ins.operands[1])) {
          VarId v = uni->id(m);
          if (uni->is_output(v)) out.insert(v);
        }
      }
    }
  }
  return out;
}

std::set<VarId> IrAnalysis::merge_substitution(const std::string& from,
                                               const std::string& to) const {
  auto it = dom.idom().find(to);
  if (it == dom.idom().end()) return {};
  auto region = hammock_region(*prog, dom, it->second, to, from);
  return outputs_assigned_in(region);
}

IrAnalysis prepare_ir(const IrProgram& p, const IrPolicy& policy) {
  IrAnalysis a;
  a.prog = &p;
  a.policy = policy;
  a.dom = compute_dominators(p);
  a.pts = points_to(p);
  a.uni = universe_for_ir(p, policy);
  for (const auto& b : a.dom.reachable_blocks()) a.dep_by_block[b] = dep(p, a.dom, b);
  return a;
}

TypeEnv ir_transfer(const IrAnalysis& a, const TypeEnv& env, const IrInstr& ins,
                    const std::string& block, const IrTransferOptions& opt) {
  const VarUniverse& u = *a.uni;
  VarId xl = u.leak_var();

  switch (ins.kind) {
    case IrInstr::Kind::Op: {
      SecType tau0 = a.branch_context(env, block, opt);
      SecType tau = tau0;
      for (const auto& o : ins.operands) tau = join(tau, a.operand_type(env, o));
      VarId r = u.id(ins.dest);
      if (!u.is_output(r)) {
        TypeEnv out = env;  // Op1
        out.set(r, tau);
        return out;
      }
      TypeEnv out = triangle_var(env, r);  // Op2
      out.set(r, tau);
      return out;
    }

    case IrInstr::Kind::Load: {
      VarId r = u.id(ins.dest);
      auto A_m = a.pts.operand_pts(ins.operands[0]);
      if (A_m.empty()) throw AnalysisError("load with empty points-to set");
      TypeEnv g1 = u.is_output(r) ? triangle_var(env, r) : env;  // Ld1 / Ld2
      SecType tau0 = a.branch_context(g1, block, opt);
      SecType tau1 = join(a.operand_type(g1, ins.operands[0]), tau0);
      SecType tau2;
      for (const auto& m : A_m) tau2 = join(tau2, g1.lookup_alpha({u.id(m)}));
      TypeEnv out = std::move(g1);
      out.join_into(xl, tau1);
      out.set(r, join(tau2, tau1));
      return out;
    }

    case IrInstr::Kind::Store: {
      auto A_m = a.pts.operand_pts(ins.operands[1]);
      if (A_m.empty()) throw AnalysisError("store with empty points-to set");
      SecType tau0 = a.branch_context(env, block, opt);
      std::set<VarId> A0;
      for (const auto& m : A_m) {
        VarId v = u.id(m);
        if (u.is_output(v)) A0.insert(v);
      }
      TypeEnv g1 = triangle_set(env, A0);
      SecType tau1 = join(a.operand_type(g1, ins.operands[1]), tau0);
      SecType tau2 = a.operand_type(g1, ins.operands[0]);
      TypeEnv out = std::move(g1);
      out.join_into(xl, tau1);
      for (const auto& m : A_m) {
        VarId v = u.id(m);
        out.set(v, join(env.at(v), join(tau2, tau1)));  // weak update
      }
      return out;
    }

    case IrInstr::Kind::Cond: {
      TypeEnv out = env;
      out.join_into(xl, env.lookup_alpha({u.id(ins.cond_reg)}));
      return out;
    }

    case IrInstr::Kind::Goto:
      return env;
  }
  throw AnalysisError("bad instruction");
}

TypeEnv FlowState::at_point(const IrAnalysis& a, const std::string& block, int n,
                            const IrTransferOptions& opt) const {
  TypeEnv env = block_entry.at(block);
  const IrBlock& b = a.prog->block(block);
  for (int i = 0; i < n && i < static_cast<int>(b.instrs.size()); ++i)
    env = ir_transfer(a, env, b.instrs[static_cast<size_t>(i)], block, opt);
  return env;
}

TypeEnv FlowState::block_exit(const IrAnalysis& a, const std::string& block,
                              const IrTransferOptions& opt) const {
  return at_point(a, block, static_cast<int>(a.prog->block(block).instrs.size()), opt);
}

FlowState kildall(const IrAnalysis& a, const TypeEnv& init, const IrTransferOptions& opt) {
  FlowState fs;
  fs.bound = static_cast<long long>(a.prog->instruction_count() + 1) *
                 a.uni->atoms().size() * a.uni->var_count() +
             1;

  std::vector<std::string> work{a.prog->entry};
  fs.block_entry.emplace(a.prog->entry, init);

  while (!work.empty()) {
    std::string bn = work.back();
    work.pop_back();
    if (++fs.block_visits > fs.bound) {
      ++g_kildall_bound_hits;
      throw InternalError("kildall exceeded its iteration bound; transfer is not monotone");
    }
    TypeEnv env = fs.block_exit(a, bn, opt);
    for (const auto& succ : a.prog->successors(bn)) {
      std::set<VarId> A = a.merge_substitution(bn, succ);
      TypeEnv contrib = triangle_set(env, A);
      auto it = fs.block_entry.find(succ);
      if (it == fs.block_entry.end()) {
        fs.block_entry.emplace(succ, contrib);
        work.push_back(succ);
      } else {
        TypeEnv merged = env_join(it->second, contrib);
        if (!(merged == it->second)) {
          it->second = std::move(merged);
          work.push_back(succ);
        }
      }
    }
  }
  return fs;
}

WellTypedResult check_welltyped(const IrAnalysis& a, const FlowState& fs,
                                const IrTransferOptions& opt) {
  WellTypedResult r;
  // the family must start no lower than the initial environment
  {
    TypeEnv init = initial_ir_env(*a.prog, a.uni);
    EdgeCertificate cert;
    cert.from = "<init>";
    cert.to = a.prog->entry;
    cert.ok = env_leq_r(init, fs.block_entry.at(a.prog->entry));
    if (!cert.ok) {
      r.ok = false;
      r.failure = "entry environment adds symbolic dependencies over the initial one";
    }
    r.certificates.push_back(std::move(cert));
  }
  for (const auto& [bn, entry] : fs.block_entry) {
    const IrBlock& b = a.prog->block(bn);
    TypeEnv env = entry;
    if (!well_formed(env)) {
      r.ok = false;
      r.failure = "ill-formed environment at entry of block '" + bn + "'";
      return r;
    }
    for (const auto& ins : b.instrs) {
      env = ir_transfer(a, env, ins, bn, opt);
      if (!well_formed(env)) {
        r.ok = false;
        r.failure = "ill-formed environment after '" + ins.text() + "' in block '" + bn + "'";
        return r;
      }
    }
    for (const auto& succ : a.prog->successors(bn)) {
      std::set<VarId> A = a.merge_substitution(bn, succ);
      EdgeCertificate cert;
      cert.from = bn;
      cert.to = succ;
      for (VarId v : A) cert.subst_outputs.push_back(a.uni->name(v));
      TypeEnv contrib = triangle_set(env, A);
      cert.ok = env_leq_r(contrib, fs.block_entry.at(succ));
      if (!cert.ok) {
        r.ok = false;
        if (r.failure.empty())
          r.failure = "edge " + bn + " -> " + succ + " fails the restricted ordering check";
      }
      r.certificates.push_back(std::move(cert));
    }
  }
  return r;
}

IrVerdictResult ir_verdict(const IrAnalysis& a, const IrTransferOptions& opt) {
  TypeEnv init = initial_ir_env(*a.prog, a.uni);
  FlowState fs = kildall(a, init, opt);
  TypeEnv exit_env = fs.block_exit(a, a.prog->exit, opt);

  IrVerdictResult v(exit_env, std::move(fs));
  v.welltyped = check_welltyped(a, v.flow, opt);

  SecType allowed;
  for (const auto& i : a.policy.inputs) allowed = join(allowed, init.at(a.uni->id(i)));
  for (const auto& o : a.policy.outputs)
    allowed = join(allowed, SecType::single(a.uni->alpha(a.uni->id(o))));
  v.allowed = allowed;
  v.witness = atoms_minus(exit_env.at(a.uni->leak_var()), allowed);
  v.accepted = v.welltyped.ok && v.witness.is_bottom();
  return v;
}

IrVerdictResult ir_verdict(const IrProgram& p, const IrPolicy& policy,
                           const IrTransferOptions& opt) {
  return ir_verdict(prepare_ir(p, policy), opt);
}

long long kildall_bound_hits() { return g_kildall_bound_hits.load(); }

}  // namespace oscta
