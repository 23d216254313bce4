#include "oscta/generator.hpp"

#include <algorithm>

#include "json.hpp"

namespace oscta {

// ---------------------------------------------------------------------------
// While generator
// ---------------------------------------------------------------------------

namespace {

struct WhileGen {
  SplitMix rng;
  const WhileGenOptions& opt;
  std::vector<std::string> scalars;
  std::string array;  // empty if none

  WhileGen(std::uint64_t seed, const WhileGenOptions& o) : rng(seed), opt(o) {
    for (int i = 0; i < o.scalars; ++i) scalars.push_back("v" + std::to_string(i));
    if (o.with_array) array = "arr";
  }

  std::string rand_scalar() { return scalars[rng.below(scalars.size())]; }

  // always evaluates to 0 or 1, so it is a safe length-2 index
  ExprPtr index_expr() {
    if (opt.literal_indexes_only || rng.chance(0.5)) return WhileExpr::lit(rng.range(0, 1));
    auto v = WhileExpr::var(rand_scalar());
    return WhileExpr::bin(BinOp::And, v, WhileExpr::lit(1));
  }

  ExprPtr expr(int depth) {
    if (depth <= 0 || rng.chance(0.3)) {
      switch (rng.below(3)) {
        case 0: return WhileExpr::lit(rng.range(0, 2));
        case 1: return WhileExpr::var(rand_scalar());
        default:
          if (!array.empty()) return WhileExpr::arr(array, index_expr());
          return WhileExpr::var(rand_scalar());
      }
    }
    if (rng.chance(0.12)) return WhileExpr::lnot(expr(depth - 1));
    static const BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Eq, BinOp::Ne,
                                BinOp::Lt,  BinOp::Le,  BinOp::And, BinOp::Or};
    BinOp op = ops[rng.below(9)];
    return WhileExpr::bin(op, expr(depth - 1), expr(depth - 1));
  }

  // conditions biased toward boolean-producing forms
  ExprPtr cond_expr(int depth) {
    switch (rng.below(4)) {
      case 0: return WhileExpr::bin(BinOp::Eq, expr(depth - 1), expr(depth - 1));
      case 1: return WhileExpr::bin(BinOp::Lt, expr(depth - 1), expr(depth - 1));
      case 2: return WhileExpr::var(rand_scalar());
      default: return WhileExpr::lnot(expr(depth - 1));
    }
  }

  CmdPtr command(int depth) {
    if (depth <= 0) return leaf();
    switch (rng.below(6)) {
      case 0:
        return leaf();
      case 1:
      case 2:
        return WhileCmd::seq(command(depth - 1), command(depth - 1));
      case 3:
        if (opt.allow_branches)
          return WhileCmd::ifte(cond_expr(depth), command(depth - 1), command(depth - 1));
        return leaf();
      case 4:
        if (opt.allow_branches && opt.allow_loops) return loop(depth);
        return leaf();
      default:
        return WhileCmd::seq(leaf(), command(depth - 1));
    }
  }

  CmdPtr leaf() {
    if (!array.empty() && rng.chance(0.25))
      return WhileCmd::arr_assign(array, index_expr(), expr(2));
    if (rng.chance(0.1)) return WhileCmd::skip();
    return WhileCmd::assign(rand_scalar(), expr(2));
  }

  CmdPtr loop(int depth) {
    if (rng.chance(0.7)) {
      // counter idiom, guaranteed to terminate
      std::string i = rand_scalar();
      int bound = rng.range(1, 2);
      CmdPtr body = WhileCmd::seq(
          command(depth - 1),
          WhileCmd::assign(i, WhileExpr::bin(BinOp::Add, WhileExpr::var(i), WhileExpr::lit(1))));
      CmdPtr w = WhileCmd::loop(
          WhileExpr::bin(BinOp::Lt, WhileExpr::var(i), WhileExpr::lit(bound)), std::move(body));
      return WhileCmd::seq(WhileCmd::assign(i, WhileExpr::lit(0)), std::move(w));
    }
    return WhileCmd::loop(cond_expr(depth), command(depth - 1));
  }
};

}  // namespace

GeneratedWhile gen_while_program(std::uint64_t seed, const WhileGenOptions& opt) {
  WhileGen g(seed, opt);
  GeneratedWhile out;
  out.policy.vars = g.scalars;
  if (!g.array.empty()) out.policy.arrays[g.array] = opt.array_len;

  if (opt.all_scalars_input) {
    out.policy.inputs = g.scalars;
  } else {
    for (const auto& v : g.scalars)
      if (g.rng.chance(0.4)) out.policy.inputs.push_back(v);
    if (!g.array.empty() && g.rng.chance(0.4)) out.policy.inputs.push_back(g.array);
  }
  for (const auto& v : g.scalars)
    if (g.rng.chance(0.35)) out.policy.outputs.push_back(v);
  out.policy.leaks = {kLeakVarName};
  out.policy.validate();

  out.program = g.command(opt.max_depth);
  out.source = print_cmd(*out.program);
  return out;
}

// ---------------------------------------------------------------------------
// IR generator
// ---------------------------------------------------------------------------

namespace {

struct IrGen {
  SplitMix rng;
  const IrGenOptions& opt;
  IrProgram p;
  std::vector<std::string> mem;
  IrBlock* cur = nullptr;
  int next_reg = 0;
  int next_block = 0;
  std::vector<std::string> int_regs;  // registers known to hold 0/1

  IrGen(std::uint64_t seed, const IrGenOptions& o) : rng(seed), opt(o) {}

  std::string fresh_reg() { return "%t" + std::to_string(next_reg++); }

  IrBlock* new_block() {
    p.blocks.push_back({"blk" + std::to_string(next_block++), {}});
    return &p.blocks.back();
  }

  // pointer stability: blocks vector may reallocate, so address by index
  size_t block_index(IrBlock* b) { return static_cast<size_t>(b - p.blocks.data()); }

  void emit(IrInstr ins) { cur->instrs.push_back(std::move(ins)); }

  std::string rand_mem() { return mem[rng.below(mem.size())]; }

  IrOperand index_operand() {
    if (!int_regs.empty() && rng.chance(0.5))
      return IrOperand::reg(int_regs[rng.below(int_regs.size())]);
    return IrOperand::immediate(rng.range(0, opt.block_len - 1));
  }

  // %a = op gep <block> <index01>; result points into <block>
  std::string emit_gep(const std::string& blk) {
    std::string a = fresh_reg();
    IrInstr g;
    g.kind = IrInstr::Kind::Op;
    g.dest = a;
    g.opname = "gep";
    g.operands = {IrOperand::block(blk), index_operand()};
    emit(std::move(g));
    return a;
  }

  // load a cell, then mask it to 0/1 so it can index or branch
  std::string emit_masked_load(const std::string& blk) {
    std::string addr = emit_gep(blk);
    std::string t = fresh_reg();
    IrInstr ld;
    ld.kind = IrInstr::Kind::Load;
    ld.dest = t;
    ld.operands = {IrOperand::reg(addr)};
    emit(std::move(ld));
    std::string m = fresh_reg();
    IrInstr msk;
    msk.kind = IrInstr::Kind::Op;
    msk.dest = m;
    msk.opname = "and";
    msk.operands = {IrOperand::reg(t), IrOperand::reg(t)};
    emit(std::move(msk));
    int_regs.push_back(m);
    return m;
  }

  void emit_random_instr() {
    switch (rng.below(3)) {
      case 0:
        emit_masked_load(rand_mem());
        break;
      case 1: {
        std::string addr = emit_gep(rand_mem());
        IrInstr st;
        st.kind = IrInstr::Kind::Store;
        IrOperand val = int_regs.empty() || rng.chance(0.5)
                            ? IrOperand::immediate(rng.range(0, 1))
                            : IrOperand::reg(int_regs[rng.below(int_regs.size())]);
        st.operands = {val, IrOperand::reg(addr)};
        emit(std::move(st));
        break;
      }
      default: {
        std::string r = fresh_reg();
        IrInstr op;
        op.kind = IrInstr::Kind::Op;
        op.dest = r;
        op.opname = rng.chance(0.5) ? "add" : "eq";
        IrOperand a = int_regs.empty() ? IrOperand::immediate(rng.range(0, 1))
                                       : IrOperand::reg(int_regs[rng.below(int_regs.size())]);
        op.operands = {a, IrOperand::immediate(rng.range(0, 1))};
        if (op.opname == "eq") int_regs.push_back(r);
        emit(std::move(op));
        break;
      }
    }
  }

  // remaining block budget drives the shape
  void emit_region(int depth, int& blocks_left) {
    int instrs = rng.range(1, 3);
    for (int i = 0; i < instrs; ++i) emit_random_instr();
    if (depth <= 0) return;

    if (blocks_left >= 3 && rng.chance(0.55)) {
      // diamond
      blocks_left -= 3;
      std::string c = emit_masked_load(rand_mem());
      size_t then_i, else_i, join_i;
      {
        IrBlock* t = new_block();
        then_i = block_index(t);
        IrBlock* e = new_block();
        else_i = block_index(e);
        IrBlock* j = new_block();
        join_i = block_index(j);
      }
      IrInstr cj;
      cj.kind = IrInstr::Kind::Cond;
      cj.cond_reg = c;
      cj.target1 = p.blocks[then_i].name;
      cj.target2 = p.blocks[else_i].name;
      emit(std::move(cj));

      bool phi = rng.chance(0.4);
      std::string phi_reg = fresh_reg();
      size_t scope = int_regs.size();  // branch-local registers are not live at the join

      cur = &p.blocks[then_i];
      if (phi) {
        IrInstr v;
        v.kind = IrInstr::Kind::Op;
        v.dest = phi_reg;
        v.opname = "add";
        v.operands = {IrOperand::immediate(1), IrOperand::immediate(0)};
        emit(std::move(v));
      }
      for (int i = 0, n = rng.range(0, 2); i < n; ++i) emit_random_instr();
      int_regs.resize(scope);
      IrInstr g1;
      g1.kind = IrInstr::Kind::Goto;
      g1.target1 = p.blocks[join_i].name;
      emit(std::move(g1));

      cur = &p.blocks[else_i];
      if (phi) {
        IrInstr v;
        v.kind = IrInstr::Kind::Op;
        v.dest = phi_reg;
        v.opname = "add";
        v.operands = {IrOperand::immediate(0), IrOperand::immediate(0)};
        emit(std::move(v));
      }
      for (int i = 0, n = rng.range(0, 2); i < n; ++i) emit_random_instr();
      int_regs.resize(scope);
      IrInstr g2;
      g2.kind = IrInstr::Kind::Goto;
      g2.target1 = p.blocks[join_i].name;
      emit(std::move(g2));

      cur = &p.blocks[join_i];
      if (phi) {
        int_regs.push_back(phi_reg);
        if (rng.chance(0.6)) {
          // kill a block then leak through the merged register
          std::string victim = rand_mem();
          IrInstr st;
          st.kind = IrInstr::Kind::Store;
          st.operands = {IrOperand::immediate(0), IrOperand::block(victim)};
          emit(std::move(st));
          std::string addr = fresh_reg();
          IrInstr gg;
          gg.kind = IrInstr::Kind::Op;
          gg.dest = addr;
          gg.opname = "gep";
          gg.operands = {IrOperand::block(rand_mem()), IrOperand::reg(phi_reg)};
          emit(std::move(gg));
          std::string t = fresh_reg();
          IrInstr ld;
          ld.kind = IrInstr::Kind::Load;
          ld.dest = t;
          ld.operands = {IrOperand::reg(addr)};
          emit(std::move(ld));
        }
      }
      emit_region(depth - 1, blocks_left);
    } else if (opt.allow_loops && blocks_left >= 2 && rng.chance(0.35)) {
      // self-clearing loop: the body zeroes the tested cell, so it exits
      blocks_left -= 2;
      std::string blk = rand_mem();
      int idx = rng.range(0, opt.block_len - 1);

      size_t head_i, body_i, cont_i;
      {
        IrBlock* h = new_block();
        head_i = block_index(h);
        IrBlock* b = new_block();
        body_i = block_index(b);
        IrBlock* c2 = new_block();
        cont_i = block_index(c2);
      }
      IrInstr g;
      g.kind = IrInstr::Kind::Goto;
      g.target1 = p.blocks[head_i].name;
      emit(std::move(g));

      cur = &p.blocks[head_i];
      std::string addr = fresh_reg();
      IrInstr gg;
      gg.kind = IrInstr::Kind::Op;
      gg.dest = addr;
      gg.opname = "gep";
      gg.operands = {IrOperand::block(blk), IrOperand::immediate(idx)};
      emit(std::move(gg));
      std::string t = fresh_reg();
      IrInstr ld;
      ld.kind = IrInstr::Kind::Load;
      ld.dest = t;
      ld.operands = {IrOperand::reg(addr)};
      emit(std::move(ld));
      std::string m = fresh_reg();
      IrInstr msk;
      msk.kind = IrInstr::Kind::Op;
      msk.dest = m;
      msk.opname = "and";
      msk.operands = {IrOperand::reg(t), IrOperand::reg(t)};
      emit(std::move(msk));
      IrInstr cj;
      cj.kind = IrInstr::Kind::Cond;
      cj.cond_reg = m;
      cj.target1 = p.blocks[body_i].name;
      cj.target2 = p.blocks[cont_i].name;
      emit(std::move(cj));

      cur = &p.blocks[body_i];
      size_t scope = int_regs.size();
      IrInstr clr;
      clr.kind = IrInstr::Kind::Store;
      clr.operands = {IrOperand::immediate(0), IrOperand::reg(addr)};
      emit(std::move(clr));
      for (int i = 0, n = rng.range(0, 1); i < n; ++i) emit_random_instr();
      int_regs.resize(scope);
      IrInstr back;
      back.kind = IrInstr::Kind::Goto;
      back.target1 = p.blocks[head_i].name;
      emit(std::move(back));

      cur = &p.blocks[cont_i];
      emit_region(depth - 1, blocks_left);
    }
  }
};

}  // namespace

GeneratedIr gen_ir_program(std::uint64_t seed, const IrGenOptions& opt) {
  IrGen g(seed, opt);
  for (int i = 0; i < opt.mem_blocks; ++i) {
    std::string b = "b" + std::to_string(i);
    g.mem.push_back(b);
    g.p.decls.push_back({true, "@g" + std::to_string(i), b, opt.block_len});
  }
  g.p.blocks.reserve(static_cast<size_t>(opt.max_blocks) + 2);

  IrBlock* entry = g.new_block();
  g.p.entry = entry->name;
  g.cur = entry;
  int blocks_left = opt.max_blocks - 2;
  g.emit_region(3, blocks_left);

  IrBlock* exit_blk = g.new_block();
  g.p.exit = exit_blk->name;
  IrInstr fin;
  fin.kind = IrInstr::Kind::Goto;
  fin.target1 = exit_blk->name;
  g.cur->instrs.push_back(std::move(fin));

  GeneratedIr out;
  for (const auto& m : g.mem)
    if (g.rng.chance(0.45)) out.policy.inputs.push_back(m);
  for (const auto& m : g.mem)
    if (g.rng.chance(0.35)) out.policy.outputs.push_back(m);
  if (!g.int_regs.empty() && g.rng.chance(0.4))
    out.policy.outputs.push_back(g.int_regs[g.rng.below(g.int_regs.size())]);

  out.program = std::move(g.p);
  out.program.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Soundness fuzzing
// ---------------------------------------------------------------------------

std::string FuzzReport::to_json() const {
  nlohmann::json j;
  j["count"] = count;
  j["accepted"] = accepted;
  j["rejected"] = rejected;
  j["oracle_holds"] = oracle_holds;
  j["oracle_counterexamples"] = oracle_counterexamples;
  j["incompleteness"] = incompleteness;
  j["oracle_skipped"] = oracle_skipped;
  j["soundness_failures"] = soundness_failures;
  j["internal_errors"] = internal_errors;
  auto arr = nlohmann::json::array();
  for (const auto& f : failures) {
    nlohmann::json e;
    e["seed"] = f.seed;
    e["kind"] = f.kind;
    e["program"] = f.program;
    e["policy"] = f.policy;
    e["detail"] = f.detail;
    arr.push_back(std::move(e));
  }
  j["failures"] = std::move(arr);
  return j.dump(2);
}

FuzzReport fuzz_while(std::uint64_t seed, int count, const WhileGenOptions& gen,
                      const EnumSpec& spec) {
  FuzzReport rep;
  for (int k = 0; k < count; ++k) {
    std::uint64_t s = seed * 0x100000001b3ULL + static_cast<std::uint64_t>(k);
    GeneratedWhile gw = gen_while_program(s, gen);
    ++rep.count;
    bool accepted = false;
    try {
      WhileVerdict v = check_while(TypeMode::ConstantTime, gw.policy, *gw.program);
      accepted = v.accepted;
    } catch (const std::exception& e) {
      ++rep.internal_errors;
      rep.failures.push_back({s, "internal", gw.source, policy_to_json(gw.policy), e.what()});
      continue;
    }
    accepted ? ++rep.accepted : ++rep.rejected;

    OsctResult oracle;
    try {
      oracle = check_osct(gw.policy, *gw.program, spec);
    } catch (const OracleError& e) {
      ++rep.oracle_skipped;
      (void)e;
      continue;
    }
    if (oracle.holds()) {
      ++rep.oracle_holds;
      if (!accepted) ++rep.incompleteness;
    } else {
      ++rep.oracle_counterexamples;
      if (accepted) {
        ++rep.soundness_failures;
        const auto& cex = *oracle.counterexample;
        rep.failures.push_back({s, "soundness", gw.source, policy_to_json(gw.policy),
                                "sigma=" + cex.sigma.to_json() + " rho=" + cex.rho.to_json() +
                                    " trace_sigma=" + render(cex.trace_sigma) +
                                    " trace_rho=" + render(cex.trace_rho)});
      }
    }
  }
  return rep;
}

FuzzReport fuzz_ir(std::uint64_t seed, int count, const IrGenOptions& gen, const EnumSpec& spec,
                   const IrTransferOptions& transfer) {
  FuzzReport rep;
  for (int k = 0; k < count; ++k) {
    std::uint64_t s = seed * 0x100000001b3ULL + static_cast<std::uint64_t>(k);
    GeneratedIr gi = gen_ir_program(s, gen);
    ++rep.count;
    bool accepted = false;
    try {
      IrVerdictResult v = ir_verdict(gi.program, gi.policy, transfer);
      accepted = v.accepted;
    } catch (const std::exception& e) {
      ++rep.internal_errors;
      rep.failures.push_back({s, "internal", print_ir(gi.program), ir_policy_to_json(gi.policy),
                              e.what()});
      continue;
    }
    accepted ? ++rep.accepted : ++rep.rejected;

    IrOsctResult oracle;
    try {
      oracle = check_osct_ir(gi.program, gi.policy, spec);
    } catch (const OracleError&) {
      ++rep.oracle_skipped;
      continue;
    }
    if (oracle.holds()) {
      ++rep.oracle_holds;
      if (!accepted) ++rep.incompleteness;
    } else {
      ++rep.oracle_counterexamples;
      if (accepted) {
        ++rep.soundness_failures;
        const auto& cex = *oracle.counterexample;
        nlohmann::json mem;
        mem["sigma"] = cex.mem_sigma;
        mem["rho"] = cex.mem_rho;
        rep.failures.push_back({s, "soundness", print_ir(gi.program),
                                ir_policy_to_json(gi.policy),
                                mem.dump() + " trace_sigma=" + render(cex.trace_sigma) +
                                    " trace_rho=" + render(cex.trace_rho)});
      }
    }
  }
  return rep;
}

std::string policy_to_json(const Policy& p) {
  nlohmann::json j;
  j["vars"] = p.vars;
  j["arrays"] = p.arrays;
  j["inputs"] = p.inputs;
  j["outputs"] = p.outputs;
  j["leaks"] = p.leaks;
  return j.dump();
}

std::string ir_policy_to_json(const IrPolicy& p) {
  nlohmann::json j;
  j["inputs"] = p.inputs;
  j["outputs"] = p.outputs;
  return j.dump();
}

}  // namespace oscta
