#include "oscta/ir_interp.hpp"

namespace oscta {

namespace {

struct IrFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long long as_int(const IrValue& v, const char* what) {
  if (auto* i = std::get_if<long long>(&v)) return *i;
  throw IrFault(std::string(what) + ": expected an integer, got an address");
}

const MemAddr& as_addr(const IrValue& v, const char* what) {
  if (auto* a = std::get_if<MemAddr>(&v)) return *a;
  throw IrFault(std::string(what) + ": expected an address");
}

long long wrap(unsigned long long x) { return static_cast<long long>(x); }

}  // namespace

IrState initial_ir_state(const IrProgram& p,
                         const std::map<std::string, std::vector<long long>>& memory) {
  IrState s;
  for (const auto& d : p.decls) {
    s.regs[d.reg] = MemAddr{d.block, 0};
    std::vector<IrValue> cells(static_cast<size_t>(d.len), IrValue{0LL});
    if (auto it = memory.find(d.block); it != memory.end()) {
      if (it->second.size() != cells.size())
        throw IrError("initial memory for '" + d.block + "' has wrong length");
      for (size_t i = 0; i < cells.size(); ++i) cells[i] = it->second[i];
    }
    s.mem[d.block] = std::move(cells);
  }
  return s;
}

IrRunOutcome run_ir(const IrProgram& p, IrState init, const RunLimits& limits) {
  IrRunOutcome out;
  IrState st = std::move(init);

  auto eval = [&st](const IrOperand& o) -> IrValue {
    switch (o.kind) {
      case IrOperand::Kind::Imm:
        return o.imm;
      case IrOperand::Kind::Reg: {
        auto it = st.regs.find(o.name);
        if (it == st.regs.end()) throw IrFault("read of unassigned register '" + o.name + "'");
        return it->second;
      }
      case IrOperand::Kind::Block:
        return MemAddr{o.name, 0};
    }
    throw IrFault("bad operand");
  };

  auto cell = [&st](const MemAddr& ad) -> IrValue& {
    auto it = st.mem.find(ad.block);
    if (it == st.mem.end()) throw IrFault("address does not name a memory block: " + ad.block);
    if (ad.offset < 0 || ad.offset >= static_cast<long long>(it->second.size()))
      throw IrFault("offset " + std::to_string(ad.offset) + " out of bounds for block '" +
                    ad.block + "'");
    return it->second[static_cast<size_t>(ad.offset)];
  };

  const IrBlock* blk = &p.block(p.entry);
  size_t n = 0;
  try {
    for (;;) {
      if (blk->name == p.exit && n >= blk->instrs.size()) break;
      if (n >= blk->instrs.size()) throw IrFault("fell off the end of block '" + blk->name + "'");
      if (++out.steps > limits.step_cap) {
        out.status = RunStatus::Timeout;
        out.error = "step cap exceeded";
        out.state = std::move(st);
        return out;
      }
      const IrInstr& ins = blk->instrs[n];
      switch (ins.kind) {
        case IrInstr::Kind::Op: {
          IrValue v;
          const auto& ops = ins.operands;
          auto want = [&](size_t k) {
            if (ops.size() != k)
              throw IrFault("operation '" + ins.opname + "' expects " + std::to_string(k) +
                            " operands");
          };
          if (ins.opname == "gep") {
            if (ops.size() < 2) throw IrFault("gep expects a base and at least one index");
            MemAddr base = as_addr(eval(ops[0]), "gep base");
            long long off = base.offset;
            for (size_t i = 1; i < ops.size(); ++i)
              off = wrap(static_cast<unsigned long long>(off) +
                         static_cast<unsigned long long>(as_int(eval(ops[i]), "gep index")));
            v = MemAddr{base.block, off};
          } else if (ins.opname == "not") {
            want(1);
            v = static_cast<long long>(as_int(eval(ops[0]), "not") == 1 ? 0 : 1);
          } else {
            want(2);
            long long a = as_int(eval(ops[0]), ins.opname.c_str());
            long long b = as_int(eval(ops[1]), ins.opname.c_str());
            if (ins.opname == "add")
              v = wrap(static_cast<unsigned long long>(a) + static_cast<unsigned long long>(b));
            else if (ins.opname == "sub")
              v = wrap(static_cast<unsigned long long>(a) - static_cast<unsigned long long>(b));
            else if (ins.opname == "mul")
              v = wrap(static_cast<unsigned long long>(a) * static_cast<unsigned long long>(b));
            else if (ins.opname == "eq")
              v = static_cast<long long>(a == b);
            else if (ins.opname == "lt")
              v = static_cast<long long>(a < b);
            else if (ins.opname == "and")
              v = static_cast<long long>(a == 1 && b == 1);
            else
              throw IrFault("unknown operation '" + ins.opname + "'");
          }
          st.regs[ins.dest] = v;
          ++n;
          break;
        }
        case IrInstr::Kind::Load: {
          MemAddr ad = as_addr(eval(ins.operands[0]), "load");
          IrValue val = cell(ad);
          out.trace.push_back(LeakEvent::read({ad}));
          st.regs[ins.dest] = val;
          ++n;
          break;
        }
        case IrInstr::Kind::Store: {
          IrValue val = eval(ins.operands[0]);
          MemAddr ad = as_addr(eval(ins.operands[1]), "store");
          out.trace.push_back(LeakEvent::write(ad));
          cell(ad) = val;
          ++n;
          break;
        }
        case IrInstr::Kind::Cond: {
          auto it = st.regs.find(ins.cond_reg);
          if (it == st.regs.end())
            throw IrFault("cond on unassigned register '" + ins.cond_reg + "'");
          long long v = as_int(it->second, "cond");
          if (v != 0 && v != 1)
            throw IrFault("cond on non-boolean value " + std::to_string(v));
          out.trace.push_back(LeakEvent::jump(v));
          blk = &p.block(v == 1 ? ins.target1 : ins.target2);
          n = 0;
          break;
        }
        case IrInstr::Kind::Goto:
          blk = &p.block(ins.target1);
          n = 0;
          break;
      }
    }
  } catch (const IrFault& f) {
    out.status = RunStatus::RuntimeError;
    out.error = f.what();
  }
  out.state = std::move(st);
  return out;
}

std::string render_ir_value(const IrValue& v) {
  if (auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
  const MemAddr& a = std::get<MemAddr>(v);
  return "&" + a.block + "[" + std::to_string(a.offset) + "]";
}

}  // namespace oscta
