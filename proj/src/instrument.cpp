#include "oscta/instrument.hpp"

namespace oscta {

namespace {

ExprPtr xl_var() { return WhileExpr::var(kLeakVarName); }

ExprPtr read_event(const WhileExpr& e) { return WhileExpr::trace_read(index_exprs(e)); }

// xl := xl : ev1 : ev2 ...
CmdPtr xl_update(std::vector<ExprPtr> events) {
  ExprPtr rhs = xl_var();
  for (auto& ev : events) rhs = WhileExpr::trace_cons(std::move(rhs), std::move(ev));
  return WhileCmd::assign(kLeakVarName, std::move(rhs));
}

CmdPtr go(const CmdPtr& c) {
  switch (c->kind) {
    case WhileCmd::Kind::Skip:
      return c;
    case WhileCmd::Kind::Assign:
      return WhileCmd::seq(xl_update({read_event(*c->expr)}), c);
    case WhileCmd::Kind::ArrAssign:
      return WhileCmd::seq(
          xl_update({WhileExpr::trace_write(c->index), read_event(*c->expr)}), c);
    case WhileCmd::Kind::Seq:
      return WhileCmd::seq(go(c->c1), go(c->c2));
    case WhileCmd::Kind::If:
      return WhileCmd::seq(
          xl_update({WhileExpr::trace_branch(c->expr), read_event(*c->expr)}),
          WhileCmd::ifte(c->expr, go(c->c1), go(c->c2)));
    case WhileCmd::Kind::While: {
      CmdPtr test_leak = xl_update({WhileExpr::trace_branch(c->expr), read_event(*c->expr)});
      CmdPtr body = WhileCmd::seq(go(c->c1), test_leak);
      return WhileCmd::seq(test_leak, WhileCmd::loop(c->expr, std::move(body)));
    }
  }
  throw InstrumentError("bad command");
}

}  // namespace

CmdPtr instrument(const CmdPtr& c) {
  if (free_vars(*c).count(kLeakVarName))
    throw InstrumentError("program already uses the reserved leakage variable xl");
  return go(c);
}

CmdPtr erase_leak_assignments(const CmdPtr& c) {
  switch (c->kind) {
    case WhileCmd::Kind::Skip:
    case WhileCmd::Kind::ArrAssign:
      return c;
    case WhileCmd::Kind::Assign:
      return c->target == kLeakVarName ? WhileCmd::skip() : c;
    case WhileCmd::Kind::Seq: {
      CmdPtr a = erase_leak_assignments(c->c1);
      CmdPtr b = erase_leak_assignments(c->c2);
      if (a->kind == WhileCmd::Kind::Skip) return b;
      if (b->kind == WhileCmd::Kind::Skip) return a;
      return WhileCmd::seq(std::move(a), std::move(b));
    }
    case WhileCmd::Kind::If:
      return WhileCmd::ifte(c->expr, erase_leak_assignments(c->c1),
                            erase_leak_assignments(c->c2));
    case WhileCmd::Kind::While:
      return WhileCmd::loop(c->expr, erase_leak_assignments(c->c1));
  }
  throw InstrumentError("bad command");
}

}  // namespace oscta
