#include "oscta/ir_graphs.hpp"

#include <algorithm>

namespace oscta {

namespace {

std::map<std::string, std::vector<std::string>> predecessors(
    const IrProgram& p, const std::vector<std::string>& blocks) {
  std::map<std::string, std::vector<std::string>> preds;
  for (const auto& b : blocks) preds[b];
  for (const auto& b : blocks)
    for (const auto& s : p.successors(b))
      if (preds.count(s)) preds[s].push_back(b);
  return preds;
}

// dom(b) = {b} ∪ ∩ dom(preds) over the given edge relation.
std::map<std::string, std::set<std::string>> dominance(
    const std::vector<std::string>& blocks, const std::string& root,
    const std::map<std::string, std::vector<std::string>>& preds) {
  std::set<std::string> all(blocks.begin(), blocks.end());
  std::map<std::string, std::set<std::string>> dom;
  for (const auto& b : blocks) dom[b] = b == root ? std::set<std::string>{root} : all;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& b : blocks) {
      if (b == root) continue;
      std::set<std::string> d = all;
      bool any = false;
      for (const auto& pr : preds.at(b)) {
        if (!any) {
          d = dom[pr];
          any = true;
        } else {
          std::set<std::string> tmp;
          std::set_intersection(d.begin(), d.end(), dom[pr].begin(), dom[pr].end(),
                                std::inserter(tmp, tmp.begin()));
          d = std::move(tmp);
        }
      }
      d.insert(b);
      if (d != dom[b]) {
        dom[b] = std::move(d);
        changed = true;
      }
    }
  }
  return dom;
}

// unique strict dominator dominated by every other strict dominator
std::map<std::string, std::string> immediate(
    const std::map<std::string, std::set<std::string>>& dom, const std::string& root) {
  std::map<std::string, std::string> idom;
  for (const auto& [b, ds] : dom) {
    if (b == root) continue;
    for (const auto& cand : ds) {
      if (cand == b) continue;
      bool ok = true;
      for (const auto& other : ds) {
        if (other == b || other == cand) continue;
        if (!dom.at(cand).count(other)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        idom[b] = cand;
        break;
      }
    }
  }
  return idom;
}

}  // namespace

bool DomInfo::dominates(const std::string& a, const std::string& b) const {
  auto it = dom_.find(b);
  return it != dom_.end() && it->second.count(a) != 0;
}

bool DomInfo::postdominates(const std::string& a, const std::string& b) const {
  auto it = pdom_.find(b);
  return it != pdom_.end() && it->second.count(a) != 0;
}

bool DomInfo::reaches(const std::string& a, const std::string& b) const {
  if (a == b) return true;
  auto it = reach_.find(a);
  return it != reach_.end() && it->second.count(b) != 0;
}

DomInfo compute_dominators(const IrProgram& p) {
  DomInfo d;
  std::set<std::string> seen;
  std::vector<std::string> work{p.entry};
  while (!work.empty()) {
    std::string b = work.back();
    work.pop_back();
    if (!seen.insert(b).second) continue;
    d.order_.push_back(b);
    for (const auto& s : p.successors(b)) work.push_back(s);
  }
  std::sort(d.order_.begin(), d.order_.end());
  if (!seen.count(p.exit))
    throw AnalysisError("exit block unreachable from entry");

  auto preds = predecessors(p, d.order_);
  std::map<std::string, std::vector<std::string>> succs;
  for (const auto& b : d.order_) succs[b];
  for (const auto& [b, ps] : preds)
    for (const auto& pr : ps) succs[pr].push_back(b);

  d.dom_ = dominance(d.order_, p.entry, preds);
  d.pdom_ = dominance(d.order_, p.exit, succs);
  d.idom_ = immediate(d.dom_, p.entry);
  d.ipdom_ = immediate(d.pdom_, p.exit);

  for (const auto& b : d.order_) {
    std::set<std::string> r;
    std::vector<std::string> w{b};
    while (!w.empty()) {
      std::string x = w.back();
      w.pop_back();
      for (const auto& s : p.successors(x))
        if (seen.count(s) && r.insert(s).second) w.push_back(s);
    }
    d.reach_[b] = std::move(r);
  }
  return d;
}

const std::string& br(const IrProgram& p, const std::string& b) {
  const IrBlock& blk = p.block(b);
  if (blk.instrs.empty() || blk.instrs.back().kind != IrInstr::Kind::Cond)
    throw AnalysisError("br('" + b + "'): block does not end in a cond");
  return blk.instrs.back().cond_reg;
}

std::set<std::string> dep(const IrProgram& p, const DomInfo& d, const std::string& b,
                          bool between_includes_target) {
  std::set<std::string> out;
  if (!d.is_reachable(b)) return out;
  for (const auto& bp : d.reachable_blocks()) {
    if (bp == b) continue;
    if (!d.dominates(bp, b)) continue;
    const IrBlock& blk = p.block(bp);
    if (blk.instrs.empty() || blk.instrs.back().kind != IrInstr::Kind::Cond) continue;

    // candidates strictly after b' on some b'→…→b path; b itself per flag
    bool witness = false;
    for (const auto& mid : d.reachable_blocks()) {
      if (mid == bp) continue;
      if (!between_includes_target && mid == b) continue;
      bool after_bp = false;  // reachable from b' by a nonempty path
      for (const auto& s : p.successors(bp))
        if (d.is_reachable(s) && d.reaches(s, mid)) {
          after_bp = true;
          break;
        }
      if (!after_bp || !d.reaches(mid, b)) continue;
      if (d.postdominates(mid, bp)) {
        witness = true;
        break;
      }
    }
    if (!witness) out.insert(bp);
  }
  return out;
}

std::set<std::string> hammock_region(const IrProgram& p, const DomInfo& d,
                                     const std::string& b_prime, const std::string& b,
                                     const std::string& edge_from) {
  // S: blocks that cannot reach the avoided edge's source (Reach reflexive,
  // so edge_from itself is excluded).
  std::set<std::string> S;
  for (const auto& v : d.reachable_blocks())
    if (!d.reaches(v, edge_from)) S.insert(v);

  // forward from b' through S
  std::set<std::string> fwd;
  std::vector<std::string> work;
  for (const auto& s : p.successors(b_prime))
    if (S.count(s)) work.push_back(s);
  while (!work.empty()) {
    std::string v = work.back();
    work.pop_back();
    if (!fwd.insert(v).second) continue;
    for (const auto& s : p.successors(v))
      if (S.count(s)) work.push_back(s);
  }

  // backward from b through S
  std::set<std::string> bwd;
  work.clear();
  for (const auto& v : d.reachable_blocks())
    for (const auto& s : p.successors(v))
      if (s == b && S.count(v)) work.push_back(v);
  while (!work.empty()) {
    std::string v = work.back();
    work.pop_back();
    if (!bwd.insert(v).second) continue;
    for (const auto& u : d.reachable_blocks())
      for (const auto& s : p.successors(u))
        if (s == v && S.count(u)) work.push_back(u);
  }

  std::set<std::string> out;
  for (const auto& v : fwd)
    if (bwd.count(v) && v != b && v != b_prime) out.insert(v);
  return out;
}

const std::set<std::string>& PtsMap::lookup(const std::string& name) const {
  auto it = pts_.find(name);
  return it == pts_.end() ? empty_ : it->second;
}

std::set<std::string> PtsMap::operand_pts(const IrOperand& o) const {
  switch (o.kind) {
    case IrOperand::Kind::Imm:
      return {};
    case IrOperand::Kind::Reg:
      return lookup(o.name);
    case IrOperand::Kind::Block:
      return {o.name};
  }
  return {};
}

PtsMap points_to(const IrProgram& p) {
  PtsMap m;
  auto& pts = m.pts_;
  std::set<std::string> overridden;
  for (const auto& [r, s] : p.ptsto_overrides) {
    pts[r] = s;
    overridden.insert(r);
  }
  for (const auto& d : p.decls)
    if (!overridden.count(d.reg)) pts[d.reg].insert(d.block);

  auto add_into = [&](const std::string& name, const std::set<std::string>& src) -> bool {
    if (overridden.count(name)) return false;
    size_t before = pts[name].size();
    pts[name].insert(src.begin(), src.end());
    return pts[name].size() != before;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& b : p.blocks) {
      for (const auto& ins : b.instrs) {
        switch (ins.kind) {
          case IrInstr::Kind::Op:
            if (ins.opname == "gep" && !ins.operands.empty())
              changed |= add_into(ins.dest, m.operand_pts(ins.operands[0]));
            break;
          case IrInstr::Kind::Load:
            for (const auto& blk : m.operand_pts(ins.operands[0]))
              changed |= add_into(ins.dest, m.lookup(blk));
            break;
          case IrInstr::Kind::Store:
            for (const auto& blk : m.operand_pts(ins.operands[1]))
              changed |= add_into(blk, m.operand_pts(ins.operands[0]));
            break;
          default:
            break;
        }
      }
    }
  }

  for (const auto& b : p.blocks) {
    for (const auto& ins : b.instrs) {
      if (ins.kind == IrInstr::Kind::Load && m.operand_pts(ins.operands[0]).empty())
        throw AnalysisError("unresolved address: load in block '" + b.name +
                            "' has an empty points-to set");
      if (ins.kind == IrInstr::Kind::Store && m.operand_pts(ins.operands[1]).empty())
        throw AnalysisError("unresolved address: store in block '" + b.name +
                            "' has an empty points-to set");
    }
  }
  return m;
}

}  // namespace oscta
