#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "oscta/ir.hpp"

namespace oscta {

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dominance, post-dominance and reachability over the subgraph reachable
// from the entry block.
class DomInfo {
 public:
  DomInfo() = default;

  const std::vector<std::string>& reachable_blocks() const { return order_; }
  bool is_reachable(const std::string& b) const { return dom_.count(b) != 0; }

  // reflexive
  bool dominates(const std::string& a, const std::string& b) const;
  bool postdominates(const std::string& a, const std::string& b) const;
  // reflexive-transitive edge reachability
  bool reaches(const std::string& a, const std::string& b) const;

  // absent for the entry block
  const std::map<std::string, std::string>& idom() const { return idom_; }
  // absent for the exit block
  const std::map<std::string, std::string>& ipdom() const { return ipdom_; }

  friend DomInfo compute_dominators(const IrProgram& p);

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::set<std::string>> dom_, pdom_, reach_;
  std::map<std::string, std::string> idom_, ipdom_;
};

DomInfo compute_dominators(const IrProgram& p);

// dep(b): dominators of b that end in a cond and whose branch is still
// unresolved at b — no block strictly after b' on some b'→…→b path (b itself
// included) post-dominates b'.
std::set<std::string> dep(const IrProgram& p, const DomInfo& d, const std::string& b,
                          bool between_includes_target = true);

// br(b): the branching register of a cond-terminated block.
const std::string& br(const IrProgram& p, const std::string& b);

// Reg(b', b, (c,b)): blocks on b'→…→b paths all of which cannot reach c.
std::set<std::string> hammock_region(const IrProgram& p, const DomInfo& d,
                                     const std::string& b_prime, const std::string& b,
                                     const std::string& edge_from);

// Flow-insensitive inclusion-based points-to facts for registers and blocks.
class PtsMap {
 public:
  const std::set<std::string>& lookup(const std::string& name) const;
  std::set<std::string> operand_pts(const IrOperand& o) const;
  const std::map<std::string, std::set<std::string>>& all() const { return pts_; }

  friend PtsMap points_to(const IrProgram& p);

 private:
  std::map<std::string, std::set<std::string>> pts_;
  std::set<std::string> empty_;
};

PtsMap points_to(const IrProgram& p);

}  // namespace oscta
