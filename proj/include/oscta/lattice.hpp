#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oscta {

struct LatticeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class AtomKind : std::uint8_t { Real = 0, Symbolic = 1 };

// Index into an AtomUniverse. Ascending id order is the canonical
// (kind, name) order: all real atoms first, then all symbolic ones,
// each group sorted by name.
using AtomId = std::int32_t;

struct AtomInfo {
  AtomKind kind;
  std::string name;
};

// The atom set of the powerset dependency lattice, fixed at policy load time:
// one real atom per variable plus one symbolic atom per declared output.
class AtomUniverse {
 public:
  AtomUniverse() = default;
  AtomUniverse(const std::vector<std::string>& vars, const std::vector<std::string>& outputs);

  AtomId real_atom(std::string_view var) const;
  AtomId symbolic_atom(std::string_view output) const;

  bool is_symbolic(AtomId a) const { return a >= n_real_; }
  const AtomInfo& info(AtomId a) const;
  int size() const { return static_cast<int>(atoms_.size()); }
  int real_count() const { return n_real_; }

  std::string render_atom(AtomId a) const;

 private:
  std::vector<AtomInfo> atoms_;
  std::map<std::string, AtomId, std::less<>> real_by_name_;
  std::map<std::string, AtomId, std::less<>> sym_by_name_;
  AtomId n_real_ = 0;
};

// A security type: the set of atoms below it, kept sorted and deduplicated
// so equality and hashing are structural.
class SecType {
 public:
  SecType() = default;
  SecType(std::initializer_list<AtomId> ids) : ids_(ids) { normalize(); }

  static SecType bottom() { return {}; }
  static SecType single(AtomId a) { return SecType({a}); }
  static SecType from_ids(std::vector<AtomId> ids);

  bool is_bottom() const { return ids_.empty(); }
  int size() const { return static_cast<int>(ids_.size()); }
  bool contains(AtomId a) const;
  const std::vector<AtomId>& atoms() const { return ids_; }

  friend bool operator==(const SecType&, const SecType&) = default;

 private:
  void normalize();
  std::vector<AtomId> ids_;
};

// t1 ⊔ t2: union of atom sets.
SecType join(const SecType& t1, const SecType& t2);

// t1 ⊑ t2: subset of atom sets.
bool leq(const SecType& t1, const SecType& t2);

// t1 ⊑_r t2: t1 ⊑ t2 and t2 adds no symbolic atom not already in t1.
bool leq_r(const AtomUniverse& u, const SecType& t1, const SecType& t2);

// t[t_new/t0]: replace the symbolic atom t0 in At(t) by At(t_new); identity if t0 ∉ At(t).
SecType subst(const AtomUniverse& u, const SecType& t, AtomId t0, const SecType& t_new);

// Atoms of t1 not in t2 (witness sets for reject verdicts).
SecType atoms_minus(const SecType& t1, const SecType& t2);

// "{x, y, ~o}" with symbolic atoms marked ~ and canonical atom order.
std::string render(const AtomUniverse& u, const SecType& t);

}  // namespace oscta
