#include "oscta/lattice.hpp"

#include <algorithm>

namespace oscta {

AtomUniverse::AtomUniverse(const std::vector<std::string>& vars,
                           const std::vector<std::string>& outputs) {
  std::vector<std::string> rs(vars.begin(), vars.end());
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  for (const auto& v : rs) {
    real_by_name_.emplace(v, static_cast<AtomId>(atoms_.size()));
    atoms_.push_back({AtomKind::Real, v});
  }
  n_real_ = static_cast<AtomId>(atoms_.size());

  std::vector<std::string> os(outputs.begin(), outputs.end());
  std::sort(os.begin(), os.end());
  os.erase(std::unique(os.begin(), os.end()), os.end());
  for (const auto& o : os) {
    if (!real_by_name_.count(o))
      throw LatticeError("output variable '" + o + "' is not in the variable universe");
    sym_by_name_.emplace(o, static_cast<AtomId>(atoms_.size()));
    atoms_.push_back({AtomKind::Symbolic, o});
  }
}

AtomId AtomUniverse::real_atom(std::string_view var) const {
  auto it = real_by_name_.find(var);
  if (it == real_by_name_.end())
    throw LatticeError("unknown variable '" + std::string(var) + "' in atom universe");
  return it->second;
}

AtomId AtomUniverse::symbolic_atom(std::string_view output) const {
  auto it = sym_by_name_.find(output);
  if (it == sym_by_name_.end())
    throw LatticeError("variable '" + std::string(output) + "' has no symbolic atom (not an output)");
  return it->second;
}

const AtomInfo& AtomUniverse::info(AtomId a) const {
  if (a < 0 || a >= size()) throw LatticeError("atom id out of universe");
  return atoms_[static_cast<size_t>(a)];
}

std::string AtomUniverse::render_atom(AtomId a) const {
  const AtomInfo& i = info(a);
  return i.kind == AtomKind::Symbolic ? "~" + i.name : i.name;
}

void SecType::normalize() {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

SecType SecType::from_ids(std::vector<AtomId> ids) {
  SecType t;
  t.ids_ = std::move(ids);
  t.normalize();
  return t;
}

bool SecType::contains(AtomId a) const {
  return std::binary_search(ids_.begin(), ids_.end(), a);
}

SecType join(const SecType& t1, const SecType& t2) {
  std::vector<AtomId> out;
  out.reserve(t1.atoms().size() + t2.atoms().size());
  std::set_union(t1.atoms().begin(), t1.atoms().end(), t2.atoms().begin(), t2.atoms().end(),
                 std::back_inserter(out));
  return SecType::from_ids(std::move(out));
}

bool leq(const SecType& t1, const SecType& t2) {
  return std::includes(t2.atoms().begin(), t2.atoms().end(), t1.atoms().begin(),
                       t1.atoms().end());
}

bool leq_r(const AtomUniverse& u, const SecType& t1, const SecType& t2) {
  if (!leq(t1, t2)) return false;
  for (AtomId a : t2.atoms())
    if (u.is_symbolic(a) && !t1.contains(a)) return false;
  return true;
}

SecType subst(const AtomUniverse& u, const SecType& t, AtomId t0, const SecType& t_new) {
  if (!u.is_symbolic(t0))
    throw LatticeError("substitution target must be a symbolic atom, got '" +
                       u.render_atom(t0) + "'");
  if (!t.contains(t0)) return t;
  std::vector<AtomId> out;
  out.reserve(t.atoms().size() + t_new.atoms().size());
  for (AtomId a : t.atoms())
    if (a != t0) out.push_back(a);
  for (AtomId a : t_new.atoms()) out.push_back(a);
  return SecType::from_ids(std::move(out));
}

SecType atoms_minus(const SecType& t1, const SecType& t2) {
  std::vector<AtomId> out;
  std::set_difference(t1.atoms().begin(), t1.atoms().end(), t2.atoms().begin(),
                      t2.atoms().end(), std::back_inserter(out));
  return SecType::from_ids(std::move(out));
}

std::string render(const AtomUniverse& u, const SecType& t) {
  std::string s = "{";
  bool first = true;
  for (AtomId a : t.atoms()) {
    if (!first) s += ", ";
    first = false;
    s += u.render_atom(a);
  }
  s += "}";
  return s;
}

}  // namespace oscta
