#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oscta/lattice.hpp"

namespace oscta {

struct PolicyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reserved name of the leakage variable; never a program variable.
inline constexpr const char* kLeakVarName = "xl";

// A security policy for While programs: the variable universe and the
// X_I / X_O / X_L partition.
struct Policy {
  std::vector<std::string> vars;          // scalar variables
  std::map<std::string, int> arrays;      // array name -> declared length
  std::vector<std::string> inputs;        // X_I (scalars or arrays)
  std::vector<std::string> outputs;       // X_O (scalars only)
  std::vector<std::string> leaks;         // X_L (scalars or "xl")

  static Policy from_json_text(const std::string& text);
  static Policy load_file(const std::string& path);
  void validate() const;

  bool is_array(const std::string& name) const { return arrays.count(name) != 0; }
  bool is_scalar(const std::string& name) const;
  bool known(const std::string& name) const { return is_scalar(name) || is_array(name); }
};

using VarId = std::int32_t;

// The typed variable universe: every policy variable plus the leakage
// variable xl, with the alpha mapping for outputs. Shared between the While
// environments and the IR environments (where "variables" are registers and
// memory blocks).
class VarUniverse {
 public:
  // vars must not contain "xl"; outputs ⊆ vars.
  VarUniverse(std::vector<std::string> vars, std::vector<std::string> outputs);

  static std::shared_ptr<const VarUniverse> for_policy(const Policy& p);

  int var_count() const { return static_cast<int>(names_.size()); }
  VarId id(std::string_view name) const;
  std::optional<VarId> try_id(std::string_view name) const;
  const std::string& name(VarId v) const { return names_.at(static_cast<size_t>(v)); }

  bool is_output(VarId v) const { return alpha_[static_cast<size_t>(v)] >= 0; }
  VarId leak_var() const { return leak_var_; }
  const std::vector<VarId>& output_vars() const { return outputs_; }

  AtomId real_atom(VarId v) const { return real_[static_cast<size_t>(v)]; }
  // alpha(o): the symbolic atom of an output variable.
  AtomId alpha(VarId v) const;

  const AtomUniverse& atoms() const { return atoms_; }

 private:
  std::vector<std::string> names_;  // sorted; defines VarId order
  std::map<std::string, VarId, std::less<>> by_name_;
  std::vector<AtomId> real_;
  std::vector<AtomId> alpha_;  // -1 for non-outputs
  std::vector<VarId> outputs_;
  VarId leak_var_ = -1;
  AtomUniverse atoms_;
};

// A total map from the variable universe to security types.
class TypeEnv {
 public:
  explicit TypeEnv(std::shared_ptr<const VarUniverse> uni);

  // Γ(x) = {τ_x} for every variable, Γ(xl) = ⊥.
  static TypeEnv initial(std::shared_ptr<const VarUniverse> uni);

  const VarUniverse& uni() const { return *uni_; }
  const std::shared_ptr<const VarUniverse>& uni_ptr() const { return uni_; }

  const SecType& at(VarId v) const { return types_.at(static_cast<size_t>(v)); }
  const SecType& at(std::string_view name) const { return at(uni_->id(name)); }
  void set(VarId v, SecType t) { types_.at(static_cast<size_t>(v)) = std::move(t); }
  void join_into(VarId v, const SecType& t) { set(v, join(at(v), t)); }

  // Γ[α](A): outputs contribute their symbolic atom, other variables their type.
  SecType lookup_alpha(const std::vector<VarId>& vars) const;
  SecType lookup_alpha_names(const std::set<std::string>& names) const;

  friend bool operator==(const TypeEnv&, const TypeEnv&);

 private:
  std::shared_ptr<const VarUniverse> uni_;
  std::vector<SecType> types_;
};

// Edges of the symbolic-dependency graph G(Γ): (o1, o2) iff α(o1) ⊑ Γ(o2).
std::vector<std::pair<VarId, VarId>> dependency_graph(const TypeEnv& env);

// G(Γ) acyclic.
bool well_formed(const TypeEnv& env);

// GT_Γ(x): outputs reachable from x by a nonempty path in G(Γ).
std::set<VarId> reachable(const TypeEnv& env, VarId x);

// Γ ⊲_α o: every type has α(o) replaced by Γ(o).
TypeEnv triangle_var(const TypeEnv& env, VarId o);

// (p, Γ) ⊲_α o = p[Γ(o)/α(o)].
SecType triangle_level(const SecType& p, const TypeEnv& env, VarId o);

// An ordering of X compatible with G(Γ): j ≤ k implies x_j not ⊑_Γ x_k.
// Deterministic: reverse topological order, lexicographic tie-break.
// Throws if env is not well formed.
std::vector<VarId> compatible_order(const TypeEnv& env, const std::set<VarId>& X);

// Γ ⊲_α X and (p, Γ) ⊲_α X, applied in a compatible order.
TypeEnv triangle_set(const TypeEnv& env, const std::set<VarId>& X);
SecType triangle_set_level(const SecType& p, const TypeEnv& env, const std::set<VarId>& X);

TypeEnv env_join(const TypeEnv& a, const TypeEnv& b);
bool env_leq(const TypeEnv& a, const TypeEnv& b);
bool env_leq_r(const TypeEnv& a, const TypeEnv& b);

// Sorted "name: {atoms}" lines.
std::string render(const TypeEnv& env);

}  // namespace oscta
