#pragma once

#include <memory>
#include <string>
#include <vector>

#include "oscta/secenv.hpp"
#include "support/rng.hpp"

// Shared generators for property tests over environments.
namespace testgen {

using namespace oscta;

inline std::shared_ptr<const VarUniverse> small_universe(int n_vars, int n_outputs) {
  std::vector<std::string> vars, outs;
  for (int i = 0; i < n_vars; ++i) vars.push_back("v" + std::to_string(i));
  for (int i = 0; i < n_outputs && i < n_vars; ++i) outs.push_back("v" + std::to_string(i));
  return std::make_shared<VarUniverse>(vars, outs);
}

inline SecType random_type(TestRng& rng, const AtomUniverse& u, double density = 0.3) {
  std::vector<AtomId> ids;
  for (AtomId a = 0; a < u.size(); ++a)
    if (rng.chance(density)) ids.push_back(a);
  return SecType::from_ids(std::move(ids));
}

inline SecType random_real_type(TestRng& rng, const AtomUniverse& u, double density = 0.3) {
  std::vector<AtomId> ids;
  for (AtomId a = 0; a < u.real_count(); ++a)
    if (rng.chance(density)) ids.push_back(a);
  return SecType::from_ids(std::move(ids));
}

// Arbitrary environment; may be ill formed.
inline TypeEnv random_env(TestRng& rng, std::shared_ptr<const VarUniverse> uni,
                          double density = 0.3) {
  TypeEnv env(uni);
  for (VarId v = 0; v < uni->var_count(); ++v) env.set(v, random_type(rng, uni->atoms(), density));
  return env;
}

// Well formed by construction: output o may depend symbolically only on
// outputs placed before it in a random permutation.
inline TypeEnv random_wf_env(TestRng& rng, std::shared_ptr<const VarUniverse> uni,
                             double density = 0.3) {
  TypeEnv env(uni);
  auto outs = uni->output_vars();
  for (size_t i = outs.size(); i > 1; --i) std::swap(outs[i - 1], outs[rng.below(i)]);
  std::vector<AtomId> allowed_syms;
  for (VarId v = 0; v < uni->var_count(); ++v) {
    if (uni->is_output(v)) continue;
    env.set(v, random_type(rng, uni->atoms(), density));
  }
  for (VarId o : outs) {
    std::vector<AtomId> ids;
    for (AtomId a = 0; a < uni->atoms().real_count(); ++a)
      if (rng.chance(density)) ids.push_back(a);
    for (AtomId a : allowed_syms)
      if (rng.chance(density)) ids.push_back(a);
    env.set(o, SecType::from_ids(std::move(ids)));
    allowed_syms.push_back(uni->alpha(o));
  }
  return env;
}

// grow `base` pointwise by random real atoms only (so base ⊑_r grown)
inline TypeEnv grow_real(TestRng& rng, const TypeEnv& base, double density = 0.2) {
  TypeEnv out = base;
  for (VarId v = 0; v < base.uni().var_count(); ++v)
    out.set(v, join(base.at(v), random_real_type(rng, base.uni().atoms(), density)));
  return out;
}

inline std::set<VarId> random_output_subset(TestRng& rng, const VarUniverse& u, double p = 0.5) {
  std::set<VarId> out;
  for (VarId o : u.output_vars())
    if (rng.chance(p)) out.insert(o);
  return out;
}

}  // namespace testgen
