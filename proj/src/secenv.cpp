#include "oscta/secenv.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace oscta {

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw PolicyError(std::string("policy key '") + key + "' must be a list");
  for (const auto& e : j.at(key)) out.push_back(e.get<std::string>());
  return out;
}

}  // namespace

bool Policy::is_scalar(const std::string& name) const {
  return std::find(vars.begin(), vars.end(), name) != vars.end();
}

Policy Policy::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PolicyError(std::string("policy is not valid JSON: ") + e.what());
  }
  Policy p;
  p.vars = string_list(j, "vars");
  if (j.contains("arrays")) {
    if (!j.at("arrays").is_object()) throw PolicyError("policy key 'arrays' must be an object");
    for (auto it = j.at("arrays").begin(); it != j.at("arrays").end(); ++it)
      p.arrays[it.key()] = it.value().get<int>();
  }
  p.inputs = string_list(j, "inputs");
  p.outputs = string_list(j, "outputs");
  p.leaks = string_list(j, "leaks");
  p.validate();
  return p;
}

Policy Policy::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PolicyError("cannot open policy file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void Policy::validate() const {
  for (const auto& v : vars) {
    if (v == kLeakVarName) throw PolicyError("'xl' is reserved and cannot be declared as a variable");
    if (arrays.count(v)) throw PolicyError("'" + v + "' declared both scalar and array");
  }
  for (const auto& [a, len] : arrays) {
    if (a == kLeakVarName) throw PolicyError("'xl' is reserved and cannot be declared as an array");
    if (len <= 0) throw PolicyError("array '" + a + "' must have positive length");
  }
  for (const auto& o : outputs) {
    if (arrays.count(o)) throw PolicyError("output '" + o + "' is an array; X_O cannot contain arrays");
    if (!is_scalar(o)) throw PolicyError("output '" + o + "' is not a declared variable");
  }
  for (const auto& i : inputs)
    if (!known(i)) throw PolicyError("input '" + i + "' is not a declared variable");
  for (const auto& l : leaks)
    if (!known(l) && l != kLeakVarName)
      throw PolicyError("leak variable '" + l + "' is not a declared variable");
}

VarUniverse::VarUniverse(std::vector<std::string> vars, std::vector<std::string> outputs) {
  for (const auto& v : vars)
    if (v == kLeakVarName) throw PolicyError("'xl' must not appear in the variable list");
  vars.push_back(kLeakVarName);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  names_ = std::move(vars);
  for (size_t i = 0; i < names_.size(); ++i) by_name_.emplace(names_[i], static_cast<VarId>(i));
  leak_var_ = by_name_.at(kLeakVarName);

  atoms_ = AtomUniverse(names_, outputs);
  real_.resize(names_.size());
  alpha_.assign(names_.size(), -1);
  for (size_t i = 0; i < names_.size(); ++i) real_[i] = atoms_.real_atom(names_[i]);
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  for (const auto& o : outputs) {
    if (o == kLeakVarName) throw PolicyError("'xl' cannot be an output");
    VarId v = id(o);
    alpha_[static_cast<size_t>(v)] = atoms_.symbolic_atom(o);
    outputs_.push_back(v);
  }
}

std::shared_ptr<const VarUniverse> VarUniverse::for_policy(const Policy& p) {
  p.validate();
  std::vector<std::string> vars = p.vars;
  for (const auto& [a, len] : p.arrays) vars.push_back(a);
  return std::make_shared<VarUniverse>(std::move(vars), p.outputs);
}

VarId VarUniverse::id(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end())
    throw PolicyError("unknown variable '" + std::string(name) + "'");
  return it->second;
}

std::optional<VarId> VarUniverse::try_id(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

AtomId VarUniverse::alpha(VarId v) const {
  AtomId a = alpha_.at(static_cast<size_t>(v));
  if (a < 0) throw PolicyError("variable '" + name(v) + "' is not an output (no alpha atom)");
  return a;
}

TypeEnv::TypeEnv(std::shared_ptr<const VarUniverse> uni) : uni_(std::move(uni)) {
  types_.resize(static_cast<size_t>(uni_->var_count()));
}

TypeEnv TypeEnv::initial(std::shared_ptr<const VarUniverse> uni) {
  TypeEnv env(uni);
  for (VarId v = 0; v < uni->var_count(); ++v)
    if (v != uni->leak_var()) env.set(v, SecType::single(uni->real_atom(v)));
  return env;
}

SecType TypeEnv::lookup_alpha(const std::vector<VarId>& vars) const {
  SecType t;
  for (VarId v : vars) {
    if (uni_->is_output(v))
      t = join(t, SecType::single(uni_->alpha(v)));
    else
      t = join(t, at(v));
  }
  return t;
}

SecType TypeEnv::lookup_alpha_names(const std::set<std::string>& names) const {
  std::vector<VarId> ids;
  ids.reserve(names.size());
  for (const auto& n : names) ids.push_back(uni_->id(n));
  return lookup_alpha(ids);
}

bool operator==(const TypeEnv& a, const TypeEnv& b) {
  return a.uni_ == b.uni_ && a.types_ == b.types_;
}

std::vector<std::pair<VarId, VarId>> dependency_graph(const TypeEnv& env) {
  std::vector<std::pair<VarId, VarId>> edges;
  const auto& outs = env.uni().output_vars();
  for (VarId o1 : outs) {
    AtomId a1 = env.uni().alpha(o1);
    for (VarId o2 : outs)
      if (env.at(o2).contains(a1)) edges.emplace_back(o1, o2);
  }
  return edges;
}

namespace {

// Adjacency + transitive reachability over X_O restricted graph.
struct OutGraph {
  std::vector<VarId> nodes;
  std::map<VarId, std::set<VarId>> succ;

  explicit OutGraph(const TypeEnv& env) {
    nodes = env.uni().output_vars();
    for (auto [o1, o2] : dependency_graph(env)) succ[o1].insert(o2);
  }

  // nonempty-path reachability from x
  std::set<VarId> reach_from(VarId x) const {
    std::set<VarId> seen;
    std::vector<VarId> work(succ.count(x) ? std::vector<VarId>(succ.at(x).begin(), succ.at(x).end())
                                          : std::vector<VarId>{});
    while (!work.empty()) {
      VarId v = work.back();
      work.pop_back();
      if (!seen.insert(v).second) continue;
      if (auto it = succ.find(v); it != succ.end())
        for (VarId w : it->second) work.push_back(w);
    }
    return seen;
  }
};

}  // namespace

bool well_formed(const TypeEnv& env) {
  OutGraph g(env);
  for (VarId o : g.nodes) {
    auto r = g.reach_from(o);
    if (r.count(o)) return false;
  }
  return true;
}

std::set<VarId> reachable(const TypeEnv& env, VarId x) {
  if (!env.uni().is_output(x))
    throw PolicyError("reachable() requires an output variable");
  return OutGraph(env).reach_from(x);
}

TypeEnv triangle_var(const TypeEnv& env, VarId o) {
  const VarUniverse& u = env.uni();
  if (!u.is_output(o)) throw PolicyError("⊲ requires an output variable");
  AtomId a = u.alpha(o);
  const SecType& real = env.at(o);
  TypeEnv out = env;
  for (VarId v = 0; v < u.var_count(); ++v)
    out.set(v, subst(u.atoms(), env.at(v), a, real));
  return out;
}

SecType triangle_level(const SecType& p, const TypeEnv& env, VarId o) {
  const VarUniverse& u = env.uni();
  if (!u.is_output(o)) throw PolicyError("⊲ requires an output variable");
  return subst(u.atoms(), p, u.alpha(o), env.at(o));
}

std::vector<VarId> compatible_order(const TypeEnv& env, const std::set<VarId>& X) {
  if (!well_formed(env))
    throw PolicyError("no compatible ordering: environment is not well formed");
  OutGraph g(env);
  // x ⊑_Γ y for members of X, via paths through the full graph
  std::map<VarId, std::set<VarId>> reach;
  for (VarId x : X) {
    auto r = g.reach_from(x);
    for (VarId y : r)
      if (X.count(y) && y != x) reach[x].insert(y);
  }
  // position j ≤ k requires x_j not ⊑_Γ x_k: pick next an x that reaches no
  // remaining element; lexicographically smallest name among candidates.
  std::set<VarId> remaining = X;
  std::vector<VarId> order;
  while (!remaining.empty()) {
    VarId best = -1;
    for (VarId x : remaining) {
      bool ok = true;
      if (auto it = reach.find(x); it != reach.end())
        for (VarId y : it->second)
          if (remaining.count(y) && y != x) { ok = false; break; }
      if (!ok) continue;
      if (best < 0 || env.uni().name(x) < env.uni().name(best)) best = x;
    }
    if (best < 0) throw PolicyError("no compatible ordering: cyclic symbolic dependencies");
    order.push_back(best);
    remaining.erase(best);
  }
  return order;
}

TypeEnv triangle_set(const TypeEnv& env, const std::set<VarId>& X) {
  TypeEnv out = env;
  for (VarId o : compatible_order(env, X)) out = triangle_var(out, o);
  return out;
}

SecType triangle_set_level(const SecType& p, const TypeEnv& env, const std::set<VarId>& X) {
  SecType out = p;
  for (VarId o : compatible_order(env, X)) out = triangle_level(out, env, o);
  return out;
}

namespace {
void require_same_universe(const TypeEnv& a, const TypeEnv& b) {
  if (a.uni_ptr() != b.uni_ptr())
    throw PolicyError("environment operation across different variable universes");
}
}  // namespace

TypeEnv env_join(const TypeEnv& a, const TypeEnv& b) {
  require_same_universe(a, b);
  TypeEnv out = a;
  for (VarId v = 0; v < a.uni().var_count(); ++v) out.set(v, join(a.at(v), b.at(v)));
  return out;
}

bool env_leq(const TypeEnv& a, const TypeEnv& b) {
  require_same_universe(a, b);
  for (VarId v = 0; v < a.uni().var_count(); ++v)
    if (!leq(a.at(v), b.at(v))) return false;
  return true;
}

bool env_leq_r(const TypeEnv& a, const TypeEnv& b) {
  require_same_universe(a, b);
  for (VarId v = 0; v < a.uni().var_count(); ++v)
    if (!leq_r(a.uni().atoms(), a.at(v), b.at(v))) return false;
  return true;
}

std::string render(const TypeEnv& env) {
  std::string s;
  for (VarId v = 0; v < env.uni().var_count(); ++v) {
    s += env.uni().name(v);
    s += ": ";
    s += render(env.uni().atoms(), env.at(v));
    s += "\n";
  }
  return s;
}

}  // namespace oscta
