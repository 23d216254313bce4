#pragma once

#include <functional>
#include <vector>

#include "oscta/secenv.hpp"
#include "oscta/while_ast.hpp"

namespace oscta {

struct TypingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal invariant breach (ill-formed environment, diverging fixpoint).
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TypeMode { Base, ConstantTime };

// Observer for derivation traces (golden tests, --dump-env).
struct DerivationSink {
  virtual ~DerivationSink() = default;
  virtual void after_stmt(const WhileCmd* c, const TypeEnv& post) { (void)c, (void)post; }
  virtual void if_branch_pc(const WhileCmd* c, const SecType& pc) { (void)c, (void)pc; }
  virtual void branch_post(const WhileCmd* c, int which, const TypeEnv& post) {
    (void)c, (void)which, (void)post;
  }
  virtual void loop_post(const WhileCmd* c, int iterations, const TypeEnv& post) {
    (void)c, (void)iterations, (void)post;
  }
};

struct LoopStat {
  const WhileCmd* loop;
  int iterations;
};

struct TypingHooks {
  DerivationSink* sink = nullptr;
  std::vector<LoopStat>* loop_stats = nullptr;
};

// Syntax-directed application of the typing rules; returns the unique
// post-environment. Throws InternalError if an intermediate environment is
// ill formed or a loop fixpoint exceeds its iteration bound.
TypeEnv type_cmd(TypeMode mode, const SecType& pc, const TypeEnv& env, const WhileCmd& c,
                 const TypingHooks& hooks = {});

// The fixpoint for While loops, exposed for tests.
TypeEnv while_fixpoint(TypeMode mode, const SecType& pc, const TypeEnv& env,
                       const WhileCmd& loop, const TypingHooks& hooks = {});

struct WhileVerdict {
  bool accepted = false;
  SecType witness;          // atoms above Γ(X_I) ⊔ α(X_O) on reject
  SecType allowed;          // Γ(X_I) ⊔ α(X_O)
  TypeEnv final_env;
  std::vector<LoopStat> loops;

  explicit WhileVerdict(TypeEnv env) : final_env(std::move(env)) {}
};

// Type-check from the initial environment (Γ(x)={τ_x}, Γ(xl)=⊥) and compare
// the leak variables against Γ(X_I) ⊔ α(X_O). Base mode checks every
// variable in X_L; constant-time mode checks xl.
WhileVerdict check_while(TypeMode mode, const Policy& policy, const WhileCmd& c,
                         DerivationSink* sink = nullptr);

// Number of fixpoint-bound aborts observed process-wide (must stay 0).
long long fixpoint_bound_hits();

}  // namespace oscta
