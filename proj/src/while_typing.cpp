#include "oscta/while_typing.hpp"

#include <atomic>

namespace oscta {

namespace {

std::atomic<long long> g_fixpoint_bound_hits{0};

std::set<VarId> to_ids(const VarUniverse& u, const std::set<std::string>& names) {
  std::set<VarId> out;
  for (const auto& n : names) out.insert(u.id(n));
  return out;
}

std::set<std::string> fv_of_indexes(const WhileExpr& e) {
  std::set<std::string> out;
  for (const auto& f : index_exprs(e)) {
    auto fs = free_vars(*f);
    out.insert(fs.begin(), fs.end());
  }
  return out;
}

void assert_wf(const TypeEnv& env, const char* where) {
  if (!well_formed(env))
    throw InternalError(std::string("ill-formed environment produced by rule ") + where);
}

long long fixpoint_bound(const TypeEnv& env) {
  return static_cast<long long>(env.uni().var_count()) * env.uni().atoms().size() + 1;
}

struct Typer {
  TypeMode mode;
  const TypingHooks& hooks;

  TypeEnv command(const SecType& pc, const TypeEnv& env, const WhileCmd& c) {
    switch (c.kind) {
      case WhileCmd::Kind::Skip: {
        notify(c, env);
        return env;
      }
      case WhileCmd::Kind::Assign:
        return assign(pc, env, c);
      case WhileCmd::Kind::ArrAssign:
        return array_store(pc, env, c);
      case WhileCmd::Kind::Seq: {
        TypeEnv mid = command(pc, env, *c.c1);
        return command(pc, mid, *c.c2);
      }
      case WhileCmd::Kind::If:
        return branch(pc, env, c);
      case WhileCmd::Kind::While: {
        TypeEnv out = while_fixpoint(mode, pc, env, c, hooks);
        notify(c, out);
        return out;
      }
    }
    throw TypingError("bad command");
  }

  void notify(const WhileCmd& c, const TypeEnv& post) {
    if (hooks.sink) hooks.sink->after_stmt(&c, post);
  }

  TypeEnv assign(const SecType& pc, const TypeEnv& env, const WhileCmd& c) {
    const VarUniverse& u = env.uni();
    VarId x = u.id(c.target);
    auto fv = free_vars(*c.expr);
    TypeEnv out(env.uni_ptr());

    if (!u.is_output(x)) {
      // As1 / As1'
      out = env;
      out.set(x, join(pc, env.lookup_alpha_names(fv)));
      if (mode == TypeMode::ConstantTime)
        out.join_into(u.leak_var(), env.lookup_alpha_names(fv_of_indexes(*c.expr)));
    } else if (!fv.count(c.target)) {
      // As2 / As2'
      TypeEnv g1 = triangle_var(env, x);
      out = g1;
      out.set(x, join(pc, g1.lookup_alpha_names(fv)));
      if (mode == TypeMode::ConstantTime)
        out.join_into(u.leak_var(), g1.lookup_alpha_names(fv_of_indexes(*c.expr)));
    } else {
      // As3 / As3'
      TypeEnv g1 = triangle_var(env, x);
      auto fv_minus = fv;
      fv_minus.erase(c.target);
      out = g1;
      out.set(x, join(join(pc, env.at(x)), g1.lookup_alpha_names(fv_minus)));
      if (mode == TypeMode::ConstantTime)
        out.join_into(u.leak_var(), g1.lookup_alpha_names(fv_of_indexes(*c.expr)));
    }
    assert_wf(out, "As");
    notify(c, out);
    return out;
  }

  // Ast' (constant-time) and its leakage-free base variant.
  TypeEnv array_store(const SecType& pc, const TypeEnv& env, const WhileCmd& c) {
    const VarUniverse& u = env.uni();
    VarId x = u.id(c.target);
    auto fv1 = free_vars(*c.index);
    auto fve = free_vars(*c.expr);

    std::set<std::string> fv_val = fv1;
    fv_val.insert(fve.begin(), fve.end());
    SecType p1 = env.lookup_alpha_names(fv_val);

    TypeEnv out = env;
    out.set(x, join(join(pc, env.at(x)), p1));
    if (mode == TypeMode::ConstantTime) {
      std::set<std::string> fv_leak = fv1;
      auto fvf = fv_of_indexes(*c.expr);
      fv_leak.insert(fvf.begin(), fvf.end());
      out.join_into(u.leak_var(), env.lookup_alpha_names(fv_leak));
    }
    assert_wf(out, "Ast");
    notify(c, out);
    return out;
  }

  TypeEnv branch(const SecType& pc, const TypeEnv& env, const WhileCmd& c) {
    const VarUniverse& u = env.uni();
    auto fv = free_vars(*c.expr);
    SecType p_l = env.lookup_alpha_names(fv);

    std::set<VarId> u1 = to_ids(u, assigned_vars(*c.c1, u).outputs);
    std::set<VarId> u2 = to_ids(u, assigned_vars(*c.c2, u).outputs);
    std::set<VarId> u12 = u1;
    u12.insert(u2.begin(), u2.end());

    SecType p_prime = triangle_set_level(p_l, env, u12);
    SecType branch_pc = join(pc, p_prime);
    if (hooks.sink) hooks.sink->if_branch_pc(&c, branch_pc);

    TypeEnv seed = env;
    if (mode == TypeMode::ConstantTime) seed.join_into(u.leak_var(), p_l);

    TypeEnv g1 = command(branch_pc, seed, *c.c1);
    TypeEnv g2 = command(branch_pc, seed, *c.c2);
    if (hooks.sink) {
      hooks.sink->branch_post(&c, 0, g1);
      hooks.sink->branch_post(&c, 1, g2);
    }

    TypeEnv out = env_join(triangle_set(g1, u2), triangle_set(g2, u1));
    assert_wf(out, "If");
    notify(c, out);
    return out;
  }
};

}  // namespace

TypeEnv while_fixpoint(TypeMode mode, const SecType& pc, const TypeEnv& env,
                       const WhileCmd& loop, const TypingHooks& hooks) {
  if (loop.kind != WhileCmd::Kind::While) throw TypingError("while_fixpoint: not a loop");
  const VarUniverse& u = env.uni();
  TypingHooks inner;  // discarded iterations are not reported
  Typer typer{mode, inner};
  auto fv = free_vars(*loop.expr);
  std::set<VarId> defs = to_ids(u, assigned_vars(*loop.c1, u).outputs);

  // The constant part of the rule's left-hand side, and the seed.
  TypeEnv const_term(env.uni_ptr());
  if (mode == TypeMode::Base) {
    const_term = triangle_set(env, defs);
  } else {
    SecType p_l = env.lookup_alpha_names(fv);
    const_term = env;
    const_term.join_into(u.leak_var(), p_l);
  }

  TypeEnv g = const_term;
  long long bound = fixpoint_bound(env);
  int iters = 0;
  for (;;) {
    if (++iters > bound) {
      ++g_fixpoint_bound_hits;
      throw InternalError(
          "while fixpoint exceeded its iteration bound; transfer is not monotone");
    }
    SecType p_e = g.lookup_alpha_names(fv);
    TypeEnv next(env.uni_ptr());
    if (mode == TypeMode::Base) {
      TypeEnv body_out = typer.command(join(pc, p_e), g, *loop.c1);
      next = env_join(const_term, triangle_set(body_out, defs));
    } else {
      TypeEnv body_in = g;
      body_in.set(u.leak_var(), join(env.at(u.leak_var()), p_e));
      TypeEnv body_out = typer.command(join(pc, p_e), body_in, *loop.c1);
      body_out.join_into(u.leak_var(), p_e);
      next = env_join(const_term, triangle_set(body_out, defs));
    }
    if (next == g) break;
    g = std::move(next);
  }

  assert_wf(g, "Wh");
  if (hooks.loop_stats) hooks.loop_stats->push_back({&loop, iters});
  if (hooks.sink || hooks.loop_stats) {
    // replay the converged body once so nested loops and branch environments
    // report their stabilized derivation
    Typer reporter{mode, hooks};
    SecType p_e = g.lookup_alpha_names(fv);
    TypeEnv body_in = g;
    if (mode == TypeMode::ConstantTime)
      body_in.set(u.leak_var(), join(env.at(u.leak_var()), p_e));
    (void)reporter.command(join(pc, p_e), body_in, *loop.c1);
  }
  if (hooks.sink) hooks.sink->loop_post(&loop, iters, g);
  return g;
}

TypeEnv type_cmd(TypeMode mode, const SecType& pc, const TypeEnv& env, const WhileCmd& c,
                 const TypingHooks& hooks) {
  if (!well_formed(env)) throw TypingError("initial environment is not well formed");
  if (mode == TypeMode::ConstantTime && free_vars(c).count(kLeakVarName))
    throw TypingError("constant-time mode rejects programs mentioning xl");
  Typer typer{mode, hooks};
  return typer.command(pc, env, c);
}

WhileVerdict check_while(TypeMode mode, const Policy& policy, const WhileCmd& c,
                         DerivationSink* sink) {
  auto uni = VarUniverse::for_policy(policy);
  TypeEnv init = TypeEnv::initial(uni);

  WhileVerdict v(init);
  TypingHooks hooks;
  hooks.sink = sink;
  hooks.loop_stats = &v.loops;
  TypeEnv out = type_cmd(mode, SecType::bottom(), init, c, hooks);

  SecType allowed;
  for (const auto& i : policy.inputs) allowed = join(allowed, init.at(uni->id(i)));
  for (const auto& o : policy.outputs)
    allowed = join(allowed, SecType::single(uni->alpha(uni->id(o))));
  v.allowed = allowed;

  SecType witness;
  if (mode == TypeMode::ConstantTime) {
    witness = atoms_minus(out.at(uni->leak_var()), allowed);
  } else {
    for (const auto& l : policy.leaks) {
      VarId lv = l == kLeakVarName ? uni->leak_var() : uni->id(l);
      witness = join(witness, atoms_minus(out.at(lv), allowed));
    }
  }
  v.accepted = witness.is_bottom();
  v.witness = witness;
  v.final_env = std::move(out);
  return v;
}

long long fixpoint_bound_hits() { return g_fixpoint_bound_hits.load(); }

}  // namespace oscta
