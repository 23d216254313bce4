#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "oscta/generator.hpp"
#include "oscta/instrument.hpp"
#include "oscta/ir_typing.hpp"
#include "oscta/oracle.hpp"
#include "oscta/while_typing.hpp"

using namespace oscta;

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PolicyError("cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Minimal policy inferred from program text alone: identifiers followed by
// '[' are arrays, other non-keyword identifiers are scalars. Used by the
// subcommands the spec defines without a policy argument.
Policy infer_policy(const std::string& text) {
  static const std::set<std::string> kw = {"skip", "if", "then", "else", "fi", "while", "do", "od"};
  Policy p;
  std::set<std::string> scalars, arrays;
  for (size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = i;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
        ++i;
      std::string name = text.substr(start, i - start);
      if (kw.count(name) || name == kLeakVarName) continue;
      size_t j = i;
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '[')
        arrays.insert(name);
      else
        scalars.insert(name);
      continue;
    }
    ++i;
  }
  for (const auto& a : arrays) scalars.erase(a);
  p.vars.assign(scalars.begin(), scalars.end());
  for (const auto& a : arrays) p.arrays[a] = 2;
  return p;
}

Policy policy_from_store_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Policy p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_array())
      p.arrays[it.key()] = static_cast<int>(it.value().size());
    else
      p.vars.push_back(it.key());
  }
  return p;
}

nlohmann::json env_to_json(const TypeEnv& env) {
  nlohmann::json j = nlohmann::json::object();
  for (VarId v = 0; v < env.uni().var_count(); ++v) {
    auto arr = nlohmann::json::array();
    for (AtomId a : env.at(v).atoms()) arr.push_back(env.uni().atoms().render_atom(a));
    j[env.uni().name(v)] = std::move(arr);
  }
  return j;
}

nlohmann::json sectype_to_json(const AtomUniverse& u, const SecType& t) {
  auto arr = nlohmann::json::array();
  for (AtomId a : t.atoms()) arr.push_back(u.render_atom(a));
  return arr;
}

struct PrintSink : DerivationSink {
  std::ostream& os;
  explicit PrintSink(std::ostream& o) : os(o) {}

  static std::string head(const WhileCmd* c) {
    std::string s = print_cmd(*c);
    if (auto nl = s.find('\n'); nl != std::string::npos) s = s.substr(0, nl) + " ...";
    return s;
  }

  void after_stmt(const WhileCmd* c, const TypeEnv& post) override {
    os << "after: " << head(c) << "\n" << render(post) << "\n";
  }
  void if_branch_pc(const WhileCmd* c, const SecType& pc) override {
    os << "branch pc of: " << head(c) << "\n  p = " << (uni_ ? render(*uni_, pc) : "{?}")
       << "\n\n";
  }
  void branch_post(const WhileCmd* c, int which, const TypeEnv& post) override {
    os << (which == 0 ? "then-branch of: " : "else-branch of: ") << head(c) << "\n"
       << render(post) << "\n";
  }
  void loop_post(const WhileCmd* c, int iterations, const TypeEnv& post) override {
    os << "fixpoint (" << iterations << " iterations) of: " << head(c) << "\n"
       << render(post) << "\n";
  }

 private:
  const AtomUniverse* uni_ = nullptr;

 public:
  void bind(const AtomUniverse& u) { uni_ = &u; }
};

int cmd_check(const std::string& prog_path, const std::string& policy_path, bool base_mode,
              bool dump_env, const std::string& format) {
  Policy policy = Policy::load_file(policy_path);
  CmdPtr prog = parse_while(slurp(prog_path), policy);
  TypeMode mode = base_mode ? TypeMode::Base : TypeMode::ConstantTime;

  PrintSink sink(std::cout);
  auto uni = VarUniverse::for_policy(policy);
  sink.bind(uni->atoms());
  WhileVerdict v = check_while(mode, policy, *prog, dump_env ? &sink : nullptr);

  if (format == "json") {
    nlohmann::json j;
    j["verdict"] = v.accepted ? "accept" : "reject";
    j["final_env"] = env_to_json(v.final_env);
    j["leak_witness"] = sectype_to_json(v.final_env.uni().atoms(), v.witness);
    j["allowed"] = sectype_to_json(v.final_env.uni().atoms(), v.allowed);
    auto loops = nlohmann::json::array();
    for (const auto& l : v.loops) {
      nlohmann::json e;
      e["loop"] = PrintSink::head(l.loop);
      e["iterations"] = l.iterations;
      loops.push_back(std::move(e));
    }
    j["fixpoint_iterations"] = std::move(loops);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (v.accepted ? "Accept" : "Reject") << "\n";
    if (!v.accepted)
      std::cout << "witness: " << render(v.final_env.uni().atoms(), v.witness) << "\n";
    std::cout << "final environment:\n" << render(v.final_env);
  }
  return v.accepted ? kExitAccept : kExitReject;
}

int cmd_check_ir(const std::string& prog_path, const std::string& policy_path, bool dump_env,
                 const std::string& format) {
  IrProgram p = parse_ir_file(prog_path);
  IrPolicy policy = IrPolicy::load_file(policy_path);
  IrAnalysis a = prepare_ir(p, policy);
  IrVerdictResult v = ir_verdict(a);

  if (dump_env) {
    for (const auto& bn : a.dom.reachable_blocks()) {
      if (!v.flow.block_entry.count(bn)) continue;
      std::cout << "block " << bn << " entry:\n" << render(v.flow.block_entry.at(bn)) << "\n";
      const IrBlock& b = p.block(bn);
      for (int i = 0; i < static_cast<int>(b.instrs.size()); ++i) {
        std::cout << "after: " << b.instrs[static_cast<size_t>(i)].text() << "\n"
                  << render(v.flow.at_point(a, bn, i + 1)) << "\n";
      }
    }
  }

  if (format == "json") {
    nlohmann::json j;
    j["verdict"] = v.accepted ? "accept" : "reject";
    j["well_typed"] = v.welltyped.ok;
    if (!v.welltyped.ok) j["well_typed_failure"] = v.welltyped.failure;
    j["exit_env"] = env_to_json(v.exit_env);
    j["leak_witness"] = sectype_to_json(v.exit_env.uni().atoms(), v.witness);
    j["allowed"] = sectype_to_json(v.exit_env.uni().atoms(), v.allowed);
    auto edges = nlohmann::json::array();
    for (const auto& c : v.welltyped.certificates) {
      nlohmann::json e;
      e["from"] = c.from;
      e["to"] = c.to;
      e["subst_outputs"] = c.subst_outputs;
      e["ok"] = c.ok;
      edges.push_back(std::move(e));
    }
    j["edges"] = std::move(edges);
    nlohmann::json blocks = nlohmann::json::object();
    for (const auto& [bn, env] : v.flow.block_entry) blocks[bn] = env_to_json(env);
    j["blocks"] = std::move(blocks);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (v.accepted ? "Accept" : "Reject") << "\n";
    if (!v.welltyped.ok) std::cout << "not well-typed: " << v.welltyped.failure << "\n";
    if (!v.witness.is_bottom())
      std::cout << "witness: " << render(v.exit_env.uni().atoms(), v.witness) << "\n";
    std::cout << "exit environment:\n" << render(v.exit_env);
  }
  return v.accepted ? kExitAccept : kExitReject;
}

int cmd_run(const std::string& prog_path, const std::string& store_path, long long cap) {
  std::string text = slurp(prog_path);
  Policy policy;
  WhileStore store;
  if (!store_path.empty()) {
    std::string store_text = slurp(store_path);
    policy = policy_from_store_json(store_text);
    Policy from_prog = infer_policy(text);
    for (const auto& v : from_prog.vars)
      if (!policy.known(v)) policy.vars.push_back(v);
    for (const auto& [a, len] : from_prog.arrays)
      if (!policy.known(a)) policy.arrays[a] = len;
    store = WhileStore::from_json_text(policy, store_text);
  } else {
    policy = infer_policy(text);
    store = WhileStore::zeros(policy);
  }
  CmdPtr prog = parse_while(text, policy);
  RunOutcome out = run(*prog, std::move(store), RunLimits{cap});
  if (out.status == RunStatus::Timeout) {
    std::cerr << "timeout: " << out.error << "\n";
    return kExitReject;
  }
  if (out.status == RunStatus::RuntimeError) {
    std::cerr << "runtime error: " << out.error << "\n";
    return kExitReject;
  }
  std::cout << "store: " << out.store.to_json() << "\n";
  std::cout << "trace: " << render(out.trace) << "\n";
  return kExitAccept;
}

int cmd_instrument(const std::string& prog_path, const std::string& policy_path) {
  std::string text = slurp(prog_path);
  Policy policy = policy_path.empty() ? infer_policy(text) : Policy::load_file(policy_path);
  CmdPtr prog = parse_while(text, policy);
  std::cout << print_cmd(*instrument(prog)) << "\n";
  return kExitAccept;
}

long long env_budget(long long fallback) {
  const char* b = std::getenv("OSCTA_BUDGET");
  if (!b) return fallback;
  return std::atoll(b);
}

int cmd_oracle(const std::string& mode, const std::string& policy_path,
               const std::string& prog_path, int domain, long long cap, bool do_instrument,
               const std::vector<std::string>& pins) {
  EnumSpec spec;
  spec.domain = domain;
  spec.step_cap = cap;
  spec.budget = env_budget(spec.budget);
  for (const auto& p : pins) {
    auto eq = p.find('=');
    if (eq == std::string::npos) throw PolicyError("--pin expects name=value");
    spec.pins[p.substr(0, eq)] = std::atoll(p.c_str() + eq + 1);
  }

  nlohmann::json j;
  bool holds = false;
  if (ends_with(prog_path, ".ir")) {
    if (mode != "osct") throw PolicyError("IR programs support --mode osct only");
    IrProgram p = parse_ir_file(prog_path);
    IrPolicy policy = IrPolicy::load_file(policy_path);
    IrOsctResult r = check_osct_ir(p, policy, spec);
    holds = r.holds();
    j["verdict"] = holds ? "holds" : "counterexample";
    j["stats"] = {{"stores", r.stats.stores},
                  {"ok_runs", r.stats.ok_runs},
                  {"timeouts", r.stats.timeouts},
                  {"runtime_errors", r.stats.runtime_errors},
                  {"comparisons", r.stats.comparisons}};
    if (!holds) {
      j["sigma"] = r.counterexample->mem_sigma;
      j["rho"] = r.counterexample->mem_rho;
      j["position"] = r.counterexample->position;
      j["trace_sigma"] = render(r.counterexample->trace_sigma);
      j["trace_rho"] = render(r.counterexample->trace_rho);
    }
  } else {
    Policy policy = Policy::load_file(policy_path);
    CmdPtr prog = parse_while(slurp(prog_path), policy);
    if (do_instrument) prog = instrument(prog);
    if (mode == "osni") {
      OsniResult r = check_osni(policy, *prog, spec);
      holds = r.holds();
      j["verdict"] = holds ? "holds" : "counterexample";
      j["stats"] = {{"stores", r.stats.stores},
                    {"ok_runs", r.stats.ok_runs},
                    {"timeouts", r.stats.timeouts},
                    {"runtime_errors", r.stats.runtime_errors},
                    {"comparisons", r.stats.comparisons}};
      if (!holds) {
        j["sigma"] = nlohmann::json::parse(r.counterexample->sigma.to_json());
        j["rho"] = nlohmann::json::parse(r.counterexample->rho.to_json());
        j["variable"] = r.counterexample->variable;
      }
    } else if (mode == "osct") {
      OsctResult r = check_osct(policy, *prog, spec);
      holds = r.holds();
      j["verdict"] = holds ? "holds" : "counterexample";
      j["stats"] = {{"stores", r.stats.stores},
                    {"ok_runs", r.stats.ok_runs},
                    {"timeouts", r.stats.timeouts},
                    {"runtime_errors", r.stats.runtime_errors},
                    {"comparisons", r.stats.comparisons}};
      if (!holds) {
        j["sigma"] = nlohmann::json::parse(r.counterexample->sigma.to_json());
        j["rho"] = nlohmann::json::parse(r.counterexample->rho.to_json());
        j["position"] = r.counterexample->position;
        j["trace_sigma"] = render(r.counterexample->trace_sigma);
        j["trace_rho"] = render(r.counterexample->trace_rho);
      }
    } else {
      throw PolicyError("--mode must be osni or osct");
    }
  }
  std::cout << j.dump(2) << "\n";
  return holds ? kExitAccept : kExitReject;
}

int cmd_fuzz(const std::string& lang, std::uint64_t seed, int count, int domain, long long cap) {
  EnumSpec spec;
  spec.domain = domain;
  spec.step_cap = cap;
  spec.budget = env_budget(spec.budget);
  FuzzReport rep;
  if (lang == "ir") {
    rep = fuzz_ir(seed, count, IrGenOptions{}, spec);
  } else {
    rep = fuzz_while(seed, count, WhileGenOptions{}, spec);
  }
  std::cout << rep.to_json() << "\n";
  if (rep.internal_errors > 0) return kExitInternal;
  return rep.soundness_failures == 0 ? kExitAccept : kExitReject;
}

int cmd_dump_cfg(const std::string& prog_path) {
  IrProgram p = parse_ir_file(prog_path);
  DomInfo d = compute_dominators(p);
  PtsMap pts = points_to(p);
  nlohmann::json j;
  j["idom"] = d.idom();
  j["ipdom"] = d.ipdom();
  nlohmann::json deps = nlohmann::json::object();
  for (const auto& b : d.reachable_blocks()) {
    auto ds = dep(p, d, b);
    deps[b] = std::vector<std::string>(ds.begin(), ds.end());
  }
  j["dep"] = std::move(deps);
  nlohmann::json pj = nlohmann::json::object();
  for (const auto& [name, set] : pts.all())
    pj[name] = std::vector<std::string>(set.begin(), set.end());
  j["ptsto"] = std::move(pj);
  nlohmann::json regions = nlohmann::json::object();
  for (const auto& b : d.reachable_blocks()) {
    auto it = d.idom().find(b);
    if (it == d.idom().end()) continue;
    for (const auto& from : d.reachable_blocks()) {
      auto succs = p.successors(from);
      if (std::find(succs.begin(), succs.end(), b) == succs.end()) continue;
      auto reg = hammock_region(p, d, it->second, b, from);
      regions[b][from] = std::vector<std::string>(reg.begin(), reg.end());
    }
  }
  j["regions"] = std::move(regions);
  std::cout << j.dump(2) << "\n";
  return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscta: output-sensitive constant-time static analyzer"};
  app.require_subcommand(1);

  std::string prog_path, policy_path, store_path, format = "text", mode = "osct",
              lang = "while";
  bool base_mode = false, ct_mode = false, dump_env = false, do_instrument = false;
  long long cap = 10000;
  int domain = 2, count = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> pins;

  auto* check = app.add_subcommand("check", "type-check a While program");
  check->add_flag("--base", base_mode, "base output-sensitive system");
  check->add_flag("--ct", ct_mode, "constant-time system (default)");
  check->add_flag("--dump-env", dump_env, "print the derivation environments");
  check->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  check->add_option("program", prog_path)->required();
  check->add_option("policy", policy_path)->required();

  auto* check_ir = app.add_subcommand("check-ir", "type-check an IR program");
  check_ir->add_flag("--dump-env", dump_env, "print per-instruction environments");
  check_ir->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  check_ir->add_option("program", prog_path)->required();
  check_ir->add_option("policy", policy_path)->required();

  auto* runcmd = app.add_subcommand("run", "run a While program with the labeled semantics");
  runcmd->add_option("program", prog_path)->required();
  runcmd->add_option("--store", store_path, "initial store JSON");
  runcmd->add_option("--cap", cap, "step cap");

  auto* instr = app.add_subcommand("instrument", "print the leakage instrumentation of a program");
  instr->add_option("program", prog_path)->required();
  instr->add_option("--policy", policy_path);

  auto* oracle = app.add_subcommand("oracle", "brute-force dynamic check");
  oracle->add_option("--mode", mode)->check(CLI::IsMember({"osni", "osct"}));
  oracle->add_option("--domain", domain, "cell values range over 0..domain-1");
  oracle->add_option("--cap", cap, "step cap per run");
  oracle->add_flag("--instrument", do_instrument, "check the instrumented program");
  oracle->add_option("--pin", pins, "pin a scalar, name=value")->take_all();
  oracle->add_option("policy", policy_path)->required();
  oracle->add_option("program", prog_path)->required();

  auto* fuzz = app.add_subcommand("fuzz", "soundness fuzzing of the type systems");
  fuzz->add_option("--lang", lang)->check(CLI::IsMember({"while", "ir"}));
  fuzz->add_option("--seed", seed);
  fuzz->add_option("--count", count);
  fuzz->add_option("--domain", domain);
  fuzz->add_option("--cap", cap);

  auto* dump = app.add_subcommand("dump-cfg", "dominators, dep sets, regions and points-to");
  dump->add_option("program", prog_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (check->parsed()) {
      if (base_mode && ct_mode) {
        std::cerr << "choose one of --base / --ct\n";
        return kExitUsage;
      }
      return cmd_check(prog_path, policy_path, base_mode, dump_env, format);
    }
    if (check_ir->parsed()) return cmd_check_ir(prog_path, policy_path, dump_env, format);
    if (runcmd->parsed()) return cmd_run(prog_path, store_path, cap);
    if (instr->parsed()) return cmd_instrument(prog_path, policy_path);
    if (oracle->parsed())
      return cmd_oracle(mode, policy_path, prog_path, domain, cap, do_instrument, pins);
    if (fuzz->parsed()) return cmd_fuzz(lang, seed, count, domain, cap);
    if (dump->parsed()) return cmd_dump_cfg(prog_path);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
