#include "oscta/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace oscta {

namespace {

// One assignable cell of the enumerated state space.
struct Cell {
  std::string var;
  int index = -1;  // -1 for scalars
  bool is_input = false;
};

struct WhileSpace {
  std::vector<Cell> cells;
  const Policy* policy;

  static WhileSpace make(const Policy& p, const EnumSpec& spec) {
    WhileSpace s;
    s.policy = &p;
    for (const auto& v : p.vars) {
      if (spec.pins.count(v)) continue;
      bool in = std::find(p.inputs.begin(), p.inputs.end(), v) != p.inputs.end();
      s.cells.push_back({v, -1, in});
    }
    for (const auto& [a, len] : p.arrays) {
      bool in = std::find(p.inputs.begin(), p.inputs.end(), a) != p.inputs.end();
      for (int i = 0; i < len; ++i) s.cells.push_back({a, i, in});
    }
    return s;
  }

  long long count(const EnumSpec& spec) const {
    double total = std::pow(static_cast<double>(spec.domain), static_cast<double>(cells.size()));
    if (total > static_cast<double>(spec.budget))
      throw OracleError("enumeration budget exceeded: " + std::to_string(total) + " stores > " +
                        std::to_string(spec.budget));
    return static_cast<long long>(total);
  }

  WhileStore store_at(long long k, const EnumSpec& spec) const {
    WhileStore s = WhileStore::zeros(*policy);
    for (const auto& [v, val] : spec.pins) s.scalars[v] = val;
    // first cell is the most significant digit
    for (size_t i = cells.size(); i-- > 0;) {
      long long digit = k % spec.domain;
      k /= spec.domain;
      const Cell& c = cells[i];
      if (c.index < 0)
        s.scalars[c.var] = digit;
      else
        s.arrays[c.var][static_cast<size_t>(c.index)] = digit;
    }
    return s;
  }

  long long cell_value(const WhileStore& s, const Cell& c) const {
    if (c.index < 0) return std::get<long long>(s.scalars.at(c.var));
    return s.arrays.at(c.var)[static_cast<size_t>(c.index)];
  }

  void set_cell(WhileStore& s, const Cell& c, long long v) const {
    if (c.index < 0)
      s.scalars[c.var] = v;
    else
      s.arrays[c.var][static_cast<size_t>(c.index)] = v;
  }
};

std::string input_key(const WhileSpace& sp, const WhileStore& s) {
  std::string k;
  for (const auto& c : sp.cells)
    if (c.is_input) k += std::to_string(sp.cell_value(s, c)) + ",";
  return k;
}

std::string output_key(const Policy& p, const WhileStore& final_store) {
  std::string k;
  for (const auto& o : p.outputs)
    k += render_value(final_store.scalars.at(o)) + ",";
  return k;
}

std::optional<std::string> leak_diff(const Policy& p, const WhileStore& a, const WhileStore& b) {
  for (const auto& l : p.leaks) {
    if (l == kLeakVarName || p.is_scalar(l)) {
      if (!(a.scalars.at(l) == b.scalars.at(l))) return l;
    } else {
      if (a.arrays.at(l) != b.arrays.at(l)) return l;
    }
  }
  return std::nullopt;
}

size_t first_trace_diff(const LeakTrace& a, const LeakTrace& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i)
    if (!(a[i] == b[i])) return i;
  return n;
}

// Greedy descent of every cell toward 0 while the violation predicate holds.
template <typename Violates>
void minimize_pair(const WhileSpace& sp, WhileStore& sigma, WhileStore& rho, Violates violates) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : sp.cells) {
      if (c.is_input) {
        while (sp.cell_value(sigma, c) > 0) {
          WhileStore s2 = sigma, r2 = rho;
          sp.set_cell(s2, c, sp.cell_value(sigma, c) - 1);
          sp.set_cell(r2, c, sp.cell_value(rho, c) - 1);
          if (!violates(s2, r2)) break;
          sigma = std::move(s2);
          rho = std::move(r2);
          changed = true;
        }
      } else {
        while (sp.cell_value(sigma, c) > 0) {
          WhileStore s2 = sigma;
          sp.set_cell(s2, c, sp.cell_value(sigma, c) - 1);
          if (!violates(s2, rho)) break;
          sigma = std::move(s2);
          changed = true;
        }
        while (sp.cell_value(rho, c) > 0) {
          WhileStore r2 = rho;
          sp.set_cell(r2, c, sp.cell_value(rho, c) - 1);
          if (!violates(sigma, r2)) break;
          rho = std::move(r2);
          changed = true;
        }
      }
    }
  }
}

}  // namespace

OsniResult check_osni(const Policy& policy, const WhileCmd& c, const EnumSpec& spec) {
  OsniResult res;
  WhileSpace sp = WhileSpace::make(policy, spec);
  long long total = sp.count(spec);
  RunLimits limits{spec.step_cap};

  struct Rep {
    WhileStore init, fin;
  };
  std::map<std::string, std::map<std::string, Rep>> buckets;

  for (long long k = 0; k < total; ++k) {
    WhileStore s = sp.store_at(k, spec);
    ++res.stats.stores;
    RunOutcome out = run(c, s, limits);
    if (out.status == RunStatus::Timeout) {
      ++res.stats.timeouts;
      continue;
    }
    if (out.status == RunStatus::RuntimeError) {
      ++res.stats.runtime_errors;
      continue;
    }
    ++res.stats.ok_runs;
    auto& slot = buckets[input_key(sp, s)];
    std::string ok = output_key(policy, out.store);
    auto it = slot.find(ok);
    if (it == slot.end()) {
      slot.emplace(ok, Rep{std::move(s), std::move(out.store)});
      continue;
    }
    ++res.stats.comparisons;
    if (auto diff = leak_diff(policy, it->second.fin, out.store)) {
      OsniCounterexample cex;
      cex.sigma = it->second.init;
      cex.rho = std::move(s);
      cex.variable = *diff;
      auto violates = [&](const WhileStore& a, const WhileStore& b) {
        RunOutcome ra = run(c, a, limits), rb = run(c, b, limits);
        if (ra.status != RunStatus::Ok || rb.status != RunStatus::Ok) return false;
        if (!ra.store.equal_on(rb.store, policy.outputs)) return false;
        return leak_diff(policy, ra.store, rb.store).has_value();
      };
      minimize_pair(sp, cex.sigma, cex.rho, violates);
      RunOutcome ra = run(c, cex.sigma, limits), rb = run(c, cex.rho, limits);
      cex.variable = *leak_diff(policy, ra.store, rb.store);
      res.counterexample = std::move(cex);
      return res;
    }
  }
  return res;
}

OsctResult check_osct(const Policy& policy, const WhileCmd& c, const EnumSpec& spec) {
  OsctResult res;
  WhileSpace sp = WhileSpace::make(policy, spec);
  long long total = sp.count(spec);
  RunLimits limits{spec.step_cap};

  struct Rep {
    WhileStore init;
    LeakTrace trace;
  };
  std::map<std::string, std::map<std::string, Rep>> buckets;

  for (long long k = 0; k < total; ++k) {
    WhileStore s = sp.store_at(k, spec);
    ++res.stats.stores;
    RunOutcome out = run(c, s, limits);
    if (out.status == RunStatus::Timeout) {
      ++res.stats.timeouts;
      continue;
    }
    if (out.status == RunStatus::RuntimeError) {
      ++res.stats.runtime_errors;
      continue;
    }
    ++res.stats.ok_runs;
    auto& slot = buckets[input_key(sp, s)];
    std::string ok = output_key(policy, out.store);
    auto it = slot.find(ok);
    if (it == slot.end()) {
      slot.emplace(ok, Rep{std::move(s), std::move(out.trace)});
      continue;
    }
    ++res.stats.comparisons;
    if (it->second.trace != out.trace) {
      OsctCounterexample cex;
      cex.sigma = it->second.init;
      cex.rho = std::move(s);
      auto violates = [&](const WhileStore& a, const WhileStore& b) {
        RunOutcome ra = run(c, a, limits), rb = run(c, b, limits);
        if (ra.status != RunStatus::Ok || rb.status != RunStatus::Ok) return false;
        if (!ra.store.equal_on(rb.store, policy.outputs)) return false;
        return ra.trace != rb.trace;
      };
      minimize_pair(sp, cex.sigma, cex.rho, violates);
      RunOutcome ra = run(c, cex.sigma, limits), rb = run(c, cex.rho, limits);
      cex.trace_sigma = std::move(ra.trace);
      cex.trace_rho = std::move(rb.trace);
      cex.position = first_trace_diff(cex.trace_sigma, cex.trace_rho);
      res.counterexample = std::move(cex);
      return res;
    }
  }
  return res;
}

IrOsctResult check_osct_ir(const IrProgram& p, const IrPolicy& policy, const EnumSpec& spec) {
  policy.validate(p);
  IrOsctResult res;
  RunLimits limits{spec.step_cap};

  struct IrCell {
    std::string block;
    int index;
    bool is_input;
  };
  std::vector<IrCell> cells;
  for (const auto& m : p.mem_blocks()) {
    bool in = std::find(policy.inputs.begin(), policy.inputs.end(), m) != policy.inputs.end();
    for (int i = 0; i < p.block_len(m); ++i) cells.push_back({m, i, in});
  }
  double totald = std::pow(static_cast<double>(spec.domain), static_cast<double>(cells.size()));
  if (totald > static_cast<double>(spec.budget))
    throw OracleError("enumeration budget exceeded for IR memory space");
  long long total = static_cast<long long>(totald);

  auto memory_at = [&](long long k) {
    std::map<std::string, std::vector<long long>> mem;
    for (const auto& m : p.mem_blocks())
      mem[m] = std::vector<long long>(static_cast<size_t>(p.block_len(m)), 0);
    for (size_t i = cells.size(); i-- > 0;) {
      long long digit = k % spec.domain;
      k /= spec.domain;
      mem[cells[i].block][static_cast<size_t>(cells[i].index)] = digit;
    }
    return mem;
  };

  auto in_key = [&](const std::map<std::string, std::vector<long long>>& mem) {
    std::string key;
    for (const auto& c : cells)
      if (c.is_input) key += std::to_string(mem.at(c.block)[static_cast<size_t>(c.index)]) + ",";
    return key;
  };

  auto out_key = [&](const IrState& st) {
    std::string key;
    for (const auto& o : policy.outputs) {
      if (p.is_mem_block(o)) {
        for (const auto& v : st.mem.at(o)) key += render_ir_value(v) + ",";
      } else {
        auto it = st.regs.find(o);
        key += (it == st.regs.end() ? std::string("<unset>") : render_ir_value(it->second)) + ";";
      }
    }
    return key;
  };

  struct Rep {
    std::map<std::string, std::vector<long long>> mem;
    LeakTrace trace;
  };
  std::map<std::string, std::map<std::string, Rep>> buckets;

  for (long long k = 0; k < total; ++k) {
    auto mem = memory_at(k);
    ++res.stats.stores;
    IrRunOutcome out = run_ir(p, initial_ir_state(p, mem), limits);
    if (out.status == RunStatus::Timeout) {
      ++res.stats.timeouts;
      continue;
    }
    if (out.status == RunStatus::RuntimeError) {
      ++res.stats.runtime_errors;
      continue;
    }
    ++res.stats.ok_runs;
    auto& slot = buckets[in_key(mem)];
    std::string ok = out_key(out.state);
    auto it = slot.find(ok);
    if (it == slot.end()) {
      slot.emplace(ok, Rep{std::move(mem), std::move(out.trace)});
      continue;
    }
    ++res.stats.comparisons;
    if (it->second.trace != out.trace) {
      IrOsctCounterexample cex;
      cex.mem_sigma = it->second.mem;
      cex.mem_rho = std::move(mem);
      cex.trace_sigma = it->second.trace;
      cex.trace_rho = std::move(out.trace);
      cex.position = first_trace_diff(cex.trace_sigma, cex.trace_rho);
      res.counterexample = std::move(cex);
      return res;
    }
  }
  return res;
}

}  // namespace oscta
