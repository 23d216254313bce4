#include "oscta/while_interp.hpp"

#include <sstream>

#include "json.hpp"

namespace oscta {

namespace {

struct RuntimeFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long long wrap_add(long long a, long long b) {
  return static_cast<long long>(static_cast<unsigned long long>(a) +
                                static_cast<unsigned long long>(b));
}
long long wrap_sub(long long a, long long b) {
  return static_cast<long long>(static_cast<unsigned long long>(a) -
                                static_cast<unsigned long long>(b));
}
long long wrap_mul(long long a, long long b) {
  return static_cast<long long>(static_cast<unsigned long long>(a) *
                                static_cast<unsigned long long>(b));
}

bool truthy(long long v) { return v == 1; }

struct Evaluator {
  const WhileStore& sigma;

  long long eval_int(const WhileExpr& e) {
    Value v = eval(e);
    if (auto* i = std::get_if<long long>(&v)) return *i;
    throw RuntimeFault("expected an integer value, got a trace");
  }

  Value eval(const WhileExpr& e) {
    switch (e.kind) {
      case WhileExpr::Kind::IntLit:
        return e.value;
      case WhileExpr::Kind::Var: {
        auto it = sigma.scalars.find(e.name);
        if (it == sigma.scalars.end()) throw RuntimeFault("unbound variable '" + e.name + "'");
        return it->second;
      }
      case WhileExpr::Kind::ArrRead: {
        auto it = sigma.arrays.find(e.name);
        if (it == sigma.arrays.end()) throw RuntimeFault("unbound array '" + e.name + "'");
        long long i = eval_int(*e.args[0]);
        if (i < 0 || i >= static_cast<long long>(it->second.size()))
          throw RuntimeFault("index " + std::to_string(i) + " out of bounds for '" + e.name + "'");
        return it->second[static_cast<size_t>(i)];
      }
      case WhileExpr::Kind::Not:
        return static_cast<long long>(truthy(eval_int(*e.args[0])) ? 0 : 1);
      case WhileExpr::Kind::Binop: {
        long long a = eval_int(*e.args[0]);
        long long b = eval_int(*e.args[1]);
        switch (e.op) {
          case BinOp::Add: return wrap_add(a, b);
          case BinOp::Sub: return wrap_sub(a, b);
          case BinOp::Mul: return wrap_mul(a, b);
          case BinOp::Eq: return static_cast<long long>(a == b);
          case BinOp::Ne: return static_cast<long long>(a != b);
          case BinOp::Lt: return static_cast<long long>(a < b);
          case BinOp::Le: return static_cast<long long>(a <= b);
          case BinOp::And: return static_cast<long long>(truthy(a) && truthy(b));
          case BinOp::Or: return static_cast<long long>(truthy(a) || truthy(b));
        }
        throw RuntimeFault("bad operator");
      }
      case WhileExpr::Kind::TraceCons: {
        Value t = eval(*e.args[0]);
        auto* tr = std::get_if<LeakTrace>(&t);
        if (!tr) throw RuntimeFault("':' expects a trace on the left");
        LeakTrace out = *tr;
        out.push_back(eval_event(*e.args[1]));
        return out;
      }
      case WhileExpr::Kind::TraceBranch:
      case WhileExpr::Kind::TraceRead:
      case WhileExpr::Kind::TraceWrite:
        throw RuntimeFault("abstract trace operator outside ':'");
    }
    throw RuntimeFault("bad expression");
  }

  LeakEvent eval_event(const WhileExpr& e) {
    switch (e.kind) {
      case WhileExpr::Kind::TraceBranch:
        return LeakEvent::branch(eval_int(*e.args[0]));
      case WhileExpr::Kind::TraceRead: {
        std::vector<LeakScalar> vs;
        vs.reserve(e.args.size());
        for (const auto& a : e.args) vs.emplace_back(eval_int(*a));
        return LeakEvent::read(std::move(vs));
      }
      case WhileExpr::Kind::TraceWrite:
        return LeakEvent::write(eval_int(*e.args[0]));
      default:
        throw RuntimeFault("':' expects b/r/w on the right");
    }
  }

  // σ(f⃗) for the leak label of an expression.
  std::vector<LeakScalar> index_values(const WhileExpr& e) {
    std::vector<LeakScalar> vs;
    for (const auto& f : index_exprs(e)) vs.emplace_back(eval_int(*f));
    return vs;
  }
};

}  // namespace

WhileStore WhileStore::zeros(const Policy& p) {
  WhileStore s;
  for (const auto& v : p.vars) s.scalars[v] = 0LL;
  for (const auto& [a, len] : p.arrays) s.arrays[a] = std::vector<long long>(static_cast<size_t>(len), 0);
  s.scalars[kLeakVarName] = LeakTrace{};
  return s;
}

WhileStore WhileStore::from_json_text(const Policy& p, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PolicyError(std::string("store is not valid JSON: ") + e.what());
  }
  WhileStore s = zeros(p);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& name = it.key();
    if (p.is_scalar(name)) {
      s.scalars[name] = it.value().get<long long>();
    } else if (p.is_array(name)) {
      auto vals = it.value().get<std::vector<long long>>();
      if (vals.size() != s.arrays[name].size())
        throw PolicyError("store for array '" + name + "' has wrong length");
      s.arrays[name] = std::move(vals);
    } else {
      throw PolicyError("store names unknown variable '" + name + "'");
    }
  }
  return s;
}

std::string WhileStore::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : scalars) {
    if (auto* i = std::get_if<long long>(&v))
      j[k] = *i;
    else
      j[k] = render_value(v);
  }
  for (const auto& [k, v] : arrays) j[k] = v;
  return j.dump();
}

bool WhileStore::equal_on(const WhileStore& other, const std::vector<std::string>& vars) const {
  for (const auto& x : vars) {
    if (auto it = scalars.find(x); it != scalars.end()) {
      auto jt = other.scalars.find(x);
      if (jt == other.scalars.end() || !(it->second == jt->second)) return false;
    } else if (auto ia = arrays.find(x); ia != arrays.end()) {
      auto ja = other.arrays.find(x);
      if (ja == other.arrays.end() || ia->second != ja->second) return false;
    } else {
      return false;
    }
  }
  return true;
}

RunOutcome run(const WhileCmd& c, WhileStore sigma, const RunLimits& limits) {
  RunOutcome out;
  std::vector<const WhileCmd*> stack{&c};
  try {
    while (!stack.empty()) {
      if (++out.steps > limits.step_cap) {
        out.status = RunStatus::Timeout;
        out.error = "step cap exceeded";
        out.store = std::move(sigma);
        return out;
      }
      const WhileCmd* cur = stack.back();
      stack.pop_back();
      Evaluator ev{sigma};
      switch (cur->kind) {
        case WhileCmd::Kind::Skip:
          break;
        case WhileCmd::Kind::Assign: {
          out.trace.push_back(LeakEvent::read(ev.index_values(*cur->expr)));
          Value v = ev.eval(*cur->expr);
          sigma.scalars[cur->target] = std::move(v);
          break;
        }
        case WhileCmd::Kind::ArrAssign: {
          long long idx = ev.eval_int(*cur->index);
          out.trace.push_back(LeakEvent::write(idx));
          out.trace.push_back(LeakEvent::read(ev.index_values(*cur->expr)));
          long long v = ev.eval_int(*cur->expr);
          auto it = sigma.arrays.find(cur->target);
          if (it == sigma.arrays.end()) throw RuntimeFault("unbound array '" + cur->target + "'");
          if (idx < 0 || idx >= static_cast<long long>(it->second.size()))
            throw RuntimeFault("index " + std::to_string(idx) + " out of bounds for '" +
                               cur->target + "'");
          it->second[static_cast<size_t>(idx)] = v;
          break;
        }
        case WhileCmd::Kind::Seq:
          stack.push_back(cur->c2.get());
          stack.push_back(cur->c1.get());
          break;
        case WhileCmd::Kind::If: {
          long long v = ev.eval_int(*cur->expr);
          out.trace.push_back(LeakEvent::branch(v));
          out.trace.push_back(LeakEvent::read(ev.index_values(*cur->expr)));
          ++out.branch_events;
          stack.push_back(truthy(v) ? cur->c1.get() : cur->c2.get());
          break;
        }
        case WhileCmd::Kind::While: {
          long long v = ev.eval_int(*cur->expr);
          out.trace.push_back(LeakEvent::branch(v));
          out.trace.push_back(LeakEvent::read(ev.index_values(*cur->expr)));
          ++out.branch_events;
          if (truthy(v)) {
            stack.push_back(cur);
            stack.push_back(cur->c1.get());
          }
          break;
        }
      }
    }
  } catch (const RuntimeFault& f) {
    out.status = RunStatus::RuntimeError;
    out.error = f.what();
  }
  out.store = std::move(sigma);
  return out;
}

std::string render_value(const Value& v) {
  if (auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
  return render(std::get<LeakTrace>(v));
}

// trace rendering lives here to keep trace.hpp header-only of types
std::string render(const LeakScalar& s) {
  if (auto* i = std::get_if<long long>(&s)) return std::to_string(*i);
  const MemAddr& a = std::get<MemAddr>(s);
  return a.block + "[" + std::to_string(a.offset) + "]";
}

std::string render(const LeakEvent& e) {
  const char* tag = "";
  switch (e.kind) {
    case LeakEvent::Kind::Branch: tag = "b"; break;
    case LeakEvent::Kind::Read: tag = "r"; break;
    case LeakEvent::Kind::Write: tag = "w"; break;
    case LeakEvent::Kind::Jump: tag = "j"; break;
  }
  std::string s = tag;
  s += "(";
  for (size_t i = 0; i < e.values.size(); ++i) {
    if (i) s += ", ";
    s += render(e.values[i]);
  }
  return s + ")";
}

std::string render(const LeakTrace& t) {
  std::string s = "[";
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) s += "; ";
    s += render(t[i]);
  }
  return s + "]";
}

}  // namespace oscta
