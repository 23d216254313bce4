#include "oscta/ir.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace oscta {

std::string IrOperand::text() const {
  switch (kind) {
    case Kind::Imm: return std::to_string(imm);
    case Kind::Reg:
    case Kind::Block: return name;
  }
  return "?";
}

std::string IrInstr::text() const {
  switch (kind) {
    case Kind::Op: {
      std::string s = dest + " = op " + opname;
      for (const auto& o : operands) s += " " + o.text();
      return s;
    }
    case Kind::Load:
      return dest + " = load " + operands[0].text();
    case Kind::Store:
      return "store " + operands[0].text() + " " + operands[1].text();
    case Kind::Cond:
      return "cond " + cond_reg + " " + target1 + " " + target2;
    case Kind::Goto:
      return "goto " + target1;
  }
  return "?";
}

const IrBlock* IrProgram::find_block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return &b;
  return nullptr;
}

const IrBlock& IrProgram::block(const std::string& name) const {
  const IrBlock* b = find_block(name);
  if (!b) throw IrError("unknown block '" + name + "'");
  return *b;
}

std::vector<std::string> IrProgram::successors(const std::string& name) const {
  const IrBlock& b = block(name);
  if (b.instrs.empty()) return {};
  const IrInstr& t = b.instrs.back();
  if (t.kind == IrInstr::Kind::Goto) return {t.target1};
  if (t.kind == IrInstr::Kind::Cond) {
    if (t.target1 == t.target2) return {t.target1};
    return {t.target1, t.target2};
  }
  return {};
}

std::vector<std::string> IrProgram::block_names() const {
  std::vector<std::string> out;
  for (const auto& b : blocks) out.push_back(b.name);
  return out;
}

std::vector<std::string> IrProgram::registers() const {
  std::set<std::string> rs;
  for (const auto& d : decls) rs.insert(d.reg);
  for (const auto& b : blocks)
    for (const auto& i : b.instrs)
      if (!i.dest.empty()) rs.insert(i.dest);
  return {rs.begin(), rs.end()};
}

std::vector<std::string> IrProgram::mem_blocks() const {
  std::vector<std::string> out;
  for (const auto& d : decls) out.push_back(d.block);
  std::sort(out.begin(), out.end());
  return out;
}

int IrProgram::block_len(const std::string& name) const {
  for (const auto& d : decls)
    if (d.block == name) return d.len;
  throw IrError("unknown memory block '" + name + "'");
}

bool IrProgram::is_mem_block(const std::string& name) const {
  for (const auto& d : decls)
    if (d.block == name) return true;
  return false;
}

const IrDecl* IrProgram::decl_for_reg(const std::string& reg) const {
  for (const auto& d : decls)
    if (d.reg == reg) return &d;
  return nullptr;
}

int IrProgram::instruction_count() const {
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.instrs.size());
  return n;
}

void IrProgram::validate() const {
  if (entry.empty() || exit.empty()) throw IrError("missing entry/exit declaration");
  if (!find_block(entry)) throw IrError("entry block '" + entry + "' is not defined");
  if (!find_block(exit)) throw IrError("exit block '" + exit + "' is not defined");

  std::set<std::string> block_seen, decl_regs, decl_blocks;
  for (const auto& b : blocks)
    if (!block_seen.insert(b.name).second) throw IrError("duplicate block '" + b.name + "'");
  for (const auto& d : decls) {
    if (!decl_regs.insert(d.reg).second) throw IrError("duplicate declaration of '" + d.reg + "'");
    if (!decl_blocks.insert(d.block).second)
      throw IrError("duplicate memory block '" + d.block + "'");
    if (d.block == kLeakVarName || d.reg == kLeakVarName)
      throw IrError("'xl' is reserved");
    if (d.len <= 0) throw IrError("memory block '" + d.block + "' must have positive length");
    if (block_seen.count(d.block))
      throw IrError("memory block '" + d.block + "' collides with a basic block name");
  }

  std::map<std::string, int> def_count;
  for (const auto& b : blocks) {
    for (size_t i = 0; i < b.instrs.size(); ++i) {
      const IrInstr& ins = b.instrs[i];
      bool last = i + 1 == b.instrs.size();
      if (ins.is_terminator()) {
        if (!last) throw IrError("block '" + b.name + "' has instructions after its terminator");
        if (b.name == exit) throw IrError("exit block '" + b.name + "' must not branch");
      } else if (last && b.name != exit) {
        throw IrError("block '" + b.name + "' lacks a terminator");
      }
      if (!ins.dest.empty()) {
        if (decl_regs.count(ins.dest))
          throw IrError("register '" + ins.dest + "' redefines a global/alloca register");
        if (ins.dest == kLeakVarName) throw IrError("'xl' is reserved");
        ++def_count[ins.dest];
      }
      if (ins.kind == IrInstr::Kind::Cond) {
        if (!find_block(ins.target1) || !find_block(ins.target2))
          throw IrError("cond in '" + b.name + "' targets an unknown block");
      }
      if (ins.kind == IrInstr::Kind::Goto && !find_block(ins.target1))
        throw IrError("goto in '" + b.name + "' targets an unknown block");
      for (const auto& o : ins.operands)
        if (o.kind == IrOperand::Kind::Block && !decl_blocks.count(o.name))
          throw IrError("operand names unknown memory block '" + o.name + "'");
    }
    if (b.instrs.empty() && b.name != exit)
      throw IrError("block '" + b.name + "' lacks a terminator");
  }

  // branching registers assigned exactly once, never by a declaration
  for (const auto& b : blocks) {
    if (b.instrs.empty()) continue;
    const IrInstr& t = b.instrs.back();
    if (t.kind != IrInstr::Kind::Cond) continue;
    if (decl_regs.count(t.cond_reg))
      throw IrError("branching register '" + t.cond_reg + "' is an address register");
    auto it = def_count.find(t.cond_reg);
    if (it == def_count.end())
      throw IrError("branching register '" + t.cond_reg + "' is never assigned");
    if (it->second != 1)
      throw IrError("branching register '" + t.cond_reg + "' is assigned more than once");
  }

  // every block reachable from entry must reach exit
  std::set<std::string> reach_entry;
  std::vector<std::string> work{entry};
  while (!work.empty()) {
    std::string b = work.back();
    work.pop_back();
    if (!reach_entry.insert(b).second) continue;
    for (const auto& s : successors(b)) work.push_back(s);
  }
  std::set<std::string> reach_exit;  // blocks that can reach exit
  bool changed = true;
  reach_exit.insert(exit);
  while (changed) {
    changed = false;
    for (const auto& b : blocks) {
      if (reach_exit.count(b.name)) continue;
      for (const auto& s : successors(b.name))
        if (reach_exit.count(s)) {
          reach_exit.insert(b.name);
          changed = true;
          break;
        }
    }
  }
  for (const auto& b : reach_entry)
    if (!reach_exit.count(b))
      throw IrError("block '" + b + "' is reachable from entry but cannot reach exit");

  for (const auto& [r, pts] : ptsto_overrides) {
    (void)r;
    for (const auto& m : pts)
      if (!decl_blocks.count(m)) throw IrError("ptsto names unknown memory block '" + m + "'");
  }
}

// ---------------------------------------------------------------------------
// Textual format
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',' ) {
      if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
    } else if (ch == '{' || ch == '}') {
      if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) toks.push_back(std::move(cur));
  return toks;
}

bool is_reg_name(const std::string& s) { return !s.empty() && (s[0] == '%' || s[0] == '@'); }

bool is_int(const std::string& s) {
  if (s.empty()) return false;
  size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

IrOperand parse_operand(const std::string& tok, int lineno) {
  if (is_int(tok)) return IrOperand::immediate(std::stoll(tok));
  if (is_reg_name(tok)) return IrOperand::reg(tok);
  if (std::isalpha(static_cast<unsigned char>(tok[0])) || tok[0] == '_')
    return IrOperand::block(tok);
  throw IrError("line " + std::to_string(lineno) + ": bad operand '" + tok + "'");
}

const std::set<std::string>& known_ops() {
  static const std::set<std::string> ops = {"add", "sub", "mul", "eq", "lt", "and", "not", "gep"};
  return ops;
}

}  // namespace

IrProgram parse_ir(const std::string& text) {
  IrProgram p;
  IrBlock* cur = nullptr;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int next_anon_block = 0;
  (void)next_anon_block;

  auto err = [&](const std::string& msg) -> IrError {
    return IrError("line " + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find("//"); pos != std::string::npos) line.erase(pos);
    auto toks = tokenize(line);
    if (toks.empty()) continue;

    const std::string& head = toks[0];
    if (head == "global" || head == "alloca") {
      if (toks.size() != 5 || toks[2] != "->") throw err("expected '" + head + " reg -> block len'");
      if (!is_reg_name(toks[1])) throw err("declaration register must start with % or @");
      if (!is_int(toks[4])) throw err("declaration length must be an integer");
      p.decls.push_back({head == "global", toks[1], toks[3], static_cast<int>(std::stoll(toks[4]))});
      continue;
    }
    if (head == "entry") {
      if (toks.size() != 2) throw err("expected 'entry block'");
      p.entry = toks[1];
      continue;
    }
    if (head == "exit") {
      if (toks.size() != 2) throw err("expected 'exit block'");
      p.exit = toks[1];
      continue;
    }
    if (head == "ptsto") {
      if (toks.size() < 2 || !is_reg_name(toks[1])) throw err("expected 'ptsto reg {blocks}'");
      std::set<std::string> pts(toks.begin() + 2, toks.end());
      p.ptsto_overrides[toks[1]] = std::move(pts);
      continue;
    }
    if (head == "block") {
      if (toks.size() != 2) throw err("expected 'block name:'");
      std::string name = toks[1];
      if (!name.empty() && name.back() == ':') name.pop_back();
      if (name.empty()) throw err("empty block name");
      p.blocks.push_back({name, {}});
      cur = &p.blocks.back();
      continue;
    }

    if (!cur) throw err("instruction outside any block");
    IrInstr ins;
    if (head == "store") {
      if (toks.size() != 3) throw err("expected 'store value address'");
      ins.kind = IrInstr::Kind::Store;
      ins.operands = {parse_operand(toks[1], lineno), parse_operand(toks[2], lineno)};
    } else if (head == "cond") {
      if (toks.size() != 4) throw err("expected 'cond reg then else'");
      if (!is_reg_name(toks[1])) throw err("cond requires a register");
      ins.kind = IrInstr::Kind::Cond;
      ins.cond_reg = toks[1];
      ins.target1 = toks[2];
      ins.target2 = toks[3];
    } else if (head == "goto") {
      if (toks.size() != 2) throw err("expected 'goto block'");
      ins.kind = IrInstr::Kind::Goto;
      ins.target1 = toks[1];
    } else if (is_reg_name(head)) {
      if (toks.size() < 3 || toks[1] != "=") throw err("expected 'reg = load|op ...'");
      ins.dest = head;
      if (toks[2] == "load") {
        if (toks.size() != 4) throw err("expected 'reg = load address'");
        ins.kind = IrInstr::Kind::Load;
        ins.operands = {parse_operand(toks[3], lineno)};
      } else if (toks[2] == "op") {
        if (toks.size() < 4) throw err("expected 'reg = op name operands...'");
        ins.kind = IrInstr::Kind::Op;
        ins.opname = toks[3];
        if (!known_ops().count(ins.opname)) throw err("unknown operation '" + ins.opname + "'");
        for (size_t i = 4; i < toks.size(); ++i)
          ins.operands.push_back(parse_operand(toks[i], lineno));
      } else {
        throw err("expected 'load' or 'op'");
      }
    } else {
      throw err("unrecognized instruction '" + head + "'");
    }
    cur->instrs.push_back(std::move(ins));
  }

  p.validate();
  return p;
}

IrProgram parse_ir_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IrError("cannot open IR file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ir(ss.str());
}

std::string print_ir(const IrProgram& p) {
  std::string s;
  for (const auto& d : p.decls)
    s += std::string(d.is_global ? "global " : "alloca ") + d.reg + " -> " + d.block + " " +
         std::to_string(d.len) + "\n";
  s += "entry " + p.entry + "\n";
  s += "exit " + p.exit + "\n";
  for (const auto& [r, pts] : p.ptsto_overrides) {
    s += "ptsto " + r + " {";
    bool first = true;
    for (const auto& m : pts) {
      if (!first) s += ", ";
      first = false;
      s += m;
    }
    s += "}\n";
  }
  for (const auto& b : p.blocks) {
    s += "block " + b.name + ":\n";
    for (const auto& i : b.instrs) s += "  " + i.text() + "\n";
  }
  return s;
}

IrPolicy IrPolicy::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PolicyError(std::string("policy is not valid JSON: ") + e.what());
  }
  IrPolicy p;
  if (j.contains("inputs"))
    for (const auto& e : j.at("inputs")) p.inputs.push_back(e.get<std::string>());
  if (j.contains("outputs"))
    for (const auto& e : j.at("outputs")) p.outputs.push_back(e.get<std::string>());
  return p;
}

IrPolicy IrPolicy::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PolicyError("cannot open policy file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void IrPolicy::validate(const IrProgram& p) const {
  for (const auto& i : inputs)
    if (!p.is_mem_block(i))
      throw PolicyError("IR input '" + i + "' must be a memory block");
  auto regs = p.registers();
  for (const auto& o : outputs) {
    bool is_reg = std::find(regs.begin(), regs.end(), o) != regs.end();
    if (!is_reg && !p.is_mem_block(o))
      throw PolicyError("IR output '" + o + "' is neither a register nor a memory block");
  }
}

std::shared_ptr<const VarUniverse> universe_for_ir(const IrProgram& p, const IrPolicy& policy) {
  policy.validate(p);
  std::vector<std::string> vars = p.registers();
  for (const auto& m : p.mem_blocks()) vars.push_back(m);
  return std::make_shared<VarUniverse>(std::move(vars), policy.outputs);
}

TypeEnv initial_ir_env(const IrProgram& p, std::shared_ptr<const VarUniverse> uni) {
  TypeEnv env = TypeEnv::initial(uni);
  for (const auto& d : p.decls) env.set(uni->id(d.reg), SecType::bottom());
  return env;
}

}  // namespace oscta
