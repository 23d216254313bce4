#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "oscta/secenv.hpp"

namespace oscta {

struct IrError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand of an instruction: immediate, register (%r / @g), or a bare memory
// block name evaluating to that block's address.
struct IrOperand {
  enum class Kind { Imm, Reg, Block };
  Kind kind = Kind::Imm;
  long long imm = 0;
  std::string name;

  static IrOperand immediate(long long v) { return {Kind::Imm, v, {}}; }
  static IrOperand reg(std::string n) { return {Kind::Reg, 0, std::move(n)}; }
  static IrOperand block(std::string n) { return {Kind::Block, 0, std::move(n)}; }

  std::string text() const;
};

struct IrInstr {
  enum class Kind { Op, Load, Store, Cond, Goto };

  Kind kind = Kind::Op;
  std::string dest;                 // Op / Load
  std::string opname;               // Op: add sub mul eq lt and not gep
  std::vector<IrOperand> operands;  // Op operands; Load [addr]; Store [val, addr]
  std::string cond_reg;             // Cond
  std::string target1, target2;     // Cond (then, else) / Goto (target1)

  bool is_terminator() const { return kind == Kind::Cond || kind == Kind::Goto; }
  std::string text() const;
};

struct IrBlock {
  std::string name;
  std::vector<IrInstr> instrs;
};

// global/alloca declaration binding a register to a fresh memory block.
struct IrDecl {
  bool is_global = true;
  std::string reg;    // "@p" or "%x"
  std::string block;  // "b0"
  int len = 1;
};

struct IrProgram {
  std::vector<IrDecl> decls;
  std::vector<IrBlock> blocks;
  std::string entry, exit;
  std::map<std::string, std::set<std::string>> ptsto_overrides;

  const IrBlock* find_block(const std::string& name) const;
  const IrBlock& block(const std::string& name) const;
  std::vector<std::string> successors(const std::string& block) const;
  std::vector<std::string> block_names() const;

  // All register names (declared + instruction destinations), sorted.
  std::vector<std::string> registers() const;
  std::vector<std::string> mem_blocks() const;
  int block_len(const std::string& name) const;
  bool is_mem_block(const std::string& name) const;
  const IrDecl* decl_for_reg(const std::string& reg) const;

  int instruction_count() const;

  // Structural validation; throws IrError.
  void validate() const;
};

IrProgram parse_ir(const std::string& text);
IrProgram parse_ir_file(const std::string& path);
std::string print_ir(const IrProgram& p);

// The X_I / X_O split for IR programs. X_I ⊆ memory blocks; X_O ⊆ registers
// or memory blocks.
struct IrPolicy {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  static IrPolicy from_json_text(const std::string& text);
  static IrPolicy load_file(const std::string& path);
  void validate(const IrProgram& p) const;
};

// Universe over R ∪ M ∪ {xl} with symbolic atoms for the policy's outputs.
std::shared_ptr<const VarUniverse> universe_for_ir(const IrProgram& p, const IrPolicy& policy);

// Γ(m)={τ_m} for memory blocks and plain registers, ⊥ for declaration-bound
// address registers and for xl.
TypeEnv initial_ir_env(const IrProgram& p, std::shared_ptr<const VarUniverse> uni);

}  // namespace oscta
