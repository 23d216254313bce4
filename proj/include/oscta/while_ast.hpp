#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "oscta/secenv.hpp"
#include "oscta/trace.hpp"

namespace oscta {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
};

enum class BinOp { Add, Sub, Mul, Eq, Ne, Lt, Le, And, Or };

struct WhileExpr;
using ExprPtr = std::shared_ptr<const WhileExpr>;

// Expressions. The Trace* forms are the abstract operators : / b / r / w of
// the instrumentation; they occur only in instrumented programs and are never
// parsed from user source.
struct WhileExpr {
  enum class Kind {
    IntLit,     // value
    Var,        // name
    ArrRead,    // name, args[0] = index (array-free)
    Not,        // args[0]
    Binop,      // op, args[0], args[1]
    TraceCons,  // args[0] = trace, args[1] = event expr
    TraceBranch,  // args[0] = condition expr
    TraceRead,    // args = index exprs
    TraceWrite    // args[0] = written-index expr
  };

  Kind kind;
  long long value = 0;
  std::string name;
  BinOp op = BinOp::Add;
  std::vector<ExprPtr> args;

  static ExprPtr lit(long long v);
  static ExprPtr var(std::string name);
  static ExprPtr arr(std::string name, ExprPtr index);
  static ExprPtr lnot(ExprPtr e);
  static ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b);
  static ExprPtr trace_cons(ExprPtr t, ExprPtr ev);
  static ExprPtr trace_branch(ExprPtr e);
  static ExprPtr trace_read(std::vector<ExprPtr> idx);
  static ExprPtr trace_write(ExprPtr e);
};

struct WhileCmd;
using CmdPtr = std::shared_ptr<const WhileCmd>;

struct WhileCmd {
  enum class Kind { Skip, Assign, ArrAssign, Seq, If, While };

  Kind kind;
  std::string target;  // Assign / ArrAssign
  ExprPtr index;       // ArrAssign
  ExprPtr expr;        // rhs or branch/loop condition
  CmdPtr c1, c2;       // Seq(c1,c2) / If(then,else) / While(body = c1)

  static CmdPtr skip();
  static CmdPtr assign(std::string x, ExprPtr e);
  static CmdPtr arr_assign(std::string x, ExprPtr index, ExprPtr e);
  static CmdPtr seq(CmdPtr a, CmdPtr b);
  static CmdPtr ifte(ExprPtr e, CmdPtr t, CmdPtr f);
  static CmdPtr loop(ExprPtr e, CmdPtr body);
};

// fv(e): free variables, including array names read.
std::set<std::string> free_vars(const WhileExpr& e);
// fv(c)
std::set<std::string> free_vars(const WhileCmd& c);
// f⃗ = (f_i)_i: every array-index subexpression, left to right, one entry per
// read occurrence.
std::vector<ExprPtr> index_exprs(const WhileExpr& e);

// def(c) and def^O(c).
struct DefSets {
  std::set<std::string> all;
  std::set<std::string> outputs;
};
DefSets assigned_vars(const WhileCmd& c, const VarUniverse& uni);

// Concrete syntax -> AST, scope-checked against the policy.
CmdPtr parse_while(const std::string& text, const Policy& policy);

std::string print_expr(const WhileExpr& e);
std::string print_cmd(const WhileCmd& c, int indent = 0);

}  // namespace oscta
