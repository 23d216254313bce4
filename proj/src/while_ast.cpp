#include "oscta/while_ast.hpp"

#include <algorithm>
#include <cctype>

namespace oscta {

ExprPtr WhileExpr::lit(long long v) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::IntLit;
  e->value = v;
  return e;
}
ExprPtr WhileExpr::var(std::string name) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::Var;
  e->name = std::move(name);
  return e;
}
ExprPtr WhileExpr::arr(std::string name, ExprPtr index) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::ArrRead;
  e->name = std::move(name);
  e->args = {std::move(index)};
  return e;
}
ExprPtr WhileExpr::lnot(ExprPtr a) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::Not;
  e->args = {std::move(a)};
  return e;
}
ExprPtr WhileExpr::bin(BinOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::Binop;
  e->op = op;
  e->args = {std::move(a), std::move(b)};
  return e;
}
ExprPtr WhileExpr::trace_cons(ExprPtr t, ExprPtr ev) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::TraceCons;
  e->args = {std::move(t), std::move(ev)};
  return e;
}
ExprPtr WhileExpr::trace_branch(ExprPtr c) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::TraceBranch;
  e->args = {std::move(c)};
  return e;
}
ExprPtr WhileExpr::trace_read(std::vector<ExprPtr> idx) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::TraceRead;
  e->args = std::move(idx);
  return e;
}
ExprPtr WhileExpr::trace_write(ExprPtr a) {
  auto e = std::make_shared<WhileExpr>();
  e->kind = Kind::TraceWrite;
  e->args = {std::move(a)};
  return e;
}

CmdPtr WhileCmd::skip() {
  auto c = std::make_shared<WhileCmd>();
  c->kind = Kind::Skip;
  return c;
}
CmdPtr WhileCmd::assign(std::string x, ExprPtr e) {
  auto c = std::make_shared<WhileCmd>();
  c->kind = Kind::Assign;
  c->target = std::move(x);
  c->expr = std::move(e);
  return c;
}
CmdPtr WhileCmd::arr_assign(std::string x, ExprPtr index, ExprPtr e) {
  auto c = std::make_shared<WhileCmd>();
  c->kind = Kind::ArrAssign;
  c->target = std::move(x);
  c->index = std::move(index);
  c->expr = std::move(e);
  return c;
}
CmdPtr WhileCmd::seq(CmdPtr a, CmdPtr b) {
  auto c = std::make_shared<WhileCmd>();
  c->kind = Kind::Seq;
  c->c1 = std::move(a);
  c->c2 = std::move(b);
  return c;
}
CmdPtr WhileCmd::ifte(ExprPtr e, CmdPtr t, CmdPtr f) {
  auto c = std::make_shared<WhileCmd>();
  c->kind = Kind::If;
  c->expr = std::move(e);
  c->c1 = std::move(t);
  c->c2 = std::move(f);
  return c;
}
CmdPtr WhileCmd::loop(ExprPtr e, CmdPtr body) {
  auto c = std::make_shared<WhileCmd>();
  c->kind = Kind::While;
  c->expr = std::move(e);
  c->c1 = std::move(body);
  return c;
}

namespace {
void collect_fv(const WhileExpr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case WhileExpr::Kind::IntLit:
      return;
    case WhileExpr::Kind::Var:
    case WhileExpr::Kind::ArrRead:
      out.insert(e.name);
      break;
    default:
      break;
  }
  for (const auto& a : e.args) collect_fv(*a, out);
}

void collect_indexes(const WhileExpr& e, std::vector<ExprPtr>& out) {
  switch (e.kind) {
    case WhileExpr::Kind::ArrRead:
      out.push_back(e.args[0]);
      return;  // indexes are array-free, nothing below
    case WhileExpr::Kind::TraceCons:
    case WhileExpr::Kind::TraceBranch:
    case WhileExpr::Kind::TraceRead:
    case WhileExpr::Kind::TraceWrite:
      return;  // abstract operators hold index *expressions*, not reads
    default:
      for (const auto& a : e.args) collect_indexes(*a, out);
  }
}
}  // namespace

std::set<std::string> free_vars(const WhileExpr& e) {
  std::set<std::string> out;
  collect_fv(e, out);
  return out;
}

std::set<std::string> free_vars(const WhileCmd& c) {
  std::set<std::string> out;
  switch (c.kind) {
    case WhileCmd::Kind::Skip:
      break;
    case WhileCmd::Kind::Assign:
      out.insert(c.target);
      collect_fv(*c.expr, out);
      break;
    case WhileCmd::Kind::ArrAssign:
      out.insert(c.target);
      collect_fv(*c.index, out);
      collect_fv(*c.expr, out);
      break;
    case WhileCmd::Kind::Seq: {
      auto a = free_vars(*c.c1), b = free_vars(*c.c2);
      out.insert(a.begin(), a.end());
      out.insert(b.begin(), b.end());
      break;
    }
    case WhileCmd::Kind::If: {
      collect_fv(*c.expr, out);
      auto a = free_vars(*c.c1), b = free_vars(*c.c2);
      out.insert(a.begin(), a.end());
      out.insert(b.begin(), b.end());
      break;
    }
    case WhileCmd::Kind::While: {
      collect_fv(*c.expr, out);
      auto a = free_vars(*c.c1);
      out.insert(a.begin(), a.end());
      break;
    }
  }
  return out;
}

std::vector<ExprPtr> index_exprs(const WhileExpr& e) {
  std::vector<ExprPtr> out;
  collect_indexes(e, out);
  return out;
}

DefSets assigned_vars(const WhileCmd& c, const VarUniverse& uni) {
  DefSets d;
  switch (c.kind) {
    case WhileCmd::Kind::Skip:
      break;
    case WhileCmd::Kind::Assign:
    case WhileCmd::Kind::ArrAssign:
      d.all.insert(c.target);
      break;
    case WhileCmd::Kind::Seq:
    case WhileCmd::Kind::If: {
      auto a = assigned_vars(*c.c1, uni), b = assigned_vars(*c.c2, uni);
      d.all.insert(a.all.begin(), a.all.end());
      d.all.insert(b.all.begin(), b.all.end());
      break;
    }
    case WhileCmd::Kind::While:
      d.all = assigned_vars(*c.c1, uni).all;
      break;
  }
  for (const auto& x : d.all) {
    auto v = uni.try_id(x);
    if (v && uni.is_output(*v)) d.outputs.insert(x);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Kind { Id, Int, Sym, End };
  Kind kind;
  std::string text;
  long long value = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= s_.size()) {
      tok_.kind = Token::Kind::End;
      tok_.text = "<eof>";
      return;
    }
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        bump();
      tok_.kind = Token::Kind::Id;
      tok_.text = s_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) bump();
      tok_.kind = Token::Kind::Int;
      tok_.text = s_.substr(start, pos_ - start);
      tok_.value = std::stoll(tok_.text);
      return;
    }
    static const char* two[] = {":=", "==", "!=", "<="};
    for (const char* op : two) {
      if (s_.compare(pos_, 2, op) == 0) {
        tok_.kind = Token::Kind::Sym;
        tok_.text = op;
        bump();
        bump();
        return;
      }
    }
    tok_.kind = Token::Kind::Sym;
    tok_.text = std::string(1, c);
    bump();
  }

  void skip_ws() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
        while (pos_ < s_.size() && s_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

bool is_keyword(const std::string& s) {
  static const std::set<std::string> kw = {"skip", "if",    "then", "else",
                                           "fi",   "while", "do",   "od"};
  return kw.count(s) != 0;
}

class Parser {
 public:
  Parser(const std::string& text, const Policy& policy) : lex_(text), policy_(policy) {}

  CmdPtr parse() {
    CmdPtr c = command();
    expect_end();
    return c;
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.col, msg + " (got '" + t.text + "')");
  }

  Token expect_sym(const std::string& s) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Sym || t.text != s) fail(t, "expected '" + s + "'");
    return t;
  }

  Token expect_kw(const std::string& s) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Id || t.text != s) fail(t, "expected '" + s + "'");
    return t;
  }

  void expect_end() {
    Token t = lex_.next();
    if (t.kind != Token::Kind::End) fail(t, "expected end of input");
  }

  bool peek_sym(const std::string& s) {
    return lex_.peek().kind == Token::Kind::Sym && lex_.peek().text == s;
  }
  bool peek_kw(const std::string& s) {
    return lex_.peek().kind == Token::Kind::Id && lex_.peek().text == s;
  }

  // cmd := atom (';' cmd)?
  CmdPtr command() {
    CmdPtr c = atom_command();
    if (peek_sym(";")) {
      lex_.next();
      return WhileCmd::seq(std::move(c), command());
    }
    return c;
  }

  CmdPtr atom_command() {
    Token t = lex_.peek();
    if (t.kind != Token::Kind::Id) fail(t, "expected a command");
    if (t.text == "skip") {
      lex_.next();
      return WhileCmd::skip();
    }
    if (t.text == "if") {
      lex_.next();
      ExprPtr e = expr();
      expect_kw("then");
      CmdPtr c1 = command();
      expect_kw("else");
      CmdPtr c2 = command();
      expect_kw("fi");
      return WhileCmd::ifte(std::move(e), std::move(c1), std::move(c2));
    }
    if (t.text == "while") {
      lex_.next();
      ExprPtr e = expr();
      expect_kw("do");
      CmdPtr body = command();
      expect_kw("od");
      return WhileCmd::loop(std::move(e), std::move(body));
    }
    if (is_keyword(t.text)) fail(t, "unexpected keyword");
    Token name = lex_.next();
    check_name(name);
    if (peek_sym("[")) {
      if (!policy_.is_array(name.text)) fail(name, "'" + name.text + "' is not an array");
      lex_.next();
      ExprPtr idx = expr(/*in_index=*/true);
      expect_sym("]");
      expect_sym(":=");
      ExprPtr rhs = expr();
      return WhileCmd::arr_assign(name.text, std::move(idx), std::move(rhs));
    }
    if (policy_.is_array(name.text))
      fail(name, "array '" + name.text + "' cannot be assigned as a scalar");
    expect_sym(":=");
    ExprPtr rhs = expr();
    return WhileCmd::assign(name.text, std::move(rhs));
  }

  void check_name(const Token& t) {
    if (t.text == kLeakVarName)
      fail(t, "'xl' is reserved for the leakage variable");
    if (!policy_.known(t.text))
      fail(t, "variable '" + t.text + "' is not declared in the policy");
  }

  // precedence: | < & < (== !=) < (< <=) < (+ -) < * < unary ! < primary
  ExprPtr expr(bool in_index = false) { return parse_or(in_index); }

  ExprPtr parse_or(bool ix) {
    ExprPtr e = parse_and(ix);
    while (peek_sym("|")) {
      lex_.next();
      e = WhileExpr::bin(BinOp::Or, std::move(e), parse_and(ix));
    }
    return e;
  }
  ExprPtr parse_and(bool ix) {
    ExprPtr e = parse_eq(ix);
    while (peek_sym("&")) {
      lex_.next();
      e = WhileExpr::bin(BinOp::And, std::move(e), parse_eq(ix));
    }
    return e;
  }
  ExprPtr parse_eq(bool ix) {
    ExprPtr e = parse_rel(ix);
    while (peek_sym("==") || peek_sym("!=")) {
      BinOp op = lex_.next().text == "==" ? BinOp::Eq : BinOp::Ne;
      e = WhileExpr::bin(op, std::move(e), parse_rel(ix));
    }
    return e;
  }
  ExprPtr parse_rel(bool ix) {
    ExprPtr e = parse_add(ix);
    while (peek_sym("<") || peek_sym("<=")) {
      BinOp op = lex_.next().text == "<" ? BinOp::Lt : BinOp::Le;
      e = WhileExpr::bin(op, std::move(e), parse_add(ix));
    }
    return e;
  }
  ExprPtr parse_add(bool ix) {
    ExprPtr e = parse_mul(ix);
    while (peek_sym("+") || peek_sym("-")) {
      BinOp op = lex_.next().text == "+" ? BinOp::Add : BinOp::Sub;
      e = WhileExpr::bin(op, std::move(e), parse_mul(ix));
    }
    return e;
  }
  ExprPtr parse_mul(bool ix) {
    ExprPtr e = parse_unary(ix);
    while (peek_sym("*")) {
      lex_.next();
      e = WhileExpr::bin(BinOp::Mul, std::move(e), parse_unary(ix));
    }
    return e;
  }
  ExprPtr parse_unary(bool ix) {
    if (peek_sym("!")) {
      lex_.next();
      return WhileExpr::lnot(parse_unary(ix));
    }
    return parse_primary(ix);
  }

  ExprPtr parse_primary(bool in_index) {
    Token t = lex_.next();
    if (t.kind == Token::Kind::Int) return WhileExpr::lit(t.value);
    if (t.kind == Token::Kind::Sym && t.text == "(") {
      ExprPtr e = parse_or(in_index);
      expect_sym(")");
      return e;
    }
    if (t.kind != Token::Kind::Id || is_keyword(t.text)) fail(t, "expected an expression");
    check_name(t);
    if (peek_sym("[")) {
      if (in_index) fail(t, "array indexes must not contain array reads");
      if (!policy_.is_array(t.text)) fail(t, "'" + t.text + "' is not an array");
      lex_.next();
      ExprPtr idx = parse_or(/*in_index=*/true);
      expect_sym("]");
      return WhileExpr::arr(t.text, std::move(idx));
    }
    if (policy_.is_array(t.text))
      fail(t, "array '" + t.text + "' used without an index");
    return WhileExpr::var(t.text);
  }

  Lexer lex_;
  const Policy& policy_;
};

}  // namespace

CmdPtr parse_while(const std::string& text, const Policy& policy) {
  return Parser(text, policy).parse();
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

int precedence(const WhileExpr& e) {
  switch (e.kind) {
    case WhileExpr::Kind::Binop:
      switch (e.op) {
        case BinOp::Or:
          return 1;
        case BinOp::And:
          return 2;
        case BinOp::Eq:
        case BinOp::Ne:
          return 3;
        case BinOp::Lt:
        case BinOp::Le:
          return 4;
        case BinOp::Add:
        case BinOp::Sub:
          return 5;
        case BinOp::Mul:
          return 6;
      }
      return 0;
    case WhileExpr::Kind::Not:
      return 7;
    case WhileExpr::Kind::TraceCons:
      return 1;
    default:
      return 8;
  }
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::And: return "&";
    case BinOp::Or: return "|";
  }
  return "?";
}

std::string print_sub(const WhileExpr& e, int parent_prec) {
  std::string s = print_expr(e);
  if (precedence(e) < parent_prec) return "(" + s + ")";
  return s;
}

std::string indent_str(int n) { return std::string(static_cast<size_t>(n) * 2, ' '); }

}  // namespace

std::string print_expr(const WhileExpr& e) {
  switch (e.kind) {
    case WhileExpr::Kind::IntLit:
      return std::to_string(e.value);
    case WhileExpr::Kind::Var:
      return e.name;
    case WhileExpr::Kind::ArrRead:
      return e.name + "[" + print_expr(*e.args[0]) + "]";
    case WhileExpr::Kind::Not:
      return "!" + print_sub(*e.args[0], 7);
    case WhileExpr::Kind::Binop: {
      int p = precedence(e);
      return print_sub(*e.args[0], p) + " " + op_text(e.op) + " " +
             print_sub(*e.args[1], p + 1);
    }
    case WhileExpr::Kind::TraceCons:
      return print_expr(*e.args[0]) + " : " + print_expr(*e.args[1]);
    case WhileExpr::Kind::TraceBranch:
      return "b(" + print_expr(*e.args[0]) + ")";
    case WhileExpr::Kind::TraceRead: {
      std::string s = "r(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += print_expr(*e.args[i]);
      }
      return s + ")";
    }
    case WhileExpr::Kind::TraceWrite:
      return "w(" + print_expr(*e.args[0]) + ")";
  }
  return "?";
}

std::string print_cmd(const WhileCmd& c, int indent) {
  std::string pad = indent_str(indent);
  switch (c.kind) {
    case WhileCmd::Kind::Skip:
      return pad + "skip";
    case WhileCmd::Kind::Assign:
      return pad + c.target + " := " + print_expr(*c.expr);
    case WhileCmd::Kind::ArrAssign:
      return pad + c.target + "[" + print_expr(*c.index) + "] := " + print_expr(*c.expr);
    case WhileCmd::Kind::Seq:
      return print_cmd(*c.c1, indent) + ";\n" + print_cmd(*c.c2, indent);
    case WhileCmd::Kind::If:
      return pad + "if " + print_expr(*c.expr) + " then\n" + print_cmd(*c.c1, indent + 1) +
             "\n" + pad + "else\n" + print_cmd(*c.c2, indent + 1) + "\n" + pad + "fi";
    case WhileCmd::Kind::While:
      return pad + "while " + print_expr(*c.expr) + " do\n" + print_cmd(*c.c1, indent + 1) +
             "\n" + pad + "od";
  }
  return pad + "?";
}

}  // namespace oscta
