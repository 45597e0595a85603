// SPDX-License-Identifier: Apache-2.0

#include "mcfl/parser.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mcfl {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::uint64_t number = 0;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      int l = line, cc = col;
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) throw ParseError("unterminated comment", l, cc);
      advance(2);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      std::uint64_t v = 0;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
        std::uint64_t d = static_cast<std::uint64_t>(src[j] - '0');
        if (v > (std::numeric_limits<std::uint64_t>::max() - d) / 10)
          throw ParseError("integer literal too large", line, col);
        v = v * 10 + d;
        ++j;
      }
      if (v > static_cast<std::uint64_t>(std::numeric_limits<Value>::max()) + 1)
        throw ParseError("integer literal too large", line, col);
      t.kind = Tok::Number;
      t.number = v;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
      t.kind = Tok::Punct;
      bool matched = false;
      for (const char* op : two) {
        if (src.substr(i, 2) == op) {
          t.text = op;
          advance(2);
          matched = true;
          break;
        }
      }
      if (!matched) {
        static const std::string singles = "+-*/%<>!=(){}[];,:?";
        if (singles.find(c) == std::string::npos)
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        t.text = std::string(1, c);
        advance(1);
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

struct Position {
  int line = 0;
  int column = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program parse_program() {
    Program p;
    while (!at_end()) {
      if (peek().kind == Tok::Ident && (peek().text == "void" || (peek().text == "int" && is_function_ahead()))) {
        p.functions.push_back(parse_function());
      } else {
        if (!p.functions.empty())
          throw ParseError("global declarations must come before the first function", peek().line, peek().column);
        p.globals.push_back(parse_global());
      }
    }
    return p;
  }

  std::map<LineId, Position>& positions() { return positions_; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int next_line_ = 1;
  std::map<LineId, Position> positions_;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  bool at_end() const { return peek().kind == Tok::End; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is_punct(const char* p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Punct && peek(ahead).text == p;
  }
  bool is_word(const char* w, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == w;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + " (found " + got + ")", t.line, t.column);
  }
  void expect(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    next();
  }
  void expect_word(const char* w) {
    if (!is_word(w)) fail(std::string("expected '") + w + "'");
    next();
  }
  std::string ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier");
    if (is_keyword(peek().text)) fail("keyword used as identifier");
    return next().text;
  }
  static bool is_keyword(const std::string& s) {
    static const std::set<std::string> kw = {
        "int",         "void",          "if",        "else",           "while",
        "for",         "switch",        "case",      "default",        "break",
        "return",      "assert",        "assume",    "nondet",         "pthread_t",
        "pthread_attr_t", "pthread_condattr_t", "pthread_mutex_t", "pthread_cond_t",
        "pthread_create", "pthread_join", "pthread_exit", "pthread_mutex_lock",
        "pthread_mutex_unlock", "pthread_cond_init", "pthread_cond_wait", "pthread_cond_signal"};
    return kw.count(s) > 0;
  }
  Value number_value(bool negative) {
    if (peek().kind != Tok::Number) fail("expected integer literal");
    const Token& t = next();
    std::uint64_t v = t.number;
    auto limit = static_cast<std::uint64_t>(std::numeric_limits<Value>::max());
    if (!negative && v > limit) throw ParseError("integer literal too large", t.line, t.column);
    if (negative) return static_cast<Value>(0 - v);
    return static_cast<Value>(v);
  }
  Value signed_number() {
    bool neg = false;
    if (is_punct("-")) {
      next();
      neg = true;
    }
    return number_value(neg);
  }

  bool is_function_ahead() const {
    // int NAME (
    return peek(1).kind == Tok::Ident && peek(2).kind == Tok::Punct && peek(2).text == "(";
  }

  Stmt begin(StmtKind kind, const Token& at) {
    Stmt s;
    s.kind = kind;
    s.line = LineId{next_line_++};
    positions_[s.line] = {at.line, at.column};
    return s;
  }

  Stmt parse_global() {
    const Token& at = peek();
    if (is_word("int")) {
      next();
      std::string name = ident();
      if (is_punct("[")) {
        Stmt s = begin(StmtKind::ArrayDecl, at);
        s.name = name;
        next();
        Value size = number_value(false);
        expect("]");
        expect("=");
        expect("{");
        if (!is_punct("}")) {
          s.values.push_back(signed_number());
          while (is_punct(",")) {
            next();
            s.values.push_back(signed_number());
          }
        }
        expect("}");
        expect(";");
        if (size != static_cast<Value>(s.values.size()))
          throw ParseError("array size does not match initializer", at.line, at.column);
        return s;
      }
      Stmt s = begin(StmtKind::VarDecl, at);
      s.name = name;
      if (is_punct("=")) {
        next();
        s.expr = make_int(signed_number());
      }
      expect(";");
      return s;
    }
    if (auto kind = pthread_decl_kind()) return parse_pthread_decl(*kind);
    fail("expected global declaration or function");
  }

  std::optional<StmtKind> pthread_decl_kind() const {
    if (peek().kind != Tok::Ident) return std::nullopt;
    const auto& w = peek().text;
    if (w == "pthread_t") return StmtKind::ThreadDecl;
    if (w == "pthread_attr_t") return StmtKind::AttrDecl;
    if (w == "pthread_condattr_t") return StmtKind::CondAttrDecl;
    if (w == "pthread_mutex_t") return StmtKind::MutexDecl;
    if (w == "pthread_cond_t") return StmtKind::CondDecl;
    return std::nullopt;
  }

  Stmt parse_pthread_decl(StmtKind kind) {
    const Token& at = next();
    Stmt s = begin(kind, at);
    s.name = ident();
    expect(";");
    return s;
  }

  FunctionDef parse_function() {
    FunctionDef f;
    f.returns_value = next().text == "int";
    f.name = ident();
    expect("(");
    if (!is_punct(")")) {
      if (is_word("void") && is_punct(")", 1)) {
        next();
      } else {
        do {
          if (is_punct(",")) next();
          expect_word("int");
          f.params.push_back(ident());
        } while (is_punct(","));
      }
    }
    expect(")");
    f.body = parse_block_body();
    return f;
  }

  std::vector<Stmt> parse_block_body() {
    expect("{");
    std::vector<Stmt> body;
    while (!is_punct("}")) {
      if (at_end()) fail("expected '}'");
      body.push_back(parse_stmt());
    }
    next();
    return body;
  }

  std::string paren_ident() {
    expect("(");
    std::string n = ident();
    expect(")");
    expect(";");
    return n;
  }

  Stmt parse_stmt() {
    const Token& at = peek();
    if (is_word("int")) {
      next();
      Stmt s = begin(StmtKind::VarDecl, at);
      s.name = ident();
      if (is_punct("[")) fail("arrays are only allowed at global scope");
      if (is_punct("=")) {
        next();
        s.expr = parse_expr();
      }
      expect(";");
      return s;
    }
    if (auto kind = pthread_decl_kind()) return parse_pthread_decl(*kind);
    if (is_word("if")) {
      next();
      Stmt s = begin(StmtKind::If, at);
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_block_body();
      if (is_word("else")) {
        next();
        s.has_else = true;
        if (is_word("if"))
          s.else_body.push_back(parse_stmt());
        else
          s.else_body = parse_block_body();
      }
      return s;
    }
    if (is_word("while")) {
      next();
      Stmt s = begin(StmtKind::While, at);
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_block_body();
      return s;
    }
    if (is_word("for")) {
      next();
      Stmt s = begin(StmtKind::For, at);
      expect("(");
      s.name = ident();
      expect("=");
      s.expr = parse_expr();
      expect(";");
      s.cond = parse_expr();
      expect(";");
      const Token& var_tok = peek();
      std::string step_var = ident();
      if (step_var != s.name)
        throw ParseError("for-loop step must assign the loop variable", var_tok.line, var_tok.column);
      expect("=");
      s.step = parse_expr();
      expect(")");
      s.body = parse_block_body();
      return s;
    }
    if (is_word("switch")) {
      next();
      Stmt s = begin(StmtKind::Switch, at);
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_block_body();
      return s;
    }
    if (is_word("case")) {
      next();
      Stmt s = begin(StmtKind::Case, at);
      s.values = {signed_number()};
      expect(":");
      return s;
    }
    if (is_word("default")) {
      next();
      Stmt s = begin(StmtKind::Default, at);
      expect(":");
      return s;
    }
    if (is_word("break")) {
      next();
      Stmt s = begin(StmtKind::Break, at);
      expect(";");
      return s;
    }
    if (is_punct("{")) {
      Stmt s = begin(StmtKind::Block, at);
      s.body = parse_block_body();
      return s;
    }
    if (is_word("assert") || is_word("assume")) {
      Stmt s = begin(next().text == "assert" ? StmtKind::Assert : StmtKind::Assume, at);
      expect("(");
      s.expr = parse_expr();
      expect(")");
      expect(";");
      return s;
    }
    if (is_word("return")) {
      next();
      Stmt s = begin(StmtKind::Return, at);
      if (!is_punct(";")) s.expr = parse_expr();
      expect(";");
      return s;
    }
    if (is_word("pthread_create")) {
      next();
      Stmt s = begin(StmtKind::ThreadCreate, at);
      expect("(");
      s.name = ident();
      expect(",");
      s.other = ident();
      expect(")");
      expect(";");
      return s;
    }
    if (is_word("pthread_exit")) {
      next();
      Stmt s = begin(StmtKind::ThreadExit, at);
      expect("(");
      expect(")");
      expect(";");
      return s;
    }
    if (is_word("pthread_cond_wait")) {
      next();
      Stmt s = begin(StmtKind::CondWait, at);
      expect("(");
      s.name = ident();
      expect(",");
      s.other = ident();
      expect(")");
      expect(";");
      return s;
    }
    static const std::pair<const char*, StmtKind> unary_sync[] = {
        {"pthread_join", StmtKind::ThreadJoin},
        {"pthread_mutex_lock", StmtKind::MutexLock},
        {"pthread_mutex_unlock", StmtKind::MutexUnlock},
        {"pthread_cond_init", StmtKind::CondInit},
        {"pthread_cond_signal", StmtKind::CondSignal},
    };
    for (const auto& [word, kind] : unary_sync) {
      if (is_word(word)) {
        next();
        Stmt s = begin(kind, at);
        s.name = paren_ident();
        return s;
      }
    }
    if (peek().kind == Tok::Ident && is_punct("=", 1)) {
      std::string target = ident();
      next();  // '='
      if (is_word("nondet") && is_nondet_assignment_ahead()) {
        Stmt s = begin(StmtKind::NondetAssign, at);
        s.name = target;
        s.expr = parse_primary();
        expect(";");
        return s;
      }
      if (peek().kind == Tok::Ident && !is_keyword(peek().text) && is_punct("(", 1)) {
        Stmt s = begin(StmtKind::CallAssign, at);
        s.name = target;
        s.other = ident();
        expect("(");
        if (!is_punct(")")) {
          s.args.push_back(parse_expr());
          while (is_punct(",")) {
            next();
            s.args.push_back(parse_expr());
          }
        }
        expect(")");
        expect(";");
        return s;
      }
      Stmt s = begin(StmtKind::Assign, at);
      s.name = target;
      s.expr = parse_expr();
      expect(";");
      return s;
    }
    fail("expected statement");
  }

  // nondet ( [n , n] ) ;
  bool is_nondet_assignment_ahead() const {
    std::size_t k = 1;
    if (!is_punct("(", k)) return false;
    ++k;
    while (peek(k).kind != Tok::End && !is_punct(")", k)) ++k;
    return is_punct(")", k) && is_punct(";", k + 1);
  }

  // Expressions: ternary > || > && > equality > relational > additive >
  // multiplicative > unary > primary.
  ExprPtr parse_expr() {
    ExprPtr c = parse_binary(0);
    if (is_punct("?")) {
      next();
      ExprPtr a = parse_expr();
      expect(":");
      ExprPtr b = parse_expr();
      return make_ternary(c, a, b);
    }
    return c;
  }

  struct OpInfo {
    const char* text;
    BinaryOp op;
    int level;
  };

  static const std::vector<OpInfo>& binary_ops() {
    static const std::vector<OpInfo> ops = {
        {"||", BinaryOp::Or, 0},  {"&&", BinaryOp::And, 1}, {"==", BinaryOp::Eq, 2},
        {"!=", BinaryOp::Ne, 2},  {"<", BinaryOp::Lt, 3},   {"<=", BinaryOp::Le, 3},
        {">", BinaryOp::Gt, 3},   {">=", BinaryOp::Ge, 3},  {"+", BinaryOp::Add, 4},
        {"-", BinaryOp::Sub, 4},  {"*", BinaryOp::Mul, 5},  {"/", BinaryOp::Div, 5},
        {"%", BinaryOp::Mod, 5},
    };
    return ops;
  }

  ExprPtr parse_binary(int level) {
    if (level > 5) return parse_unary();
    ExprPtr lhs = parse_binary(level + 1);
    for (;;) {
      const OpInfo* found = nullptr;
      if (peek().kind == Tok::Punct)
        for (const auto& info : binary_ops())
          if (info.level == level && peek().text == info.text) found = &info;
      if (!found) return lhs;
      next();
      ExprPtr rhs = parse_binary(level + 1);
      lhs = make_binary(found->op, lhs, rhs);
    }
  }

  ExprPtr parse_unary() {
    if (is_punct("-")) {
      next();
      if (peek().kind == Tok::Number) return make_int(number_value(true));
      return make_unary(UnaryOp::Neg, parse_unary());
    }
    if (is_punct("!")) {
      next();
      return make_unary(UnaryOp::Not, parse_unary());
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    if (peek().kind == Tok::Number) return make_int(number_value(false));
    if (is_punct("(")) {
      next();
      ExprPtr e = parse_expr();
      expect(")");
      return e;
    }
    if (is_word("nondet")) {
      next();
      expect("(");
      if (is_punct(")")) {
        next();
        return make_nondet();
      }
      Value lo = signed_number();
      expect(",");
      Value hi = signed_number();
      expect(")");
      return make_nondet(lo, hi);
    }
    std::string name = ident();
    if (is_punct("[")) {
      next();
      ExprPtr idx = parse_expr();
      expect("]");
      return make_index(name, idx);
    }
    if (is_punct("(")) fail("function calls are only allowed as `x = f(...);`");
    return make_var(name);
  }
};

// ---------------------------------------------------------------------------
// Static checks

enum class VarType { Int, Array, Thread, Attr, CondAttr, Mutex, Cond };

const char* type_name(VarType t) {
  switch (t) {
    case VarType::Int: return "int";
    case VarType::Array: return "array";
    case VarType::Thread: return "pthread_t";
    case VarType::Attr: return "pthread_attr_t";
    case VarType::CondAttr: return "pthread_condattr_t";
    case VarType::Mutex: return "pthread_mutex_t";
    case VarType::Cond: return "pthread_cond_t";
  }
  return "?";
}

std::optional<VarType> declared_type(StmtKind kind) {
  switch (kind) {
    case StmtKind::VarDecl: return VarType::Int;
    case StmtKind::ArrayDecl: return VarType::Array;
    case StmtKind::ThreadDecl: return VarType::Thread;
    case StmtKind::AttrDecl: return VarType::Attr;
    case StmtKind::CondAttrDecl: return VarType::CondAttr;
    case StmtKind::MutexDecl: return VarType::Mutex;
    case StmtKind::CondDecl: return VarType::Cond;
    default: return std::nullopt;
  }
}

class Checker {
 public:
  Checker(const Program& p, const std::map<LineId, Position>* positions) : p_(p), positions_(positions) {}

  void run() {
    for (const auto& g : p_.globals) {
      auto t = declared_type(g.kind);
      if (!t) fail(g, std::string(kind_name(g.kind)) + " is not allowed at global scope");
      if (g.kind == StmtKind::VarDecl && g.expr && g.expr->kind != ExprKind::Int)
        fail(g, "global initializer must be an integer constant");
      if (globals_.count(g.name)) fail(g, "redeclaration of '" + g.name + "'");
      globals_[g.name] = *t;
    }
    std::set<std::string> fnames;
    for (const auto& f : p_.functions) {
      if (globals_.count(f.name)) fail_fn(f, "function '" + f.name + "' collides with a global");
      if (!fnames.insert(f.name).second) fail_fn(f, "redefinition of function '" + f.name + "'");
    }
    const FunctionDef* main = p_.find_function("main");
    if (!main) throw ParseError("program has no main function", 1, 1);
    if (!main->params.empty()) fail_fn(*main, "main takes no parameters");
    for (const auto& f : p_.functions) check_function(f);
    check_recursion();
  }

 private:
  const Program& p_;
  const std::map<LineId, Position>* positions_;
  std::map<std::string, VarType> globals_;
  std::map<std::string, std::set<std::string>> edges_;

  // Per function
  std::vector<std::map<std::string, VarType>> scopes_;
  std::set<std::string> fn_names_;
  const FunctionDef* fn_ = nullptr;
  int switch_depth_ = 0;
  std::vector<std::set<Value>> case_values_;

  [[noreturn]] void fail(const Stmt& s, const std::string& msg) const {
    if (positions_) {
      auto it = positions_->find(s.line);
      if (it != positions_->end()) throw ParseError(msg, it->second.line, it->second.column);
    }
    throw ParseError(msg + " (statement " + std::to_string(s.line.value) + ")", s.line.value, 0);
  }
  [[noreturn]] void fail_fn(const FunctionDef& f, const std::string& msg) const {
    if (!f.body.empty()) fail(f.body.front(), msg);
    throw ParseError(msg + " (function " + f.name + ")", 0, 0);
  }

  std::optional<VarType> lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    auto g = globals_.find(name);
    if (g != globals_.end()) return g->second;
    return std::nullopt;
  }

  VarType require(const Stmt& s, const std::string& name) const {
    auto t = lookup(name);
    if (!t) fail(s, "undeclared identifier '" + name + "'");
    return *t;
  }

  void require_type(const Stmt& s, const std::string& name, VarType want) const {
    VarType t = require(s, name);
    if (t != want)
      fail(s, "'" + name + "' has type " + type_name(t) + ", expected " + type_name(want));
  }

  void declare(const Stmt& s, const std::string& name, VarType t) {
    if (globals_.count(name)) fail(s, "local '" + name + "' shadows a global");
    if (p_.find_function(name)) fail(s, "local '" + name + "' collides with a function name");
    if (!fn_names_.insert(name).second) fail(s, "redeclaration of '" + name + "'");
    scopes_.back()[name] = t;
  }

  void check_expr(const Stmt& s, const ExprPtr& e) {
    if (!e) return;
    switch (e->kind) {
      case ExprKind::Var:
        require_type(s, e->name, VarType::Int);
        break;
      case ExprKind::Index:
        require_type(s, e->name, VarType::Array);
        break;
      case ExprKind::Nondet:
        if (e->range && e->range->first > e->range->second) fail(s, "empty nondet range");
        break;
      default:
        break;
    }
    for (const auto& op : e->operands) check_expr(s, op);
  }

  void check_function(const FunctionDef& f) {
    fn_ = &f;
    fn_names_.clear();
    scopes_.assign(1, {});
    switch_depth_ = 0;
    Stmt anchor;
    anchor.line = f.body.empty() ? LineId{} : f.body.front().line;
    for (const auto& param : f.params) declare(anchor, param, VarType::Int);
    check_body(f.body, true);
    bool ends_with_return = !f.body.empty() && f.body.back().kind == StmtKind::Return;
    if (f.returns_value && !ends_with_return) fail_fn(f, "function '" + f.name + "' must end with a return");
    scopes_.clear();
  }

  void check_body(const std::vector<Stmt>& body, bool top_level) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      const Stmt& s = body[i];
      if (s.kind == StmtKind::Return && !(top_level && i + 1 == body.size()))
        fail(s, "return must be the last statement of the function body");
      check_stmt(s);
    }
  }

  void nested(const std::vector<Stmt>& body) {
    scopes_.emplace_back();
    check_body(body, false);
    scopes_.pop_back();
  }

  void check_stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::VarDecl:
        check_expr(s, s.expr);
        declare(s, s.name, VarType::Int);
        break;
      case StmtKind::ArrayDecl:
        fail(s, "arrays are only allowed at global scope");
      case StmtKind::ThreadDecl:
      case StmtKind::AttrDecl:
      case StmtKind::CondAttrDecl:
      case StmtKind::MutexDecl:
      case StmtKind::CondDecl:
        declare(s, s.name, *declared_type(s.kind));
        break;
      case StmtKind::Assign:
        require_type(s, s.name, VarType::Int);
        check_expr(s, s.expr);
        break;
      case StmtKind::NondetAssign:
        require_type(s, s.name, VarType::Int);
        if (!s.expr || s.expr->kind != ExprKind::Nondet) fail(s, "malformed nondet assignment");
        check_expr(s, s.expr);
        break;
      case StmtKind::CallAssign: {
        require_type(s, s.name, VarType::Int);
        const FunctionDef* callee = p_.find_function(s.other);
        if (!callee) fail(s, "call to undefined function '" + s.other + "'");
        if (callee->name == "main") fail(s, "main cannot be called");
        if (!callee->returns_value) fail(s, "function '" + s.other + "' does not return a value");
        if (callee->params.size() != s.args.size())
          fail(s, "wrong number of arguments to '" + s.other + "'");
        for (const auto& a : s.args) check_expr(s, a);
        edges_[fn_->name].insert(s.other);
        break;
      }
      case StmtKind::If:
        check_expr(s, s.expr);
        nested(s.body);
        if (s.has_else) nested(s.else_body);
        break;
      case StmtKind::While:
        check_expr(s, s.expr);
        nested(s.body);
        break;
      case StmtKind::For:
        require_type(s, s.name, VarType::Int);
        check_expr(s, s.expr);
        check_expr(s, s.cond);
        check_expr(s, s.step);
        nested(s.body);
        break;
      case StmtKind::Switch:
        check_expr(s, s.expr);
        ++switch_depth_;
        case_values_.emplace_back();
        nested(s.body);
        case_values_.pop_back();
        --switch_depth_;
        break;
      case StmtKind::Case:
        if (switch_depth_ == 0) fail(s, "case label outside switch");
        if (!case_values_.back().insert(s.values.at(0)).second) fail(s, "duplicate case label");
        break;
      case StmtKind::Default:
      case StmtKind::Break:
        if (switch_depth_ == 0) fail(s, std::string(kind_name(s.kind)) + " outside switch");
        break;
      case StmtKind::Block:
        nested(s.body);
        break;
      case StmtKind::Assert:
      case StmtKind::Assume:
        check_expr(s, s.expr);
        break;
      case StmtKind::Return:
        if (fn_->returns_value && !s.expr) fail(s, "return without a value in '" + fn_->name + "'");
        if (!fn_->returns_value && s.expr) fail(s, "return with a value in void function '" + fn_->name + "'");
        check_expr(s, s.expr);
        break;
      case StmtKind::ThreadCreate: {
        require_type(s, s.name, VarType::Thread);
        const FunctionDef* target = p_.find_function(s.other);
        if (!target) fail(s, "thread created from undefined function '" + s.other + "'");
        if (target->name == "main") fail(s, "main cannot be started as a thread");
        if (!target->params.empty()) fail(s, "thread function '" + s.other + "' must take no parameters");
        edges_[fn_->name].insert(s.other);
        break;
      }
      case StmtKind::ThreadJoin:
        require_type(s, s.name, VarType::Thread);
        break;
      case StmtKind::ThreadExit:
        break;
      case StmtKind::MutexLock:
      case StmtKind::MutexUnlock:
        require_type(s, s.name, VarType::Mutex);
        break;
      case StmtKind::CondInit:
      case StmtKind::CondSignal:
        require_type(s, s.name, VarType::Cond);
        break;
      case StmtKind::CondWait:
        require_type(s, s.name, VarType::Cond);
        require_type(s, s.other, VarType::Mutex);
        break;
    }
  }

  void check_recursion() {
    std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
    std::function<void(const std::string&)> visit = [&](const std::string& f) {
      state[f] = 1;
      for (const auto& g : edges_[f]) {
        if (state[g] == 1) {
          const FunctionDef* fd = p_.find_function(g);
          fail_fn(*fd, "recursion through '" + g + "' is not supported");
        }
        if (state[g] == 0) visit(g);
      }
      state[f] = 2;
    };
    for (const auto& f : p_.functions)
      if (state[f.name] == 0) visit(f.name);
  }
};

}  // namespace

Program parse(std::string_view source) {
  Parser parser(lex(source));
  Program p = parser.parse_program();
  Checker(p, &parser.positions()).run();
  return p;
}

void check(const Program& program) { Checker(program, nullptr).run(); }

Program parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace mcfl
