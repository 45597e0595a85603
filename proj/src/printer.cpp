// SPDX-License-Identifier: Apache-2.0

#include "mcfl/printer.hpp"

#include <sstream>

namespace mcfl {

namespace {

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 0;
    case BinaryOp::And: return 1;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 2;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 3;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 4;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return 5;
  }
  return 0;
}

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

std::string wrap(const std::string& s) { return "(" + s + ")"; }

// Operand of a binary operator at precedence `prec`; right operands need
// parentheses at equal precedence since all operators are left-associative.
std::string operand(const ExprPtr& e, int prec, bool right) {
  std::string text = print_expr(*e);
  if (e->kind == ExprKind::Ternary) return wrap(text);
  if (e->kind == ExprKind::Binary) {
    int p = precedence(e->binary_op);
    if (p < prec || (right && p == prec)) return wrap(text);
  }
  return text;
}

void print_body(std::ostream& out, const std::vector<Stmt>& body, int depth) {
  for (const auto& s : body) out << print_stmt(s, depth);
}

}  // namespace

std::string print_expr(const ExprPtr& e) { return e ? print_expr(*e) : std::string(); }

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Int:
      return std::to_string(e.value);
    case ExprKind::Var:
      return e.name;
    case ExprKind::Index:
      return e.name + "[" + print_expr(*e.operands[0]) + "]";
    case ExprKind::Nondet:
      if (e.range) return "nondet(" + std::to_string(e.range->first) + ", " + std::to_string(e.range->second) + ")";
      return "nondet()";
    case ExprKind::Unary: {
      const auto& x = e.operands[0];
      std::string inner = print_expr(*x);
      bool paren = x->kind == ExprKind::Binary || x->kind == ExprKind::Ternary ||
                   (x->kind == ExprKind::Int && e.unary_op == UnaryOp::Neg);
      return std::string(e.unary_op == UnaryOp::Neg ? "-" : "!") + (paren ? wrap(inner) : inner);
    }
    case ExprKind::Binary: {
      int p = precedence(e.binary_op);
      return operand(e.operands[0], p, false) + " " + op_text(e.binary_op) + " " + operand(e.operands[1], p, true);
    }
    case ExprKind::Ternary: {
      std::string c = print_expr(*e.operands[0]);
      if (e.operands[0]->kind == ExprKind::Ternary) c = wrap(c);
      return c + " ? " + print_expr(*e.operands[1]) + " : " + print_expr(*e.operands[2]);
    }
  }
  return "?";
}

std::string print_stmt(const Stmt& s, int depth) {
  std::ostringstream out;
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  out << pad;
  switch (s.kind) {
    case StmtKind::VarDecl:
      out << "int " << s.name;
      if (s.expr) out << " = " << print_expr(*s.expr);
      out << ";\n";
      break;
    case StmtKind::ArrayDecl:
      out << "int " << s.name << "[" << s.values.size() << "] = {";
      for (std::size_t i = 0; i < s.values.size(); ++i) out << (i ? ", " : "") << s.values[i];
      out << "};\n";
      break;
    case StmtKind::Assign:
    case StmtKind::NondetAssign:
      out << s.name << " = " << print_expr(*s.expr) << ";\n";
      break;
    case StmtKind::CallAssign:
      out << s.name << " = " << s.other << "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) out << (i ? ", " : "") << print_expr(*s.args[i]);
      out << ");\n";
      break;
    case StmtKind::If:
      out << "if (" << print_expr(*s.expr) << ") {\n";
      print_body(out, s.body, depth + 1);
      if (s.has_else) {
        out << pad << "} else {\n";
        print_body(out, s.else_body, depth + 1);
      }
      out << pad << "}\n";
      break;
    case StmtKind::While:
      out << "while (" << print_expr(*s.expr) << ") {\n";
      print_body(out, s.body, depth + 1);
      out << pad << "}\n";
      break;
    case StmtKind::For:
      out << "for (" << s.name << " = " << print_expr(*s.expr) << "; " << print_expr(*s.cond) << "; " << s.name
          << " = " << print_expr(*s.step) << ") {\n";
      print_body(out, s.body, depth + 1);
      out << pad << "}\n";
      break;
    case StmtKind::Switch:
      out << "switch (" << print_expr(*s.expr) << ") {\n";
      print_body(out, s.body, depth + 1);
      out << pad << "}\n";
      break;
    case StmtKind::Case:
      out << "case " << s.values.at(0) << ":\n";
      break;
    case StmtKind::Default:
      out << "default:\n";
      break;
    case StmtKind::Break:
      out << "break;\n";
      break;
    case StmtKind::Block:
      out << "{\n";
      print_body(out, s.body, depth + 1);
      out << pad << "}\n";
      break;
    case StmtKind::Assert:
      out << "assert(" << print_expr(*s.expr) << ");\n";
      break;
    case StmtKind::Assume:
      out << "assume(" << print_expr(*s.expr) << ");\n";
      break;
    case StmtKind::Return:
      out << "return";
      if (s.expr) out << " " << print_expr(*s.expr);
      out << ";\n";
      break;
    case StmtKind::ThreadDecl:
    case StmtKind::AttrDecl:
    case StmtKind::CondAttrDecl:
    case StmtKind::MutexDecl:
    case StmtKind::CondDecl:
      out << kind_name(s.kind) << " " << s.name << ";\n";
      break;
    case StmtKind::ThreadCreate:
      out << "pthread_create(" << s.name << ", " << s.other << ");\n";
      break;
    case StmtKind::ThreadExit:
      out << "pthread_exit();\n";
      break;
    case StmtKind::CondWait:
      out << "pthread_cond_wait(" << s.name << ", " << s.other << ");\n";
      break;
    case StmtKind::ThreadJoin:
    case StmtKind::MutexLock:
    case StmtKind::MutexUnlock:
    case StmtKind::CondInit:
    case StmtKind::CondSignal:
      out << kind_name(s.kind) << "(" << s.name << ");\n";
      break;
  }
  return out.str();
}

std::string pretty_print(const Program& program) {
  std::ostringstream out;
  for (const auto& g : program.globals) out << print_stmt(g, 0);
  for (const auto& f : program.functions) {
    if (!program.globals.empty() || &f != &program.functions.front()) out << "\n";
    out << (f.returns_value ? "int " : "void ") << f.name << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) out << (i ? ", " : "") << "int " << f.params[i];
    out << ") {\n";
    print_body(out, f.body, 1);
    out << "}\n";
  }
  return out.str();
}

}  // namespace mcfl
