// SPDX-License-Identifier: Apache-2.0

#include "mcfl/unwind.hpp"

#include <set>

namespace mcfl {

namespace detail {

namespace {

using RenameMap = std::map<std::string, std::string>;

bool names_variable(StmtKind k) { return k != StmtKind::Case && k != StmtKind::Default; }

void rename_stmt(Stmt& s, const RenameMap& m) {
  auto ren = [&](const std::string& n) {
    auto it = m.find(n);
    return it == m.end() ? n : it->second;
  };
  if (names_variable(s.kind) && !s.name.empty()) s.name = ren(s.name);
  if (s.kind == StmtKind::CondWait) s.other = ren(s.other);
  s.expr = rename_vars(s.expr, ren);
  s.cond = rename_vars(s.cond, ren);
  s.step = rename_vars(s.step, ren);
  for (auto& a : s.args) a = rename_vars(a, ren);
  for (auto& c : s.body) rename_stmt(c, m);
  for (auto& c : s.else_body) rename_stmt(c, m);
}

class Unwinder {
 public:
  explicit Unwinder(const Program& original) : original_(original) {
    for (const auto& g : original.globals) used_.insert(g.name);
    for (const auto& f : original.functions) {
      used_.insert(f.name);
      for (const auto& p : f.params) used_.insert(p);
      for_each_stmt(f.body, [&](const Stmt& s) {
        if (is_declaration_kind(s.kind)) used_.insert(s.name);
      });
    }
  }

  std::unique_ptr<Unwound> run() {
    auto out = std::make_unique<Unwound>();
    out_ = out.get();
    out->program.globals = original_.globals;
    std::set<std::string> keep = {"main"};
    for (const auto& t : original_.thread_functions()) keep.insert(t);
    for (const auto& f : original_.functions)
      if (keep.count(f.name)) out->program.functions.push_back(f);
    for (auto& f : out->program.functions) process(f.body, false);
    return out;
  }

 private:
  const Program& original_;
  Unwound* out_ = nullptr;
  std::set<std::string> used_;
  int counter_ = 0;

  std::string fresh(const std::string& base) {
    std::string n;
    do {
      n = base + "_" + std::to_string(++counter_);
    } while (used_.count(n));
    used_.insert(n);
    return n;
  }

  void mark_copy(std::vector<Stmt>& body) {
    for_each_stmt(body, [&](Stmt& s) { out_->role[&s] = UnwindRole::CalleeBody; });
  }

  // Rewrites call-assignments in place. Statements never move after being
  // placed, so the recorded addresses stay valid.
  void process(std::vector<Stmt>& body, bool in_copy) {
    for (auto& s : body) {
      if (s.kind == StmtKind::CallAssign) {
        expand(s, in_copy);
        process(s.body, true);
      } else {
        process(s.body, in_copy);
        process(s.else_body, in_copy);
      }
    }
  }

  void expand(Stmt& call, bool in_copy) {
    const FunctionDef& callee = *original_.find_function(call.other);
    RenameMap m;
    for (const auto& p : callee.params) m[p] = fresh(p);
    for_each_stmt(callee.body, [&](const Stmt& s) {
      if (is_declaration_kind(s.kind)) m[s.name] = fresh(s.name);
    });

    std::vector<Stmt> children;
    for (std::size_t i = 0; i < callee.params.size(); ++i) {
      Stmt d = make_stmt(StmtKind::VarDecl, m[callee.params[i]], call.args[i]);
      d.line = call.line;
      children.push_back(std::move(d));
    }
    std::size_t first_body = children.size();
    for (const auto& s : callee.body) {
      Stmt c = s;
      rename_stmt(c, m);
      children.push_back(std::move(c));
    }
    // The checker guarantees a value-returning callee ends in `return e;`.
    Stmt& ret = children.back();
    ret.kind = StmtKind::Assign;
    ret.name = call.name;

    call.kind = StmtKind::Block;
    call.name.clear();
    call.other.clear();
    call.args.clear();
    call.body = std::move(children);

    out_->role[&call] = in_copy ? UnwindRole::CalleeBody : UnwindRole::CallBlock;
    for (std::size_t i = first_body; i + 1 < call.body.size(); ++i) {
      out_->role[&call.body[i]] = UnwindRole::CalleeBody;
      mark_copy(call.body[i].body);
      mark_copy(call.body[i].else_body);
    }
    for (std::size_t i = 0; i < first_body; ++i) out_->role[&call.body[i]] = UnwindRole::ParamDecl;
    out_->role[&call.body.back()] = UnwindRole::ReturnImage;
  }
};

}  // namespace

std::unique_ptr<Unwound> unwind(const Program& program) { return Unwinder(program).run(); }

}  // namespace detail

Program unwind_calls(const Program& program, LineMap* line_map) {
  auto u = detail::unwind(program);
  std::vector<LineOrigin> origins;
  for_each_stmt(u->program, [&](const Stmt& s) {
    switch (u->role_of(&s)) {
      case detail::UnwindRole::Plain:
      case detail::UnwindRole::CallBlock:
        origins.push_back(LineOrigin::original(s.line));
        break;
      default:
        origins.push_back(LineOrigin::unwind_copy(s.line));
        break;
    }
  });
  Program out = u->program;
  renumber(out);
  if (line_map) {
    line_map->clear();
    for (std::size_t i = 0; i < origins.size(); ++i) (*line_map)[LineId{static_cast<int>(i + 1)}] = origins[i];
  }
  return out;
}

}  // namespace mcfl
