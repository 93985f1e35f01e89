#include "kcp/macros.hpp"

#include <map>
#include <set>

namespace kcp {

namespace {

Literal complement(const Literal& l) {
  Literal c = l;
  c.strong_neg = !c.strong_neg;
  return c;
}

std::vector<Item> expand_items(const std::vector<Item>& items) {
  std::vector<Item> out;
  for (const auto& it : items) {
    if (auto* m = std::get_if<MacroRule>(&it)) {
      switch (m->kind) {
        case MacroRule::Kind::Inertial: {
          // inertial f if B after A  =>  caused f if not -f, B after f, A.
          Rule r;
          r.line = m->line;
          r.head = *m->subject;
          Literal guard = complement(*m->subject);
          guard.default_neg = true;
          r.if_part.push_back(guard);
          r.if_part.insert(r.if_part.end(), m->if_part.begin(), m->if_part.end());
          r.after_part.push_back(*m->subject);
          r.after_part.insert(r.after_part.end(), m->after_part.begin(), m->after_part.end());
          out.push_back(std::move(r));
          break;
        }
        case MacroRule::Kind::Default: {
          // default f  =>  caused f if not -f.
          Rule r;
          r.line = m->line;
          r.head = *m->subject;
          Literal guard = complement(*m->subject);
          guard.default_neg = true;
          r.if_part.push_back(guard);
          r.if_part.insert(r.if_part.end(), m->if_part.begin(), m->if_part.end());
          out.push_back(std::move(r));
          break;
        }
        case MacroRule::Kind::Total: {
          if (m->subject->strong_neg)
            throw SemanticError("total requires a positive fluent literal (line " +
                                std::to_string(m->line) + ")");
          for (int sign = 0; sign < 2; ++sign) {
            Rule r;
            r.line = m->line;
            Literal head = *m->subject;
            head.strong_neg = sign == 1;
            Literal guard = complement(head);
            guard.default_neg = true;
            r.head = head;
            r.if_part.push_back(guard);
            r.if_part.insert(r.if_part.end(), m->if_part.begin(), m->if_part.end());
            r.after_part = m->after_part;
            out.push_back(std::move(r));
          }
          break;
        }
        case MacroRule::Kind::Forbidden: {
          // forbidden B after A  =>  caused false if B after A.
          Rule r;
          r.line = m->line;
          r.head = std::nullopt;
          r.if_part = m->if_part;
          r.after_part = m->after_part;
          out.push_back(std::move(r));
          break;
        }
        case MacroRule::Kind::Nonexecutable: {
          // nonexecutable a if B  =>  caused false after a, B.
          Rule r;
          r.line = m->line;
          r.head = std::nullopt;
          r.after_part.push_back(*m->subject);
          r.after_part.insert(r.after_part.end(), m->if_part.begin(), m->if_part.end());
          out.push_back(std::move(r));
          break;
        }
      }
    } else {
      out.push_back(it);
    }
  }
  return out;
}

}  // namespace

Program expand_macros(const Program& p) {
  Program q = p;
  q.initially = expand_items(p.initially);
  q.always = expand_items(p.always);
  return q;
}

namespace {

void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) out.insert(t.name);
}

void safety_check(const std::vector<const std::vector<Literal>*>& parts,
                  const std::string& what, int line, bool is_background,
                  std::vector<Diagnostic>& diags,
                  const std::set<std::string>& dynamic_preds) {
  // Variables in a default-negated type literal must occur in some literal
  // that is not a default-negated type literal. For background rules the
  // condition is the usual Datalog safety: head and negative-body variables
  // must occur in a positive body literal (built-ins can bind their result).
  std::set<std::string> safe_vars;
  for (const auto* ls : parts)
    for (const auto& l : *ls) {
      bool is_type = !dynamic_preds.count(l.atom.pred);
      if (l.default_neg && is_type) continue;
      if (is_background && l.default_neg) continue;
      for (const auto& t : l.atom.args) collect_vars(t, safe_vars);
    }
  for (const auto* ls : parts)
    for (const auto& l : *ls) {
      bool is_type = !dynamic_preds.count(l.atom.pred);
      if (!(l.default_neg && is_type) && !(is_background && l.default_neg)) continue;
      for (const auto& t : l.atom.args) {
        if (t.is_var() && !safe_vars.count(t.name))
          diags.push_back({"unsafe variable " + t.name + " in " + what, line});
      }
    }
}

}  // namespace

std::vector<Diagnostic> validate(const Program& p) {
  std::vector<Diagnostic> diags;
  std::set<std::string> dynamic_preds;
  for (const auto& d : p.fluents) dynamic_preds.insert(d.head.pred);
  for (const auto& d : p.actions) dynamic_preds.insert(d.head.pred);

  auto visit = [&](const std::vector<Item>& items) {
    for (const auto& it : items) {
      if (auto* r = std::get_if<Rule>(&it)) {
        std::vector<const std::vector<Literal>*> parts = {&r->if_part, &r->after_part};
        std::vector<Literal> head_as_list;
        if (r->head) head_as_list.push_back(*r->head);
        parts.push_back(&head_as_list);
        safety_check(parts, "rule " + to_string(*r), r->line, false, diags, dynamic_preds);
      } else if (auto* e = std::get_if<ExecCond>(&it)) {
        std::vector<Literal> head_as_list = {Literal{false, false, e->action}};
        std::vector<const std::vector<Literal>*> parts = {&e->if_part, &head_as_list};
        safety_check(parts, "executability condition " + to_string(*e), e->line, false, diags,
                     dynamic_preds);
      } else {
        diags.push_back({"unexpanded macro; run expand_macros first",
                         std::get<MacroRule>(it).line});
      }
    }
  };
  visit(p.initially);
  visit(p.always);

  for (const auto& r : p.background) {
    std::vector<Literal> head_as_list = {r.head};
    // head variables must be bound by the positive body
    std::set<std::string> bound;
    for (const auto& l : r.body)
      if (!l.default_neg)
        for (const auto& t : l.atom.args) collect_vars(t, bound);
    for (const auto& t : r.head.atom.args)
      if (t.is_var() && !bound.count(t.name))
        diags.push_back({"unsafe head variable " + t.name + " in " + to_string(r), r.line});
    std::vector<const std::vector<Literal>*> parts = {&r.body};
    safety_check(parts, "background rule " + to_string(r), r.line, true, diags, dynamic_preds);
  }

  // positive action dependency cycles through executability conditions
  std::map<std::string, std::set<std::string>> dep;
  std::set<std::string> action_names;
  for (const auto& d : p.actions) action_names.insert(d.head.pred);
  for (const auto& it : p.always) {
    if (auto* e = std::get_if<ExecCond>(&it)) {
      for (const auto& l : e->if_part)
        if (!l.default_neg && action_names.count(l.atom.pred))
          dep[e->action.pred].insert(l.atom.pred);
    }
  }
  // DFS cycle detection
  std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
  std::vector<std::string> cycle;
  auto dfs = [&](auto&& self, const std::string& a) -> bool {
    color[a] = 1;
    for (const auto& b : dep[a]) {
      if (color[b] == 1) {
        cycle.push_back(b);
        return true;
      }
      if (color[b] == 0 && self(self, b)) return true;
    }
    color[a] = 2;
    return false;
  };
  for (const auto& [a, _] : dep) {
    if (color[a] == 0 && dfs(dfs, a)) {
      diags.push_back({"positive cyclic dependency among actions involving " + cycle.front(), 0});
      break;
    }
  }
  return diags;
}

}  // namespace kcp
