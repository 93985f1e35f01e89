#include <sstream>

#include "kcp/ast.hpp"

namespace kcp {

namespace {

void print_term(std::ostream& os, const Term& t) {
  if (t.kind == Term::Kind::Integer) {
    os << t.value;
  } else if (t.name.rfind("_#", 0) == 0) {
    os << '_';
  } else {
    os << t.name;
  }
}

void print_args(std::ostream& os, const std::vector<Term>& args) {
  if (args.empty()) return;
  os << '(';
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) os << ',';
    print_term(os, args[i]);
  }
  os << ')';
}

void print_atom(std::ostream& os, const Atom& a) {
  if (a.pred == "#lt" || a.pred == "#le" || a.pred == "#gt" || a.pred == "#ge" ||
      a.pred == "#ne" || a.pred == "#eq") {
    const char* op = a.pred == "#lt"   ? "<"
                     : a.pred == "#le" ? "<="
                     : a.pred == "#gt" ? ">"
                     : a.pred == "#ge" ? ">="
                     : a.pred == "#ne" ? "!="
                                       : "=";
    print_term(os, a.args[0]);
    os << ' ' << op << ' ';
    print_term(os, a.args[1]);
    return;
  }
  if (a.pred == "#plus" || a.pred == "#times") {
    print_term(os, a.args[0]);
    os << " = ";
    print_term(os, a.args[1]);
    os << (a.pred == "#plus" ? " + " : " * ");
    print_term(os, a.args[2]);
    return;
  }
  os << a.pred;
  print_args(os, a.args);
}

void print_literal(std::ostream& os, const Literal& l) {
  if (l.default_neg) os << "not ";
  if (l.strong_neg) os << '-';
  print_atom(os, l.atom);
}

void print_literals(std::ostream& os, const std::vector<Literal>& ls) {
  for (size_t i = 0; i < ls.size(); ++i) {
    if (i) os << ", ";
    print_literal(os, ls[i]);
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

std::string to_string(const Atom& a) {
  std::ostringstream os;
  print_atom(os, a);
  return os.str();
}

std::string to_string(const Literal& l) {
  std::ostringstream os;
  print_literal(os, l);
  return os.str();
}

std::string to_string(const Rule& r) {
  std::ostringstream os;
  os << "caused ";
  if (r.head) print_literal(os, *r.head);
  else os << "false";
  if (!r.if_part.empty()) {
    os << " if ";
    print_literals(os, r.if_part);
  }
  if (!r.after_part.empty()) {
    os << " after ";
    print_literals(os, r.after_part);
  }
  os << '.';
  return os.str();
}

std::string to_string(const MacroRule& m) {
  std::ostringstream os;
  switch (m.kind) {
    case MacroRule::Kind::Inertial: os << "inertial "; break;
    case MacroRule::Kind::Default: os << "default "; break;
    case MacroRule::Kind::Total: os << "total "; break;
    case MacroRule::Kind::Forbidden: os << "forbidden"; break;
    case MacroRule::Kind::Nonexecutable: os << "nonexecutable "; break;
  }
  if (m.subject) print_literal(os, *m.subject);
  if (!m.if_part.empty()) {
    os << (m.kind == MacroRule::Kind::Forbidden ? " " : " if ");
    print_literals(os, m.if_part);
  }
  if (!m.after_part.empty()) {
    os << " after ";
    print_literals(os, m.after_part);
  }
  os << '.';
  return os.str();
}

std::string to_string(const ExecCond& e) {
  std::ostringstream os;
  os << "executable ";
  print_atom(os, e.action);
  if (!e.if_part.empty()) {
    os << " if ";
    print_literals(os, e.if_part);
  }
  os << '.';
  return os.str();
}

std::string to_string(const BgRule& r) {
  std::ostringstream os;
  print_literal(os, r.head);
  if (!r.body.empty()) {
    os << " :- ";
    print_literals(os, r.body);
  }
  os << '.';
  return os.str();
}

std::string to_string(const Query& q) {
  std::ostringstream os;
  print_literals(os, q.goals);
  os << " ? (" << q.plan_length << ").";
  return os.str();
}

static std::string decl_to_string(const FluentDecl& d) {
  std::ostringstream os;
  print_atom(os, d.head);
  if (!d.requires_.empty()) {
    os << " requires ";
    print_literals(os, d.requires_);
  }
  os << '.';
  return os.str();
}

static std::string decl_to_string(const ActionDecl& d) {
  std::ostringstream os;
  print_atom(os, d.head);
  if (!d.requires_.empty()) {
    os << " requires ";
    print_literals(os, d.requires_);
  }
  if (d.has_cost) {
    os << " costs ";
    print_term(os, d.cost);
    if (!d.where.empty()) {
      os << " where ";
      print_literals(os, d.where);
    }
  }
  os << '.';
  return os.str();
}

static std::string item_to_string(const Item& it) {
  if (auto* r = std::get_if<Rule>(&it)) return to_string(*r);
  if (auto* m = std::get_if<MacroRule>(&it)) return to_string(*m);
  return to_string(std::get<ExecCond>(it));
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  if (!p.fluents.empty()) {
    os << "fluents:\n";
    for (const auto& d : p.fluents) os << "  " << decl_to_string(d) << '\n';
    os << '\n';
  }
  if (!p.actions.empty()) {
    os << "actions:\n";
    for (const auto& d : p.actions) os << "  " << decl_to_string(d) << '\n';
    os << '\n';
  }
  if (!p.initially.empty()) {
    os << "initially:\n";
    for (const auto& it : p.initially) os << "  " << item_to_string(it) << '\n';
    os << '\n';
  }
  if (!p.always.empty()) {
    os << "always:\n";
    for (const auto& it : p.always) os << "  " << item_to_string(it) << '\n';
    os << '\n';
  }
  if (p.no_concurrency) os << "noConcurrency.\n\n";
  if (p.query) os << "goal: " << to_string(*p.query) << '\n';
  return os.str();
}

std::string print_background(const Program& p) {
  std::ostringstream os;
  for (const auto& r : p.background) os << to_string(r) << '\n';
  return os.str();
}

}  // namespace kcp
