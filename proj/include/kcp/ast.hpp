#ifndef KCP_AST_HPP
#define KCP_AST_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Abstract syntax for K^c planning problems: background rules, fluent and
// action declarations, causation rules and macros, executability conditions,
// and the goal query. Parsing produces a Program; macro expansion and the
// rewritings are Program -> Program transformations.

namespace kcp {

struct Term {
  enum class Kind { Variable, Symbol, Integer };
  Kind kind = Kind::Symbol;
  std::string name;      // variable or symbol spelling
  long long value = 0;   // integer constants

  static Term var(std::string n) { return {Kind::Variable, std::move(n), 0}; }
  static Term sym(std::string n) { return {Kind::Symbol, std::move(n), 0}; }
  static Term integer(long long v) { return {Kind::Integer, {}, v}; }

  bool is_var() const { return kind == Kind::Variable; }
  bool is_time_var() const { return is_var() && name == "time"; }
  bool operator==(const Term&) const = default;
};

// Built-in predicates are ordinary atoms with reserved names:
//   "#lt" "#le" "#gt" "#ge" "#ne" "#eq"  (binary comparisons / equality)
//   "#plus"  A = B + C   (args A, B, C)
//   "#times" A = B * C
//   "#int"   bounded integer enumeration
bool is_builtin_pred(const std::string& name);

struct Atom {
  std::string pred;
  std::vector<Term> args;

  bool is_builtin() const { return is_builtin_pred(pred); }
  int arity() const { return static_cast<int>(args.size()); }
  bool operator==(const Atom&) const = default;
};

struct Literal {
  bool strong_neg = false;   // classical negation "-"
  bool default_neg = false;  // "not"
  Atom atom;

  bool operator==(const Literal&) const = default;
};

// Background knowledge: normal (disjunction-free) Datalog with default
// negation, strong negation, and built-ins.
struct BgRule {
  Literal head;                // never default-negated
  std::vector<Literal> body;
  int line = 0;

  bool operator==(const BgRule& o) const { return head == o.head && body == o.body; }
};

struct FluentDecl {
  Atom head;                       // predicate with variable parameters
  std::vector<Literal> requires_;  // type literals
  int line = 0;

  bool operator==(const FluentDecl& o) const { return head == o.head && requires_ == o.requires_; }
};

struct ActionDecl {
  Atom head;
  std::vector<Literal> requires_;
  bool has_cost = false;
  Term cost;                    // integer constant, variable, or the `time` variable
  std::vector<Literal> where;   // type literals; may mention `time`
  int line = 0;

  bool operator==(const ActionDecl& o) const {
    return head == o.head && requires_ == o.requires_ && has_cost == o.has_cost &&
           (!has_cost || (cost == o.cost && where == o.where));
  }
};

// caused f if B after A.  A `false` head is represented by nullopt.
struct Rule {
  std::optional<Literal> head;
  std::vector<Literal> if_part;     // fluent + type literals
  std::vector<Literal> after_part;  // fluent + type + positive action literals
  int line = 0;

  bool is_static() const { return after_part.empty(); }
  bool operator==(const Rule& o) const {
    return head == o.head && if_part == o.if_part && after_part == o.after_part;
  }
};

// Macros kept in surface form until expand_macros runs.
struct MacroRule {
  enum class Kind { Inertial, Default, Total, Forbidden, Nonexecutable };
  Kind kind;
  std::optional<Literal> subject;   // fluent literal (inertial/default/total) or action atom (nonexecutable)
  std::vector<Literal> if_part;
  std::vector<Literal> after_part;  // inertial/total/forbidden only
  int line = 0;

  bool operator==(const MacroRule& o) const {
    return kind == o.kind && subject == o.subject && if_part == o.if_part &&
           after_part == o.after_part;
  }
};

struct ExecCond {
  Atom action;                   // positive action atom
  std::vector<Literal> if_part;  // literals over fluents, types, and positive actions
  int line = 0;

  bool operator==(const ExecCond& o) const { return action == o.action && if_part == o.if_part; }
};

using Item = std::variant<Rule, MacroRule, ExecCond>;

struct Query {
  std::vector<Literal> goals;  // ground fluent literals; default_neg marks `not`
  int plan_length = 0;
  int line = 0;

  bool operator==(const Query& o) const { return goals == o.goals && plan_length == o.plan_length; }
};

struct Program {
  std::vector<BgRule> background;
  std::vector<FluentDecl> fluents;
  std::vector<ActionDecl> actions;
  std::vector<Item> initially;
  std::vector<Item> always;
  bool no_concurrency = false;
  std::optional<Query> query;

  const FluentDecl* find_fluent(const std::string& name) const;
  const ActionDecl* find_action(const std::string& name) const;

  bool operator==(const Program& o) const {
    return background == o.background && fluents == o.fluents && actions == o.actions &&
           initially == o.initially && always == o.always &&
           no_concurrency == o.no_concurrency && query == o.query;
  }
};

struct Diagnostic {
  std::string message;
  int line = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                           std::to_string(col)),
        line(line),
        col(col) {}
  int line, col;
};

class SemanticError : public std::runtime_error {
 public:
  explicit SemanticError(const std::string& msg) : std::runtime_error(msg) {}
};

// Printing. print(Program) round-trips: parsing the result yields a
// structurally equal Program.
std::string to_string(const Term&);
std::string to_string(const Atom&);
std::string to_string(const Literal&);
std::string to_string(const Rule&);
std::string to_string(const MacroRule&);
std::string to_string(const ExecCond&);
std::string to_string(const BgRule&);
std::string to_string(const Query&);
std::string print_program(const Program&);    // plan sections only
std::string print_background(const Program&);

}  // namespace kcp

#endif
