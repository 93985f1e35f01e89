#include "kcp/parser.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace kcp {

bool is_builtin_pred(const std::string& name) {
  return name == "#lt" || name == "#le" || name == "#gt" || name == "#ge" || name == "#ne" ||
         name == "#eq" || name == "#plus" || name == "#times" || name == "#int";
}

const FluentDecl* Program::find_fluent(const std::string& name) const {
  for (const auto& d : fluents)
    if (d.head.pred == name) return &d;
  return nullptr;
}

const ActionDecl* Program::find_action(const std::string& name) const {
  for (const auto& d : actions)
    if (d.head.pred == name) return &d;
  return nullptr;
}

namespace {

enum class Tok {
  Ident,      // lowercase-led identifier
  Variable,   // uppercase-led identifier or `_`
  Integer,
  LParen,
  RParen,
  Comma,
  Dot,
  If,         // :-
  Colon,
  Question,
  StrongNeg,  // - or the UTF-8 negation sign
  Lt, Le, Gt, Ge, Ne, Eq, Plus, Times,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  long long value = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long v = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        v = v * 10 + (src_[pos_] - '0');
        advance();
      }
      t.kind = Tok::Integer;
      t.value = v;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        s.push_back(src_[pos_]);
        advance();
      }
      if (s == "_" || std::isupper(static_cast<unsigned char>(s[0]))) {
        t.kind = Tok::Variable;
      } else {
        t.kind = Tok::Ident;
      }
      t.text = std::move(s);
      return t;
    }
    switch (c) {
      case '(': advance(); t.kind = Tok::LParen; return t;
      case ')': advance(); t.kind = Tok::RParen; return t;
      case ',': advance(); t.kind = Tok::Comma; return t;
      case '.': advance(); t.kind = Tok::Dot; return t;
      case '?': advance(); t.kind = Tok::Question; return t;
      case '+': advance(); t.kind = Tok::Plus; return t;
      case '*': advance(); t.kind = Tok::Times; return t;
      case '-': advance(); t.kind = Tok::StrongNeg; return t;
      case ':':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '-') {
          advance();
          t.kind = Tok::If;
        } else {
          t.kind = Tok::Colon;
        }
        return t;
      case '<':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          advance();
          t.kind = Tok::Le;
        } else {
          t.kind = Tok::Lt;
        }
        return t;
      case '>':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          advance();
          t.kind = Tok::Ge;
        } else {
          t.kind = Tok::Gt;
        }
        return t;
      case '!':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          advance();
          t.kind = Tok::Ne;
          return t;
        }
        throw ParseError("unexpected character '!'", t.line, t.col);
      case '=': advance(); t.kind = Tok::Eq; return t;
      case '#': {
        advance();
        std::string s = "#";
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          s.push_back(src_[pos_]);
          advance();
        }
        if (s != "#int") throw ParseError("unknown built-in " + s, t.line, t.col);
        t.kind = Tok::Ident;
        t.text = std::move(s);
        return t;
      }
      default:
        // UTF-8 negation sign 0xC2 0xAC
        if (static_cast<unsigned char>(c) == 0xC2 && pos_ + 1 < src_.size() &&
            static_cast<unsigned char>(src_[pos_ + 1]) == 0xAC) {
          advance();
          advance();
          t.kind = Tok::StrongNeg;
          return t;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.col);
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
      if (pos_ < src_.size() && src_[pos_] == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      break;
    }
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

enum class Section { Background, Fluents, Actions, Initially, Always, Goal };

class Parser {
 public:
  Program parse(const std::vector<SourceText>& sources) {
    for (const auto& s : sources) {
      Lexer lex(s.text);
      tok_ = lex.next();
      lookahead_valid_ = false;
      lexer_ = &lex;
      section_ = Section::Background;
      while (tok_.kind != Tok::End) statement();
      lexer_ = nullptr;
    }
    resolve();
    return std::move(prog_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, tok_.line, tok_.col); }

  void bump() {
    if (lookahead_valid_) {
      tok_ = lookahead_;
      lookahead_valid_ = false;
    } else {
      tok_ = lexer_->next();
    }
  }

  const Token& peek() {
    if (!lookahead_valid_) {
      lookahead_ = lexer_->next();
      lookahead_valid_ = true;
    }
    return lookahead_;
  }

  void expect(Tok k, const char* what) {
    if (tok_.kind != k) fail(std::string("expected ") + what);
    bump();
  }

  bool is_kw(const char* kw) const { return tok_.kind == Tok::Ident && tok_.text == kw; }

  // Section keywords are only recognized when followed by ':'.
  bool at_section_kw() {
    if (tok_.kind != Tok::Ident) return false;
    const std::string& s = tok_.text;
    if (s != "fluents" && s != "actions" && s != "initially" && s != "always" && s != "goal")
      return false;
    return peek().kind == Tok::Colon;
  }

  void statement() {
    if (at_section_kw()) {
      std::string s = tok_.text;
      bump();
      bump();  // ':'
      if (s == "fluents") section_ = Section::Fluents;
      else if (s == "actions") section_ = Section::Actions;
      else if (s == "initially") section_ = Section::Initially;
      else if (s == "always") section_ = Section::Always;
      else section_ = Section::Goal;
      return;
    }
    if (is_kw("noConcurrency")) {
      bump();
      expect(Tok::Dot, "'.' after noConcurrency");
      prog_.no_concurrency = true;
      return;
    }
    switch (section_) {
      case Section::Background: background_rule(); break;
      case Section::Fluents: fluent_decl(); break;
      case Section::Actions: action_decl(); break;
      case Section::Initially: initially_item(); break;
      case Section::Always: always_item(); break;
      case Section::Goal: goal(); break;
    }
  }

  // --- terms, atoms, literals ----------------------------------------------

  Term term(bool allow_time) {
    if (tok_.kind == Tok::Integer) {
      Term t = Term::integer(tok_.value);
      bump();
      return t;
    }
    if (tok_.kind == Tok::Variable) {
      std::string n = tok_.text;
      bump();
      if (n == "_") n = "_#" + std::to_string(anon_counter_++);
      return Term::var(std::move(n));
    }
    if (tok_.kind == Tok::Ident) {
      std::string n = tok_.text;
      if (n == "time") {
        if (!allow_time) fail("reserved variable `time` is only allowed in costs/where parts");
        bump();
        return Term::var("time");
      }
      bump();
      return Term::sym(std::move(n));
    }
    if (tok_.kind == Tok::StrongNeg) fail("negative integer literals are not allowed");
    fail("expected a term");
  }

  // comparison or arithmetic built-in whose left-hand term is already parsed
  Atom builtin_tail(Term lhs, bool allow_time) {
    Tok op = tok_.kind;
    bump();
    Term rhs = term(allow_time);
    switch (op) {
      case Tok::Lt: return Atom{"#lt", {lhs, rhs}};
      case Tok::Le: return Atom{"#le", {lhs, rhs}};
      case Tok::Gt: return Atom{"#gt", {lhs, rhs}};
      case Tok::Ge: return Atom{"#ge", {lhs, rhs}};
      case Tok::Ne: return Atom{"#ne", {lhs, rhs}};
      case Tok::Eq:
        if (tok_.kind == Tok::Plus) {
          bump();
          Term rhs2 = term(allow_time);
          return Atom{"#plus", {lhs, rhs, rhs2}};
        }
        if (tok_.kind == Tok::Times) {
          bump();
          Term rhs2 = term(allow_time);
          return Atom{"#times", {lhs, rhs, rhs2}};
        }
        return Atom{"#eq", {lhs, rhs}};
      default: fail("expected comparison operator");
    }
  }

  Atom atom(bool allow_time) {
    if (tok_.kind == Tok::Variable || tok_.kind == Tok::Integer ||
        (tok_.kind == Tok::Ident && tok_.text == "time")) {
      // must be a built-in: V < W, 3 = 1 + 2, ...
      Term lhs = term(allow_time);
      return builtin_tail(std::move(lhs), allow_time);
    }
    if (tok_.kind != Tok::Ident) fail("expected an atom");
    std::string name = tok_.text;
    int line = tok_.line, col = tok_.col;
    bump();
    Atom a;
    a.pred = name;
    if (tok_.kind == Tok::LParen) {
      bump();
      for (;;) {
        a.args.push_back(term(allow_time));
        if (tok_.kind == Tok::Comma) {
          bump();
          continue;
        }
        break;
      }
      expect(Tok::RParen, "')'");
    } else if (tok_.kind == Tok::Lt || tok_.kind == Tok::Le || tok_.kind == Tok::Gt ||
               tok_.kind == Tok::Ge || tok_.kind == Tok::Ne || tok_.kind == Tok::Eq) {
      // constant on the left of a built-in, e.g. joe != X
      return builtin_tail(Term::sym(name), allow_time);
    }
    if (reserved_words_.count(a.pred))
      throw ParseError("reserved word `" + a.pred + "` used as a predicate", line, col);
    return a;
  }

  Literal literal(bool allow_time) {
    Literal l;
    if (is_kw("not")) {
      bump();
      l.default_neg = true;
    }
    if (tok_.kind == Tok::StrongNeg) {
      bump();
      if (tok_.kind == Tok::Integer) fail("negative integer literals are not allowed");
      l.strong_neg = true;
    }
    l.atom = atom(allow_time);
    if (l.strong_neg && l.atom.is_builtin())
      fail("strong negation cannot be applied to a built-in atom");
    return l;
  }

  std::vector<Literal> literal_list(bool allow_time) {
    std::vector<Literal> ls;
    ls.push_back(literal(allow_time));
    while (tok_.kind == Tok::Comma) {
      bump();
      ls.push_back(literal(allow_time));
    }
    return ls;
  }

  // --- statements -----------------------------------------------------------

  void background_rule() {
    BgRule r;
    r.line = tok_.line;
    r.head = literal(false);
    if (r.head.default_neg) fail("default negation is not allowed in rule heads");
    if (r.head.atom.is_builtin()) fail("built-in predicate in rule head");
    if (tok_.kind == Tok::If) {
      bump();
      r.body = literal_list(false);
    }
    expect(Tok::Dot, "'.' after rule");
    prog_.background.push_back(std::move(r));
  }

  // shared by fluent and action declarations
  Atom decl_head() {
    if (tok_.kind != Tok::Ident) fail("expected a declaration");
    Atom head;
    head.pred = tok_.text;
    int line = tok_.line, col = tok_.col;
    bump();
    if (reserved_words_.count(head.pred))
      throw ParseError("reserved word `" + head.pred + "` used as a predicate", line, col);
    if (tok_.kind == Tok::LParen) {
      bump();
      for (;;) {
        if (tok_.kind != Tok::Variable) fail("declaration parameters must be variables");
        head.args.push_back(Term::var(tok_.text));
        bump();
        if (tok_.kind == Tok::Comma) {
          bump();
          continue;
        }
        break;
      }
      expect(Tok::RParen, "')'");
    }
    return head;
  }

  void fluent_decl() {
    FluentDecl d;
    d.line = tok_.line;
    d.head = decl_head();
    if (is_kw("requires")) {
      bump();
      d.requires_ = literal_list(false);
      for (const auto& l : d.requires_)
        if (l.default_neg) fail("default negation not allowed in requires part");
    }
    if (is_kw("costs")) fail("fluent declarations cannot carry costs");
    expect(Tok::Dot, "'.' after declaration");
    check_params_typed(d.head, d.requires_, d.line);
    prog_.fluents.push_back(std::move(d));
  }

  void action_decl() {
    ActionDecl d;
    d.line = tok_.line;
    d.head = decl_head();
    if (is_kw("requires")) {
      bump();
      d.requires_ = literal_list(false);
      for (const auto& l : d.requires_)
        if (l.default_neg) fail("default negation not allowed in requires part");
    }
    if (is_kw("costs")) {
      bump();
      d.has_cost = true;
      if (tok_.kind == Tok::Integer) {
        d.cost = Term::integer(tok_.value);
        bump();
      } else if (tok_.kind == Tok::Variable) {
        d.cost = Term::var(tok_.text);
        bump();
      } else if (is_kw("time")) {
        d.cost = Term::var("time");
        bump();
      } else {
        fail("cost must be an integer constant, a variable, or `time`");
      }
      if (is_kw("where")) {
        bump();
        d.where = literal_list(true);
        for (const auto& l : d.where)
          if (l.default_neg || l.strong_neg) fail("where part must contain positive type literals");
      }
    }
    expect(Tok::Dot, "'.' after declaration");
    check_params_typed(d.head, d.requires_, d.line);
    check_cost_decl(d);
    prog_.actions.push_back(std::move(d));
  }

  void check_params_typed(const Atom& head, const std::vector<Literal>& req, int line) {
    for (const auto& p : head.args) {
      bool found = false;
      for (const auto& l : req)
        for (const auto& t : l.atom.args)
          if (t == p) found = true;
      if (!found)
        throw ParseError("parameter " + p.name + " of " + head.pred +
                             " does not occur in the requires part",
                         line, 1);
    }
  }

  void check_cost_decl(const ActionDecl& d) {
    if (!d.has_cost) return;
    // cost variable must occur in requires/where or be `time`
    if (d.cost.is_var() && !d.cost.is_time_var()) {
      bool found = false;
      for (const auto& l : d.requires_)
        for (const auto& t : l.atom.args)
          if (t == d.cost) found = true;
      for (const auto& l : d.where)
        for (const auto& t : l.atom.args)
          if (t == d.cost) found = true;
      if (!found)
        throw ParseError("cost variable " + d.cost.name + " of " + d.head.pred +
                             " occurs in neither the requires nor the where part",
                         d.line, 1);
    }
    for (const auto& l : d.requires_)
      for (const auto& t : l.atom.args)
        if (t.is_time_var())
          throw ParseError("`time` cannot occur in the requires part", d.line, 1);
  }

  Item rule_like(bool initially) {
    int line = tok_.line;
    if (is_kw("executable")) {
      if (initially) fail("executability conditions are not allowed in the initially section");
      bump();
      ExecCond e;
      e.line = line;
      e.action = atom(false);
      if (is_kw("if")) {
        bump();
        e.if_part = literal_list(false);
      }
      expect(Tok::Dot, "'.' after executability condition");
      return e;
    }
    if (is_kw("nonexecutable")) {
      if (initially) fail("nonexecutable is not allowed in the initially section");
      bump();
      MacroRule m;
      m.kind = MacroRule::Kind::Nonexecutable;
      m.line = line;
      Literal subj;
      subj.atom = atom(false);
      m.subject = subj;
      if (is_kw("if")) {
        bump();
        m.if_part = literal_list(false);
      }
      expect(Tok::Dot, "'.' after nonexecutable");
      return m;
    }
    if (is_kw("inertial") || is_kw("default") || is_kw("total")) {
      MacroRule m;
      m.line = line;
      if (is_kw("inertial")) m.kind = MacroRule::Kind::Inertial;
      else if (is_kw("default")) m.kind = MacroRule::Kind::Default;
      else m.kind = MacroRule::Kind::Total;
      bump();
      m.subject = literal(false);
      if (m.subject->default_neg) fail("default negation not allowed here");
      if (is_kw("if")) {
        bump();
        m.if_part = literal_list(false);
      }
      if (is_kw("after")) {
        if (m.kind == MacroRule::Kind::Default) fail("default takes no after part");
        bump();
        m.after_part = literal_list(false);
      }
      expect(Tok::Dot, "'.'");
      return m;
    }
    if (is_kw("forbidden")) {
      MacroRule m;
      m.kind = MacroRule::Kind::Forbidden;
      m.line = line;
      bump();
      if (!is_kw("after")) m.if_part = literal_list(false);
      if (is_kw("after")) {
        bump();
        m.after_part = literal_list(false);
      }
      expect(Tok::Dot, "'.'");
      return m;
    }
    // caused rule; the `caused` keyword is optional only for bare facts,
    // which we require to be written with `caused` in rule sections anyway.
    Rule r;
    r.line = line;
    if (is_kw("caused")) {
      bump();
      if (is_kw("false")) {
        bump();
        r.head = std::nullopt;
      } else {
        r.head = literal(false);
        if (r.head->default_neg) fail("default negation not allowed in rule heads");
      }
    } else {
      // bare fact form: `f.` inside initially/always
      r.head = literal(false);
      if (r.head->default_neg) fail("default negation not allowed in rule heads");
    }
    if (is_kw("if")) {
      bump();
      r.if_part = literal_list(false);
    }
    if (is_kw("after")) {
      bump();
      r.after_part = literal_list(false);
    }
    expect(Tok::Dot, "'.' after rule");
    return r;
  }

  void initially_item() {
    Item it = rule_like(true);
    if (auto* r = std::get_if<Rule>(&it)) {
      if (!r->after_part.empty()) fail("initial state constraints must be static rules");
    }
    if (auto* m = std::get_if<MacroRule>(&it)) {
      if (!m->after_part.empty()) fail("initial state constraints must be static rules");
    }
    prog_.initially.push_back(std::move(it));
  }

  void always_item() { prog_.always.push_back(rule_like(false)); }

  void goal() {
    Query q;
    q.line = tok_.line;
    if (tok_.kind != Tok::Question) {
      q.goals = literal_list(false);
    }
    expect(Tok::Question, "'?' after goal literals");
    expect(Tok::LParen, "'('");
    if (tok_.kind != Tok::Integer) fail("plan length must be a non-negative integer");
    q.plan_length = static_cast<int>(tok_.value);
    bump();
    expect(Tok::RParen, "')'");
    if (tok_.kind == Tok::Dot) bump();  // trailing dot is optional
    if (prog_.query) fail("duplicate goal section");
    prog_.query = std::move(q);
  }

  // --- post-parse resolution -------------------------------------------------

  void resolve() {
    std::map<std::string, int> fluent_arity, action_arity;
    for (const auto& d : prog_.fluents) {
      auto [it, fresh] = fluent_arity.emplace(d.head.pred, d.head.arity());
      if (!fresh && it->second != d.head.arity())
        throw ParseError("fluent " + d.head.pred + " redeclared with different arity", d.line, 1);
      if (action_arity.count(d.head.pred))
        throw ParseError(d.head.pred + " declared as both fluent and action", d.line, 1);
    }
    for (const auto& d : prog_.actions) {
      auto [it, fresh] = action_arity.emplace(d.head.pred, d.head.arity());
      if (!fresh && it->second != d.head.arity())
        throw ParseError("action " + d.head.pred + " redeclared with different arity", d.line, 1);
      if (fluent_arity.count(d.head.pred))
        throw ParseError(d.head.pred + " declared as both fluent and action", d.line, 1);
    }
    for (const auto& r : prog_.background) {
      if (fluent_arity.count(r.head.atom.pred) || action_arity.count(r.head.atom.pred))
        throw ParseError("background predicate " + r.head.atom.pred +
                             " clashes with a fluent/action name",
                         r.line, 1);
    }

    auto check_head_fluent = [&](const std::optional<Literal>& h, int line) {
      if (!h) return;
      if (!fluent_arity.count(h->atom.pred) ||
          fluent_arity[h->atom.pred] != h->atom.arity())
        throw ParseError("rule head " + h->atom.pred + "/" +
                             std::to_string(h->atom.arity()) + " is not a declared fluent",
                         line, 1);
    };
    auto check_action_atom = [&](const Atom& a, int line) {
      if (!action_arity.count(a.pred) || action_arity[a.pred] != a.arity())
        throw ParseError(a.pred + "/" + std::to_string(a.arity()) + " is not a declared action",
                         line, 1);
    };
    auto no_actions_in = [&](const std::vector<Literal>& ls, int line, const char* where) {
      for (const auto& l : ls)
        if (action_arity.count(l.atom.pred))
          throw ParseError(std::string("action literal not allowed in ") + where, line, 1);
    };
    auto no_strong_neg_actions = [&](const std::vector<Literal>& ls, int line) {
      for (const auto& l : ls)
        if (l.strong_neg && action_arity.count(l.atom.pred))
          throw ParseError("strong negation on action literals is not allowed", line, 1);
    };

    auto visit_items = [&](std::vector<Item>& items) {
      for (auto& it : items) {
        if (auto* r = std::get_if<Rule>(&it)) {
          check_head_fluent(r->head, r->line);
          no_actions_in(r->if_part, r->line, "the if part of a causation rule");
          no_strong_neg_actions(r->after_part, r->line);
        } else if (auto* m = std::get_if<MacroRule>(&it)) {
          if (m->kind == MacroRule::Kind::Nonexecutable) {
            check_action_atom(m->subject->atom, m->line);
            no_strong_neg_actions(m->if_part, m->line);
          } else {
            if (m->subject) check_head_fluent(m->subject, m->line);
            no_actions_in(m->if_part, m->line, "the if part");
            no_strong_neg_actions(m->after_part, m->line);
          }
        } else if (auto* e = std::get_if<ExecCond>(&it)) {
          check_action_atom(e->action, e->line);
          no_strong_neg_actions(e->if_part, e->line);
        }
      }
    };
    visit_items(prog_.initially);
    visit_items(prog_.always);
    if (prog_.query) {
      for (const auto& g : prog_.query->goals) {
        if (!fluent_arity.count(g.atom.pred) ||
            fluent_arity[g.atom.pred] != g.atom.arity())
          throw ParseError("goal literal " + g.atom.pred + " is not a declared fluent",
                           prog_.query->line, 1);
        for (const auto& t : g.atom.args)
          if (t.is_var())
            throw ParseError("goal literals must be ground", prog_.query->line, 1);
      }
    }
  }

  Program prog_;
  Lexer* lexer_ = nullptr;
  Token tok_, lookahead_;
  bool lookahead_valid_ = false;
  Section section_ = Section::Background;
  int anon_counter_ = 0;
  const std::set<std::string> reserved_words_ = {
      "caused", "if", "after", "not", "executable", "nonexecutable", "inertial",
      "default", "total", "forbidden", "requires", "costs", "where", "false",
      "time", "noConcurrency"};
};

}  // namespace

Program parse_program(const std::vector<SourceText>& sources) {
  Parser p;
  return p.parse(sources);
}

Program parse_program(const std::string& background, const std::string& plan) {
  return parse_program({{"background", background}, {"plan", plan}});
}

}  // namespace kcp
