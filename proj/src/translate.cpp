#include "kcp/translate.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace kcp {

namespace {

std::string lp_atom_text(const LPAtom& a) {
  Atom plain{a.pred, a.args};
  return (a.strong_neg ? "-" : "") + to_string(plain);
}

std::string lp_body_text(const std::vector<LPLit>& body) {
  std::string s;
  for (size_t i = 0; i < body.size(); ++i) {
    if (i) s += ", ";
    if (body[i].default_neg) s += "not ";
    s += lp_atom_text(body[i].atom);
  }
  return s;
}

struct Translator {
  const Program& p;
  const BackgroundModel& m;
  bool minimize_variant;
  LPProgram out;

  std::map<std::string, const FluentDecl*> fdecl;
  std::map<std::string, const ActionDecl*> adecl;

  explicit Translator(const Program& prog, const BackgroundModel& model, bool minimize)
      : p(prog), m(model), minimize_variant(minimize) {
    for (const auto& d : p.fluents) fdecl[d.head.pred] = &d;
    for (const auto& d : p.actions) adecl[d.head.pred] = &d;
  }

  bool is_fluent(const std::string& n) const { return fdecl.count(n) != 0; }
  bool is_action(const std::string& n) const { return adecl.count(n) != 0; }
  bool is_dynamic(const std::string& n) const { return is_fluent(n) || is_action(n); }

  static void collect_vars(const std::vector<Literal>& ls, std::set<std::string>& used) {
    for (const auto& l : ls)
      for (const auto& t : l.atom.args)
        if (t.is_var()) used.insert(t.name);
  }

  static std::string fresh(const std::string& base, std::set<std::string>& used) {
    std::string n = base;
    for (int i = 2; used.count(n); ++i) n = base + std::to_string(i);
    used.insert(n);
    return n;
  }

  LPAtom stamped(const Literal& l, const Term& stamp) const {
    LPAtom a{l.strong_neg, l.atom.pred, l.atom.args};
    a.args.push_back(stamp);
    return a;
  }

  LPAtom plain(const Literal& l) const { return {l.strong_neg, l.atom.pred, l.atom.args}; }

  // requires-part of the atom's declaration, parameters substituted by the
  // atom's arguments, leftover declaration variables renamed fresh
  void add_type_info(const Atom& atom, std::set<std::string>& used,
                     std::vector<LPLit>& body, std::set<std::string>& seen_atoms) const {
    const std::vector<Literal>* req = nullptr;
    const Atom* head = nullptr;
    if (auto it = fdecl.find(atom.pred); it != fdecl.end()) {
      req = &it->second->requires_;
      head = &it->second->head;
    } else if (auto it2 = adecl.find(atom.pred); it2 != adecl.end()) {
      req = &it2->second->requires_;
      head = &it2->second->head;
    } else {
      return;
    }
    std::string key = to_string(atom);
    if (!seen_atoms.insert(key).second) return;
    std::map<std::string, Term> subst;
    for (size_t i = 0; i < head->args.size(); ++i) subst[head->args[i].name] = atom.args[i];
    std::map<std::string, Term> extra;  // renamed existential declaration variables
    for (const auto& rl : *req) {
      LPLit ll;
      ll.default_neg = rl.default_neg;
      ll.atom.strong_neg = rl.strong_neg;
      ll.atom.pred = rl.atom.pred;
      for (const auto& t : rl.atom.args) {
        if (!t.is_var()) {
          ll.atom.args.push_back(t);
          continue;
        }
        if (auto it = subst.find(t.name); it != subst.end()) {
          ll.atom.args.push_back(it->second);
        } else {
          auto [eit, isnew] = extra.emplace(t.name, Term{});
          if (isnew) eit->second = Term::var(fresh(t.name, used));
          ll.atom.args.push_back(eit->second);
        }
      }
      // drop duplicates (several atoms over one person yield one person(X))
      bool dup = false;
      for (const auto& b : body)
        if (!b.default_neg && b.atom.strong_neg == ll.atom.strong_neg &&
            b.atom.pred == ll.atom.pred && b.atom.args == ll.atom.args)
          dup = true;
      if (!dup) body.push_back(std::move(ll));
    }
  }

  void translate_rule(const Rule& r, bool initially) {
    std::set<std::string> used;
    collect_vars(r.if_part, used);
    collect_vars(r.after_part, used);
    if (r.head) collect_vars({*r.head}, used);

    bool dynamic = !r.after_part.empty();
    Term t_now, t_prev;
    std::string tv0, tv1;
    if (initially) {
      t_now = Term::integer(0);
    } else if (dynamic) {
      tv0 = fresh("T0", used);
      tv1 = fresh("T1", used);
      t_prev = Term::var(tv0);
      t_now = Term::var(tv1);
    } else {
      tv0 = fresh("T", used);
      t_now = Term::var(tv0);
    }

    LPRule lr;
    std::set<std::string> seen_atoms;
    std::vector<LPLit> type_info;
    if (r.head) {
      lr.head.push_back(stamped(*r.head, t_now));
      add_type_info(r.head->atom, used, type_info, seen_atoms);
    }
    for (const auto& l : r.after_part) {
      LPLit ll;
      ll.default_neg = l.default_neg;
      ll.atom = is_dynamic(l.atom.pred) ? stamped(l, t_prev) : plain(l);
      lr.body.push_back(ll);
      if (is_dynamic(l.atom.pred)) add_type_info(l.atom, used, type_info, seen_atoms);
    }
    for (const auto& l : r.if_part) {
      LPLit ll;
      ll.default_neg = l.default_neg;
      ll.atom = is_dynamic(l.atom.pred) ? stamped(l, t_now) : plain(l);
      lr.body.push_back(ll);
      if (is_dynamic(l.atom.pred)) add_type_info(l.atom, used, type_info, seen_atoms);
    }
    lr.body.insert(lr.body.end(), type_info.begin(), type_info.end());
    if (!initially) {
      if (dynamic) {
        lr.body.push_back({false, {false, "next", {Term::var(tv0), Term::var(tv1)}}});
      } else {
        lr.body.push_back({false, {false, "time", {Term::var(tv0)}}});
      }
    }
    out.rules.push_back(std::move(lr));
  }

  void translate_exec(const ExecCond& e) {
    std::set<std::string> used;
    collect_vars(e.if_part, used);
    for (const auto& t : e.action.args)
      if (t.is_var()) used.insert(t.name);
    std::string tv0 = fresh("T0", used);
    std::string tv1 = fresh("T1", used);
    Term t0 = Term::var(tv0);

    std::vector<LPLit> body;
    std::set<std::string> seen_atoms;
    std::vector<LPLit> type_info;
    add_type_info(e.action, used, type_info, seen_atoms);
    for (const auto& l : e.if_part) {
      LPLit ll;
      ll.default_neg = l.default_neg;
      ll.atom = is_dynamic(l.atom.pred) ? stamped(l, t0) : plain(l);
      body.push_back(ll);
      if (is_dynamic(l.atom.pred)) add_type_info(l.atom, used, type_info, seen_atoms);
    }
    body.insert(body.end(), type_info.begin(), type_info.end());
    body.push_back({false, {false, "next", {Term::var(tv0), Term::var(tv1)}}});

    LPAtom pos{false, e.action.pred, e.action.args};
    pos.args.push_back(t0);
    LPAtom neg = pos;
    neg.strong_neg = true;
    if (!minimize_variant) {
      LPRule lr;
      lr.head = {pos, neg};
      lr.body = body;
      out.rules.push_back(std::move(lr));
    } else {
      // guess via unstratified negation
      LPRule r1;
      r1.head = {pos};
      r1.body = body;
      r1.body.push_back({true, neg});
      out.rules.push_back(std::move(r1));
      LPRule r2;
      r2.head = {neg};
      r2.body = body;
      r2.body.push_back({true, pos});
      out.rules.push_back(std::move(r2));
    }
  }

  void translate_goal() {
    const Query& q = *p.query;
    LPRule gr;
    gr.head.push_back({false, "goal_reached", {}});
    for (const auto& g : q.goals) {
      LPLit ll;
      ll.default_neg = g.default_neg;
      ll.atom = stamped(g, Term::integer(q.plan_length));
      gr.body.push_back(ll);
    }
    out.rules.push_back(std::move(gr));
    LPRule cons;
    cons.body.push_back({true, {false, "goal_reached", {}}});
    out.rules.push_back(std::move(cons));
  }

  Term subst_time(const Term& t, const Term& u) const {
    return t.is_time_var() ? u : t;
  }

  void translate_costs() {
    int max_arity = 0;
    if (minimize_variant)
      for (const auto& d : p.actions) max_arity = std::max(max_arity, d.head.arity());

    bool any = false;
    for (const auto& d : p.actions) {
      if (!d.has_cost) continue;
      any = true;
      std::set<std::string> used;
      for (const auto& t : d.head.args) used.insert(t.name);
      collect_vars(d.requires_, used);
      collect_vars(d.where, used);
      if (d.cost.is_var()) used.insert(d.cost.name);
      std::string tv = fresh("T", used);
      std::string uv = fresh("U", used);
      Term tT = Term::var(tv), tU = Term::var(uv);

      bool mentions_time = d.cost.is_time_var();
      for (const auto& l : d.where)
        for (const auto& t : l.atom.args)
          if (t.is_time_var()) mentions_time = true;

      Term weight = subst_time(d.cost, tU);
      LPRule cr;
      LPAtom head{false, "cost_" + d.head.pred, d.head.args};
      head.args.push_back(tT);
      head.args.push_back(weight);
      if (!minimize_variant) {
        cr.head = {head};
        LPAtom occ{false, d.head.pred, d.head.args};
        occ.args.push_back(tT);
        cr.body.push_back({false, occ});
      } else {
        LPAtom chead{false, "cost", {}};
        chead.args.push_back(Term::sym(d.head.pred));
        for (const auto& a : d.head.args) chead.args.push_back(a);
        for (int i = d.head.arity(); i < max_arity; ++i) chead.args.push_back(Term::integer(0));
        chead.args.push_back(tT);
        chead.args.push_back(weight);
        cr.head = {chead};
      }
      for (const auto& l : d.requires_) {
        cr.body.push_back({l.default_neg, plain(l)});
      }
      for (const auto& l : d.where) {
        Literal lw = l;
        for (auto& t : lw.atom.args) t = subst_time(t, tU);
        cr.body.push_back({lw.default_neg, plain(lw)});
      }
      if (mentions_time)
        cr.body.push_back({false, {false, "#plus", {tU, tT, Term::integer(1)}}});
      if (minimize_variant) cr.body.push_back({false, {false, "time", {tT}}});
      out.cost_rule_indices.push_back(out.rules.size());
      out.rules.push_back(std::move(cr));

      if (!minimize_variant) {
        WeakConstraint wc;
        Term wvar = weight.is_var() ? weight : Term::var(fresh("C", used));
        LPAtom watom{false, "cost_" + d.head.pred, d.head.args};
        watom.args.push_back(tT);
        watom.args.push_back(wvar);
        wc.body.push_back({false, watom});
        wc.weight = wvar;
        out.weak.push_back(std::move(wc));
      } else {
        LPRule occ_rule;
        LPAtom ohead{false, "occurs", {}};
        ohead.args.push_back(Term::sym(d.head.pred));
        for (const auto& a : d.head.args) ohead.args.push_back(a);
        for (int i = d.head.arity(); i < max_arity; ++i) ohead.args.push_back(Term::integer(0));
        ohead.args.push_back(tT);
        occ_rule.head = {ohead};
        LPAtom act{false, d.head.pred, d.head.args};
        act.args.push_back(tT);
        occ_rule.body.push_back({false, act});
        for (const auto& l : d.requires_) occ_rule.body.push_back({l.default_neg, plain(l)});
        out.rules.push_back(std::move(occ_rule));
      }
    }
    if (minimize_variant && any) {
      std::string vars;
      for (int i = 1; i <= max_arity; ++i) vars += ", X" + std::to_string(i);
      out.directives.push_back("minimize[occurs(A" + vars + ", T) : cost(A" + vars +
                               ", T, C) = C].");
    }
  }

  void no_concurrency_constraints() {
    if (!p.no_concurrency) return;
    struct Inst {
      std::string pred;
      Tuple args;
    };
    std::vector<Inst> insts;
    for (const auto& d : p.actions)
      for (const auto& t : legal_instances(m, d.head, d.requires_))
        insts.push_back({d.head.pred, t});
    for (size_t i = 0; i < insts.size(); ++i)
      for (size_t j = i + 1; j < insts.size(); ++j) {
        LPRule c;
        for (const auto& inst : {insts[i], insts[j]}) {
          LPAtom a{false, inst.pred, {}};
          for (const auto& v : inst.args)
            a.args.push_back(v.is_int ? Term::integer(v.num) : Term::sym(m.pool().name(v.sym)));
          a.args.push_back(Term::var("T"));
          c.body.push_back({false, a});
        }
        out.rules.push_back(std::move(c));
      }
  }

  LPProgram run() {
    for (const auto& r : p.background) out.background_text.push_back(to_string(r));
    if (!p.query) throw SemanticError("translation requires a goal query");
    int l = p.query->plan_length;
    for (int i = 0; i <= l; ++i) {
      LPRule f;
      f.head.push_back({false, "time", {Term::integer(i)}});
      out.rules.push_back(std::move(f));
    }
    for (int i = 0; i < l; ++i) {
      LPRule f;
      f.head.push_back({false, "next", {Term::integer(i), Term::integer(i + 1)}});
      out.rules.push_back(std::move(f));
    }
    for (const auto& it : p.initially) {
      if (auto* r = std::get_if<Rule>(&it)) translate_rule(*r, true);
      else throw SemanticError("translate: program has unexpanded macros");
    }
    for (const auto& it : p.always) {
      if (auto* r = std::get_if<Rule>(&it)) translate_rule(*r, false);
      else if (auto* e = std::get_if<ExecCond>(&it)) translate_exec(*e);
      else throw SemanticError("translate: program has unexpanded macros");
    }
    no_concurrency_constraints();
    translate_goal();
    translate_costs();
    return std::move(out);
  }
};

}  // namespace

std::string LPProgram::text() const {
  std::ostringstream os;
  if (!background_text.empty()) {
    os << "% background knowledge\n";
    for (const auto& r : background_text) os << r << '\n';
    os << '\n';
  }
  for (const auto& r : rules) {
    for (size_t i = 0; i < r.head.size(); ++i) {
      if (i) os << " v ";
      os << lp_atom_text(r.head[i]);
    }
    if (!r.body.empty()) {
      if (!r.head.empty()) os << " ";
      os << ":- " << lp_body_text(r.body);
    }
    os << ".\n";
  }
  for (const auto& wc : weak) {
    os << ":~ " << lp_body_text(wc.body) << ". [" << to_string(wc.weight) << ":]\n";
  }
  for (const auto& d : directives) os << d << '\n';
  return os.str();
}

LPProgram translate_lpw(const Program& p, const BackgroundModel& m) {
  return Translator(p, m, /*minimize=*/false).run();
}

LPProgram translate_minimize(const Program& p, const BackgroundModel& m) {
  return Translator(p, m, /*minimize=*/true).run();
}

TrajectoryImage image_of(const GroundDomain& gd, const std::vector<ActionSet>& steps,
                         const Trajectory& witness) {
  TrajectoryImage img;
  for (size_t j = 0; j < witness.states.size(); ++j) {
    witness.states[j].for_each([&](int code) {
      auto [pred, args] = gd.fluent_atom(flit_id(code));
      Tuple t = args;
      t.push_back(GVal::integer(static_cast<long long>(j)));
      img.atoms.emplace(flit_neg(code) ? "-" + pred : pred, std::move(t));
    });
  }
  for (size_t j = 0; j < steps.size(); ++j) {
    for (int a : steps[j].ids) {
      auto [pred, args] = gd.action_atom(a);
      Tuple t = args;
      t.push_back(GVal::integer(static_cast<long long>(j)));  // a(t, j-1), 1-based step j+1
      img.atoms.emplace(pred, std::move(t));
    }
  }
  return img;
}

namespace {

// image atoms grouped into relations for join evaluation
std::map<std::pair<std::string, int>, Relation> image_relations(const TrajectoryImage& img) {
  std::map<std::pair<std::string, int>, Relation> rels;
  for (const auto& [pred, t] : img.atoms) rels[{pred, static_cast<int>(t.size())}].insert(t);
  return rels;
}

std::vector<Literal> to_literals(const std::vector<LPLit>& body) {
  std::vector<Literal> ls;
  for (const auto& l : body)
    ls.push_back(Literal{l.atom.strong_neg, l.default_neg, Atom{l.atom.pred, l.atom.args}});
  return ls;
}

}  // namespace

long long weak_cost_of_image(const LPProgram& lp, const BackgroundModel& m,
                             const TrajectoryImage& img) {
  auto img_rels = image_relations(img);
  std::map<std::pair<std::string, int>, Relation> derived;

  auto db_lookup = [&](const std::string& pred, int arity) -> const Relation* {
    if (auto it = derived.find({pred, arity}); it != derived.end()) return &it->second;
    if (auto it = img_rels.find({pred, arity}); it != img_rels.end()) return &it->second;
    return m.relation(pred, arity);
  };
  auto neg_lookup = [&](const std::string& pred, const Tuple& t) {
    int ar = static_cast<int>(t.size());
    if (auto it = derived.find({pred, ar}); it != derived.end() && it->second.count(t))
      return true;
    if (img.contains(pred, t)) return true;
    return m.contains(pred, t);
  };
  JoinSource src{db_lookup, neg_lookup, &m.pool(), m.int_bound(), /*bounded_results=*/false};

  // derive the cost atoms the translation defines
  for (size_t idx : lp.cost_rule_indices) {
    const LPRule& r = lp.rules[idx];
    auto body = to_literals(r.body);
    Binding b;
    join_literals(src, body, b, [&] {
      const LPAtom& h = r.head[0];
      Tuple t;
      for (const auto& a : h.args) {
        if (a.is_var()) {
          auto it = b.find(a.name);
          if (it == b.end()) throw SemanticError("unbound cost head variable " + a.name);
          t.push_back(it->second);
        } else {
          t.push_back(m.to_gval(a));
        }
      }
      derived[{h.pred, static_cast<int>(t.size())}].insert(std::move(t));
    });
  }

  long long total = 0;
  for (const auto& wc : lp.weak) {
    auto body = to_literals(wc.body);
    std::set<std::vector<std::pair<std::string, GVal>>> seen;
    Binding b;
    join_literals(src, body, b, [&] {
      std::vector<std::pair<std::string, GVal>> key(b.begin(), b.end());
      if (!seen.insert(key).second) return;
      long long w;
      if (wc.weight.kind == Term::Kind::Integer) {
        w = wc.weight.value;
      } else {
        auto it = b.find(wc.weight.name);
        if (it == b.end()) throw SemanticError("unbound weak constraint weight");
        if (!it->second.is_int)
          throw SemanticError("non-integer weak constraint violation value");
        w = it->second.num;
      }
      total += w;
    });
  }
  return total;
}

int parse_lp_text(const std::string& text) {
  int statements = 0;
  size_t pos = 0, line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("emitted program: " + msg, static_cast<int>(line_no), 1);
  };
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    line_no++;
    // trim
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line[0] == '%') continue;

    if (line.rfind("minimize[", 0) == 0) {
      if (line.back() != '.' || line[line.size() - 2] != ']') fail("malformed minimize");
      statements++;
      continue;
    }
    bool weak = line.rfind(":~", 0) == 0;
    if (weak) {
      size_t lb = line.rfind('[');
      size_t rb = line.rfind(']');
      if (lb == std::string::npos || rb == std::string::npos || rb < lb ||
          line.find(':', lb) == std::string::npos)
        fail("malformed weak constraint weight");
      line = line.substr(2, line.rfind('.', lb) - 2);
    } else {
      if (line.back() != '.') fail("statement does not end with '.'");
      line.pop_back();
    }
    // structural check: balanced parentheses, non-empty atoms around
    // separators v / :- / ,
    int depth = 0;
    bool any_tok = false;
    for (size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (c == '(') depth++;
      else if (c == ')') {
        if (--depth < 0) fail("unbalanced ')'");
      } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        any_tok = true;
      }
    }
    if (depth != 0) fail("unbalanced '('");
    if (!any_tok && !line.empty()) fail("no atoms in statement");
    statements++;
  }
  return statements;
}

}  // namespace kcp
