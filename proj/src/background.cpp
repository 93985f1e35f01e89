#include "kcp/background.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace kcp {

namespace {

std::string rel_pred(const Literal& l) {
  return l.strong_neg ? "-" + l.atom.pred : l.atom.pred;
}

bool is_comparison(const std::string& p) {
  return p == "#lt" || p == "#le" || p == "#gt" || p == "#ge" || p == "#ne" || p == "#eq";
}

bool compare(const std::string& p, const GVal& a, const GVal& b) {
  if (p == "#eq") return a == b;
  if (p == "#ne") return !(a == b);
  if (p == "#lt") return a < b;
  if (p == "#le") return a < b || a == b;
  if (p == "#gt") return b < a;
  return b < a || a == b;  // #ge
}

// A database of relations; used for the model under construction and for the
// sets the alternating fixpoint checks negation against.
struct Db {
  std::map<std::pair<std::string, int>, Relation> rels;

  bool contains(const std::string& pred, const Tuple& t) const {
    auto it = rels.find({pred, static_cast<int>(t.size())});
    return it != rels.end() && it->second.count(t);
  }
  bool insert(const std::string& pred, const Tuple& t) {
    return rels[{pred, static_cast<int>(t.size())}].insert(t).second;
  }
  const Relation* get(const std::string& pred, int arity) const {
    auto it = rels.find({pred, arity});
    return it == rels.end() ? nullptr : &it->second;
  }
  size_t size() const {
    size_t n = 0;
    for (const auto& [k, r] : rels) n += r.size();
    return n;
  }
  bool operator==(const Db& o) const { return rels == o.rels; }
};

bool term_value(const Term& t, const Binding& b, const ConstPool& pool, GVal& out) {
  switch (t.kind) {
    case Term::Kind::Integer:
      out = GVal::integer(t.value);
      return true;
    case Term::Kind::Symbol: {
      int id = pool.lookup(t.name);
      if (id < 0) throw SemanticError("unknown constant " + t.name);
      out = GVal::symbol(id);
      return true;
    }
    case Term::Kind::Variable: {
      auto it = b.find(t.name);
      if (it == b.end()) return false;
      out = it->second;
      return true;
    }
  }
  return false;
}

int count_bound(const Atom& a, const Binding& b, const ConstPool& pool) {
  int n = 0;
  GVal v;
  for (const auto& t : a.args)
    if (term_value(t, b, pool, v)) n++;
  return n;
}

bool builtin_ready(const Atom& a, const Binding& b, const ConstPool& pool) {
  int n = count_bound(a, b, pool);
  if (a.pred == "#int") return true;
  if (is_comparison(a.pred)) return a.pred == "#eq" ? n >= 1 : n == 2;
  return n >= 2;  // #plus / #times
}

// Enumerates solutions of a built-in atom, extending the binding.
void solve_builtin(const Atom& a, Binding& b, const JoinSource& env,
                   const std::function<void()>& fn) {
  auto bind_and_call = [&](const Term& t, const GVal& v) {
    if (t.is_var()) {
      auto [it, fresh] = b.emplace(t.name, v);
      if (!fresh) {
        if (it->second == v) fn();
        return;
      }
      fn();
      b.erase(it);
    } else {
      GVal cur;
      term_value(t, b, *env.pool, cur);
      if (cur == v) fn();
    }
  };

  if (a.pred == "#int") {
    GVal v;
    if (term_value(a.args[0], b, *env.pool, v)) {
      if (v.is_int && v.num >= 0 && v.num <= env.int_bound) fn();
      return;
    }
    for (long long k = 0; k <= env.int_bound; ++k) {
      b[a.args[0].name] = GVal::integer(k);
      fn();
    }
    b.erase(a.args[0].name);
    return;
  }
  if (is_comparison(a.pred)) {
    GVal l, r;
    bool lb = term_value(a.args[0], b, *env.pool, l);
    bool rb = term_value(a.args[1], b, *env.pool, r);
    if (lb && rb) {
      if (compare(a.pred, l, r)) fn();
      return;
    }
    if (a.pred == "#eq") {
      if (lb) bind_and_call(a.args[1], l);
      else if (rb) bind_and_call(a.args[0], r);
      else throw SemanticError("unsafe use of = with both sides unbound");
      return;
    }
    throw SemanticError("unsafe use of comparison built-in");
  }
  // A = B + C  /  A = B * C
  GVal va, vb, vc;
  bool ba = term_value(a.args[0], b, *env.pool, va);
  bool bb = term_value(a.args[1], b, *env.pool, vb);
  bool bc = term_value(a.args[2], b, *env.pool, vc);
  bool plus = a.pred == "#plus";
  auto ok_int = [](bool bound, const GVal& v) { return !bound || v.is_int; };
  if (!ok_int(ba, va) || !ok_int(bb, vb) || !ok_int(bc, vc)) return;  // non-integer operand
  if (bb && bc) {
    long long res = plus ? vb.num + vc.num : vb.num * vc.num;
    if (env.bounded_results && !ba && res > env.int_bound) return;
    bind_and_call(a.args[0], GVal::integer(res));
    return;
  }
  if (ba && bb) {
    long long res;
    if (plus) {
      res = va.num - vb.num;
      if (res < 0) return;
    } else {
      if (vb.num == 0) {
        if (va.num != 0) return;
        throw SemanticError("unsafe use of multiplication: 0 * X leaves X unbound");
      }
      if (va.num % vb.num != 0) return;
      res = va.num / vb.num;
    }
    bind_and_call(a.args[2], GVal::integer(res));
    return;
  }
  if (ba && bc) {
    long long res;
    if (plus) {
      res = va.num - vc.num;
      if (res < 0) return;
    } else {
      if (vc.num == 0) {
        if (va.num != 0) return;
        throw SemanticError("unsafe use of multiplication: X * 0 leaves X unbound");
      }
      if (va.num % vc.num != 0) return;
      res = va.num / vc.num;
    }
    bind_and_call(a.args[1], GVal::integer(res));
    return;
  }
  throw SemanticError("unsafe use of arithmetic built-in: at most one position may be unbound");
}

// Orders body literals so generators run when their inputs are bound.
std::vector<int> plan_order(const std::vector<Literal>& lits, const Binding& pre,
                            const ConstPool& pool) {
  std::vector<int> order;
  std::vector<bool> done(lits.size(), false);
  // Simulated bound set: variable names.
  std::map<std::string, GVal> bound = pre;
  auto mark_bound = [&](const Atom& a) {
    for (const auto& t : a.args)
      if (t.is_var()) bound.emplace(t.name, GVal{});
  };
  for (size_t step = 0; step < lits.size(); ++step) {
    int pick = -1;
    // 1) ready built-ins and fully bound negated literals first
    for (size_t i = 0; i < lits.size() && pick < 0; ++i) {
      if (done[i]) continue;
      const auto& l = lits[i];
      if (l.atom.is_builtin() && !l.default_neg) {
        // #int with an unbound variable enumerates; treat as generator below
        if (l.atom.pred == "#int" && l.atom.args[0].is_var() &&
            !bound.count(l.atom.args[0].name))
          continue;
        if (builtin_ready(l.atom, bound, pool)) pick = static_cast<int>(i);
      } else if (l.default_neg || l.atom.is_builtin()) {
        bool all = true;
        for (const auto& t : l.atom.args)
          if (t.is_var() && !bound.count(t.name)) all = false;
        if (all) pick = static_cast<int>(i);
      }
    }
    // 2) positive relational literal with the fewest unbound variables
    if (pick < 0) {
      int best = -1, best_unbound = 1 << 30;
      for (size_t i = 0; i < lits.size(); ++i) {
        if (done[i]) continue;
        const auto& l = lits[i];
        if (l.default_neg || l.atom.is_builtin()) continue;
        int ub = 0;
        for (const auto& t : l.atom.args)
          if (t.is_var() && !bound.count(t.name)) ub++;
        if (ub < best_unbound) {
          best_unbound = ub;
          best = static_cast<int>(i);
        }
      }
      pick = best;
    }
    // 3) enumerating #int as a last resort
    if (pick < 0) {
      for (size_t i = 0; i < lits.size() && pick < 0; ++i)
        if (!done[i] && lits[i].atom.pred == "#int" && !lits[i].default_neg)
          pick = static_cast<int>(i);
    }
    if (pick < 0) throw SemanticError("unsafe rule body: no literal can be evaluated next");
    done[pick] = true;
    if (!lits[pick].default_neg) mark_bound(lits[pick].atom);
    order.push_back(pick);
  }
  return order;
}

void join_rec(const std::vector<Literal>& lits, const std::vector<int>& order, size_t k,
              Binding& b, const JoinSource& env, const std::function<void()>& fn) {
  if (k == order.size()) {
    fn();
    return;
  }
  const Literal& l = lits[order[k]];
  auto next = [&] { join_rec(lits, order, k + 1, b, env, fn); };

  if (l.atom.is_builtin()) {
    if (l.default_neg) {
      // ground built-in under `not`: succeeds when the built-in is false
      Binding tmp = b;
      bool truth = false;
      solve_builtin(l.atom, tmp, env, [&] { truth = true; });
      if (!truth) next();
      return;
    }
    solve_builtin(l.atom, b, env, next);
    return;
  }

  std::string pred = rel_pred(l);
  int arity = l.atom.arity();
  if (l.default_neg) {
    Tuple t(arity);
    for (int i = 0; i < arity; ++i)
      if (!term_value(l.atom.args[i], b, *env.pool, t[i]))
        throw SemanticError("unsafe negated literal " + to_string(l));
    if (!env.neg(pred, t)) next();
    return;
  }
  const Relation* rel = env.db(pred, arity);
  if (!rel) return;
  // match against every tuple, binding unbound variables
  for (const auto& t : *rel) {
    std::vector<std::string> newly;
    bool ok = true;
    for (int i = 0; i < arity && ok; ++i) {
      const Term& a = l.atom.args[i];
      GVal v;
      if (term_value(a, b, *env.pool, v)) {
        if (!(v == t[i])) ok = false;
      } else {
        b[a.name] = t[i];
        newly.push_back(a.name);
      }
    }
    if (ok) next();
    for (const auto& n : newly) b.erase(n);
  }
}



// Least fixpoint of the rules with default negation checked against `neg`.
Db least_fixpoint(const std::vector<BgRule>& rules, const Db* neg, const ConstPool& pool,
                  long long int_bound) {
  Db db;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& r : rules) {
      JoinSource env{[&db](const std::string& p, int a) { return db.get(p, a); },
                  [neg](const std::string& p, const Tuple& t) {
                    return neg && neg->contains(p, t);
                  },
                  &pool, int_bound, /*bounded_results=*/true};
      Binding b;
      std::vector<std::pair<std::string, Tuple>> derived;
      join_literals(env, r.body, b, [&] {
        Tuple t(r.head.atom.arity());
        for (int i = 0; i < r.head.atom.arity(); ++i)
          if (!term_value(r.head.atom.args[i], b, pool, t[i]))
            throw SemanticError("unsafe head variable in " + to_string(r));
        derived.emplace_back(rel_pred(r.head), std::move(t));
      });
      for (auto& [p, t] : derived)
        if (db.insert(p, t)) changed = true;
    }
  }
  return db;
}

// Predicate dependency analysis for the stratified fast path.
bool is_stratified(const std::vector<BgRule>& rules,
                   std::vector<std::vector<const BgRule*>>& strata) {
  std::map<std::string, int> idx;
  auto id_of = [&](const std::string& p) {
    auto [it, fresh] = idx.emplace(p, static_cast<int>(idx.size()));
    return it->second;
  };
  for (const auto& r : rules) {
    id_of(rel_pred(r.head));
    for (const auto& l : r.body)
      if (!l.atom.is_builtin()) id_of(rel_pred(l));
  }
  int n = static_cast<int>(idx.size());
  // stratum[p] computed by iterating constraints:
  //   body positive q: stratum(p) >= stratum(q); negated: stratum(p) >= stratum(q)+1
  std::vector<int> stratum(n, 0);
  for (int round = 0; round <= n + 1; ++round) {
    bool changed = false;
    for (const auto& r : rules) {
      int hp = id_of(rel_pred(r.head));
      for (const auto& l : r.body) {
        if (l.atom.is_builtin()) continue;
        int bp = id_of(rel_pred(l));
        int need = stratum[bp] + (l.default_neg ? 1 : 0);
        if (stratum[hp] < need) {
          stratum[hp] = need;
          changed = true;
        }
      }
    }
    if (!changed) break;
    if (round == n + 1) return false;  // unbounded growth: negative cycle
  }
  int max_s = 0;
  for (int s : stratum) max_s = std::max(max_s, s);
  strata.assign(max_s + 1, {});
  for (const auto& r : rules) strata[stratum[id_of(rel_pred(r.head))]].push_back(&r);
  return true;
}

void intern_terms(ConstPool& pool, const std::vector<Term>& ts) {
  for (const auto& t : ts)
    if (t.kind == Term::Kind::Symbol) pool.intern(t.name);
}

void intern_literals(ConstPool& pool, const std::vector<Literal>& ls) {
  for (const auto& l : ls) intern_terms(pool, l.atom.args);
}

void intern_program(ConstPool& pool, const Program& p) {
  for (const auto& r : p.background) {
    intern_terms(pool, r.head.atom.args);
    intern_literals(pool, r.body);
  }
  for (const auto& d : p.fluents) intern_literals(pool, d.requires_);
  for (const auto& d : p.actions) {
    intern_literals(pool, d.requires_);
    intern_literals(pool, d.where);
  }
  auto visit = [&](const std::vector<Item>& items) {
    for (const auto& it : items) {
      if (auto* r = std::get_if<Rule>(&it)) {
        if (r->head) intern_terms(pool, r->head->atom.args);
        intern_literals(pool, r->if_part);
        intern_literals(pool, r->after_part);
      } else if (auto* m = std::get_if<MacroRule>(&it)) {
        if (m->subject) intern_terms(pool, m->subject->atom.args);
        intern_literals(pool, m->if_part);
        intern_literals(pool, m->after_part);
      } else {
        const auto& e = std::get<ExecCond>(it);
        intern_terms(pool, e.action.args);
        intern_literals(pool, e.if_part);
      }
    }
  };
  visit(p.initially);
  visit(p.always);
  if (p.query) intern_literals(pool, p.query->goals);
}

}  // namespace

void join_literals(const JoinSource& src, const std::vector<Literal>& lits, Binding& binding,
                   const std::function<void()>& fn) {
  std::vector<int> order = plan_order(lits, binding, *src.pool);
  join_rec(lits, order, 0, binding, src, fn);
}

bool BackgroundModel::contains(const std::string& pred, const Tuple& args) const {
  auto it = rels_.find({pred, static_cast<int>(args.size())});
  return it != rels_.end() && it->second.count(args);
}

const Relation* BackgroundModel::relation(const std::string& pred, int arity) const {
  auto it = rels_.find({pred, arity});
  return it == rels_.end() ? nullptr : &it->second;
}

GVal BackgroundModel::to_gval(const Term& t) const {
  if (t.kind == Term::Kind::Integer) return GVal::integer(t.value);
  if (t.kind == Term::Kind::Symbol) {
    int id = pool_.lookup(t.name);
    if (id < 0) throw SemanticError("unknown constant " + t.name);
    return GVal::symbol(id);
  }
  throw SemanticError("non-ground term " + t.name);
}

std::string BackgroundModel::to_string(const GVal& v) const {
  return v.is_int ? std::to_string(v.num) : pool_.name(v.sym);
}

std::string BackgroundModel::atom_to_string(const std::string& pred, const Tuple& args) const {
  std::string s = pred;
  if (!args.empty()) {
    s += '(';
    for (size_t i = 0; i < args.size(); ++i) {
      if (i) s += ',';
      s += to_string(args[i]);
    }
    s += ')';
  }
  return s;
}

bool BackgroundModel::holds(const Atom& a) const {
  for (const auto& t : a.args)
    if (t.is_var()) throw SemanticError("holds: non-ground atom " + a.pred);
  if (a.is_builtin()) {
    GVal v0 = to_gval(a.args[0]);
    if (a.pred == "#int") return v0.is_int && v0.num >= 0 && v0.num <= int_bound_;
    GVal v1 = to_gval(a.args[1]);
    if (is_comparison(a.pred)) return compare(a.pred, v0, v1);
    GVal v2 = to_gval(a.args[2]);
    if (!v0.is_int || !v1.is_int || !v2.is_int) return false;
    long long res = a.pred == "#plus" ? v1.num + v2.num : v1.num * v2.num;
    return v0.num == res;
  }
  Tuple t;
  t.reserve(a.args.size());
  for (const auto& arg : a.args) t.push_back(to_gval(arg));
  return contains(a.pred, t);
}

BackgroundModel evaluate_background(const std::vector<BgRule>& rules, long long int_bound,
                                    const Program* full_program) {
  if (int_bound < 0) throw SemanticError("integer bound must be non-negative");
  BackgroundModel m;
  m.int_bound_ = int_bound;
  if (full_program) intern_program(m.pool_, *full_program);
  for (const auto& r : rules) {
    intern_terms(m.pool_, r.head.atom.args);
    intern_literals(m.pool_, r.body);
  }

  Db model;
  std::vector<std::vector<const BgRule*>> strata;
  if (is_stratified(rules, strata)) {
    for (const auto& level : strata) {
      std::vector<BgRule> level_rules;
      for (const auto* r : level) level_rules.push_back(*r);
      // negation refers to lower strata, already complete in `model`
      Db next = least_fixpoint(level_rules, &model, m.pool_, int_bound);
      for (const auto& [k, rel] : model.rels)
        for (const auto& t : rel) next.rels[k].insert(t);
      model = std::move(next);
    }
  } else {
    // alternating fixpoint: T underestimates, U overestimates
    Db under;
    Db over = least_fixpoint(rules, nullptr, m.pool_, int_bound);
    for (;;) {
      Db t = least_fixpoint(rules, &over, m.pool_, int_bound);
      Db u = least_fixpoint(rules, &t, m.pool_, int_bound);
      bool stable = t == under && u == over;
      under = std::move(t);
      over = std::move(u);
      if (stable) break;
    }
    if (!(under == over)) {
      // report one undefined atom
      for (const auto& [k, rel] : over.rels)
        for (const auto& t : rel) {
          if (!under.contains(k.first, t))
            throw SemanticError(
                "background knowledge has no total well-founded model; undefined: " +
                m.atom_to_string(k.first, t));
        }
    }
    model = std::move(under);
  }

  // consistency of strong negation
  for (const auto& [k, rel] : model.rels) {
    if (k.first.size() > 1 && k.first[0] == '-') {
      for (const auto& t : rel)
        if (model.contains(k.first.substr(1), t))
          throw SemanticError("inconsistent background knowledge: both " +
                              m.atom_to_string(k.first.substr(1), t) + " and its negation hold");
    }
  }
  m.rels_ = std::move(model.rels);
  return m;
}

void match_type_literals(const BackgroundModel& m, const std::vector<Literal>& lits,
                         Binding& binding, const std::function<void(const Binding&)>& fn) {
  JoinSource env{[&m](const std::string& p, int a) { return m.relation(p, a); },
                 [&m](const std::string& p, const Tuple& t) { return m.contains(p, t); },
                 &m.pool(), m.int_bound(), /*bounded_results=*/false};
  join_literals(env, lits, binding, [&] { fn(binding); });
}

}  // namespace kcp
