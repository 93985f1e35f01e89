#include "kcp/ground.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace kcp {

namespace {

struct DeclSets {
  std::set<std::string> fluents, actions;
  bool is_dyn(const std::string& p) const { return fluents.count(p) || actions.count(p); }
};

Tuple bind_args(const Atom& a, const Binding& b, const BackgroundModel& m) {
  Tuple t;
  t.reserve(a.args.size());
  for (const auto& arg : a.args) {
    if (arg.is_var()) {
      auto it = b.find(arg.name);
      if (it == b.end()) throw SemanticError("unbound variable " + arg.name);
      t.push_back(it->second);
    } else {
      t.push_back(m.to_gval(arg));
    }
  }
  return t;
}

}  // namespace

std::string ground_atom_name(const BackgroundModel& m, const std::string& pred,
                             const Tuple& args) {
  return m.atom_to_string(pred, args);
}

std::vector<Tuple> legal_instances(const BackgroundModel& m, const Atom& head,
                                   const std::vector<Literal>& requires_part) {
  std::set<Tuple> out;
  Binding b;
  match_type_literals(m, requires_part, b, [&](const Binding& bb) {
    out.insert(bind_args(head, bb, m));
  });
  return {out.begin(), out.end()};
}

int GroundDomain::find_fluent(const std::string& name) const {
  auto it = fluent_ids_.find(name);
  return it == fluent_ids_.end() ? -1 : it->second;
}

int GroundDomain::find_action(const std::string& name) const {
  auto it = action_ids_.find(name);
  return it == action_ids_.end() ? -1 : it->second;
}

bool GroundDomain::cost_defined(int action, int time) const {
  const CostEntry& e = costs_[action];
  if (!e.costed) return true;
  if (!e.time_dependent) return e.const_defined;
  if (time < 1 || time > static_cast<int>(e.by_time.size())) return false;
  return e.defined[time - 1];
}

long long GroundDomain::cost(int action, int time) const {
  const CostEntry& e = costs_[action];
  if (!e.costed) return 0;
  if (!e.time_dependent) {
    if (!e.const_defined)
      throw SemanticError("undefined cost of " + action_names_[action] +
                          " (domain is not well-defined)");
    return e.const_cost;
  }
  if (time < 1 || time > static_cast<int>(e.by_time.size()))
    throw SemanticError("cost of " + action_names_[action] + " requested beyond horizon");
  if (!e.defined[time - 1])
    throw SemanticError("undefined cost of " + action_names_[action] + " at time " +
                        std::to_string(time) + " (domain is not well-defined)");
  return e.by_time[time - 1];
}

long long action_cost(const GroundDomain& gd, int action_id, int time) {
  return gd.cost(action_id, time);
}

std::vector<Diagnostic> check_well_defined(const GroundDomain& gd, int horizon) {
  (void)horizon;
  return gd.wd_diagnostics();
}

GroundDomain ground(const Program& p, const BackgroundModel& m, int plan_length,
                    const GroundOptions& opts) {
  GroundDomain gd;
  gd.bg_ = &m;
  gd.plan_length_ = plan_length;
  gd.no_concurrency_ = p.no_concurrency;

  DeclSets decls;
  for (const auto& d : p.fluents) decls.fluents.insert(d.head.pred);
  for (const auto& d : p.actions) decls.actions.insert(d.head.pred);

  // --- legal instances, in declaration order then tuple order ---------------
  std::map<std::pair<std::string, int>, Relation> dyn_rels;
  auto add_instances = [&](const Atom& head, const std::vector<Literal>& req, bool is_fluent) {
    auto tuples = legal_instances(m, head, req);
    for (const auto& t : tuples) {
      std::string name = ground_atom_name(m, head.pred, t);
      if (is_fluent) {
        if (gd.fluent_ids_.emplace(name, gd.fluent_count()).second) {
          gd.fluent_names_.push_back(name);
          gd.fluent_structs_.emplace_back(head.pred, t);
        }
      } else {
        if (gd.action_ids_.emplace(name, gd.action_count()).second) {
          gd.action_names_.push_back(name);
          gd.action_structs_.emplace_back(head.pred, t);
        }
      }
      dyn_rels[{head.pred, head.arity()}].insert(t);
    }
  };
  for (const auto& d : p.fluents) add_instances(d.head, d.requires_, true);
  for (const auto& d : p.actions) add_instances(d.head, d.requires_, false);
  gd.costs_.resize(gd.action_count());

  // --- cost table ------------------------------------------------------------
  for (const auto& d : p.actions) {
    if (!d.has_cost) continue;
    gd.any_costs_ = true;
    bool time_dep = d.cost.is_time_var();
    for (const auto& l : d.where)
      for (const auto& t : l.atom.args)
        if (t.is_time_var()) time_dep = true;

    // witness substitutions: requires matches grouped by instance tuple
    std::map<Tuple, std::vector<Binding>> req_matches;
    {
      Binding b;
      match_type_literals(m, d.requires_, b, [&](const Binding& bb) {
        req_matches[bind_args(d.head, bb, m)].push_back(bb);
      });
    }
    auto val_of = [&](const Binding& b, long long time) -> long long {
      if (d.cost.kind == Term::Kind::Integer) return d.cost.value;
      if (d.cost.is_time_var()) return time;
      GVal v = b.at(d.cost.name);
      return v.is_int ? v.num : 0;  // val maps non-integer constants to 0
    };
    for (auto& [inst, bindings] : req_matches) {
      std::string name = ground_atom_name(m, d.head.pred, inst);
      int id = gd.find_action(name);
      auto& entry = gd.costs_[id];
      entry.costed = true;
      entry.time_dependent = time_dep;
      int horizon = time_dep ? plan_length : 0;
      entry.by_time.assign(horizon, 0);
      entry.defined.assign(horizon, false);
      for (int i = time_dep ? 1 : 0; i <= horizon; ++i) {
        std::set<long long> values;
        for (const auto& rb : bindings) {
          Binding wb = rb;
          if (time_dep) wb["time"] = GVal::integer(i);
          match_type_literals(m, d.where, wb,
                              [&](const Binding& full) { values.insert(val_of(full, i)); });
        }
        std::string at_time = time_dep ? " at time " + std::to_string(i) : "";
        if (values.empty()) {
          gd.wd_diags_.push_back({"action instance " + name +
                                      " has no witness substitution with a defined cost" + at_time,
                                  d.line});
        } else if (values.size() > 1) {
          std::string vs;
          for (long long v : values) vs += (vs.empty() ? "" : ", ") + std::to_string(v);
          gd.wd_diags_.push_back(
              {"action instance " + name + " has conflicting costs {" + vs + "}" + at_time,
               d.line});
        } else if (*values.begin() < 0) {
          gd.wd_diags_.push_back(
              {"action instance " + name + " has negative cost" + at_time, d.line});
        }
        bool ok = values.size() == 1 && *values.begin() >= 0;
        long long v = ok ? *values.begin() : 0;
        if (time_dep) {
          entry.defined[i - 1] = ok;
          entry.by_time[i - 1] = v;
        } else {
          entry.const_defined = ok;
          entry.const_cost = v;
        }
      }
    }
  }

  // --- ground rules and executability conditions -----------------------------
  long long rule_budget = opts.max_ground_rules;
  auto charge = [&rule_budget](long long n = 1) {
    rule_budget -= n;
    if (rule_budget < 0)
      throw SemanticError("grounding exceeds the instance cap; the problem is beyond desk scale");
  };

  JoinSource src{[&](const std::string& pred, int arity) -> const Relation* {
                   auto it = dyn_rels.find({pred, arity});
                   if (it != dyn_rels.end()) return &it->second;
                   return m.relation(pred, arity);
                 },
                 [&](const std::string& pred, const Tuple& t) { return m.contains(pred, t); },
                 &m.pool(), m.int_bound(), /*bounded_results=*/false};

  // Dynamic literals act as generators over legal instances regardless of
  // polarity; type literals keep their semantics and vanish from the result.
  auto generator_form = [&](const std::vector<Literal>& lits) {
    std::vector<Literal> out;
    for (const auto& l : lits) {
      if (decls.is_dyn(l.atom.pred)) {
        out.push_back(Literal{false, false, l.atom});
      } else {
        out.push_back(l);
      }
    }
    return out;
  };

  auto fluent_code = [&](const Literal& l, const Binding& b) {
    std::string name = ground_atom_name(m, l.atom.pred, bind_args(l.atom, b, m));
    int id = gd.find_fluent(name);
    if (id < 0) throw SemanticError("internal: unmatched fluent instance " + name);
    return flit(id, l.strong_neg);
  };
  auto action_id_of = [&](const Literal& l, const Binding& b) {
    std::string name = ground_atom_name(m, l.atom.pred, bind_args(l.atom, b, m));
    int id = gd.find_action(name);
    if (id < 0) throw SemanticError("internal: unmatched action instance " + name);
    return id;
  };

  std::set<std::vector<long long>> seen_rules, seen_execs;
  auto ground_rule = [&](const Rule& r, bool initially) {
    std::vector<Literal> gen;
    if (r.head) gen.push_back(Literal{false, false, r.head->atom});
    auto if_gen = generator_form(r.if_part);
    auto after_gen = generator_form(r.after_part);
    gen.insert(gen.end(), if_gen.begin(), if_gen.end());
    gen.insert(gen.end(), after_gen.begin(), after_gen.end());
    Binding b;
    join_literals(src, gen, b, [&] {
      GroundRule g;
      g.dynamic = !r.after_part.empty();
      if (r.head) g.head = fluent_code(*r.head, b);
      for (const auto& l : r.if_part) {
        if (!decls.is_dyn(l.atom.pred)) continue;
        (l.default_neg ? g.if_neg : g.if_pos).push_back(fluent_code(l, b));
      }
      for (const auto& l : r.after_part) {
        if (!decls.is_dyn(l.atom.pred)) continue;
        if (decls.actions.count(l.atom.pred)) {
          (l.default_neg ? g.after_neg_act : g.after_pos_act).push_back(action_id_of(l, b));
        } else {
          (l.default_neg ? g.after_neg_fl : g.after_pos_fl).push_back(fluent_code(l, b));
        }
      }
      auto norm = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      };
      norm(g.if_pos);
      norm(g.if_neg);
      norm(g.after_pos_fl);
      norm(g.after_neg_fl);
      norm(g.after_pos_act);
      norm(g.after_neg_act);
      std::vector<long long> key{initially, g.dynamic, g.head, -2};
      for (auto* v : {&g.if_pos, &g.if_neg, &g.after_pos_fl, &g.after_neg_fl, &g.after_pos_act,
                      &g.after_neg_act}) {
        for (int x : *v) key.push_back(x);
        key.push_back(-2);
      }
      if (!seen_rules.insert(key).second) return;
      charge();
      (initially ? gd.initial_rules_ : gd.rules_).push_back(std::move(g));
    });
  };

  auto ground_exec = [&](const ExecCond& e) {
    std::vector<Literal> gen;
    gen.push_back(Literal{false, false, e.action});
    auto if_gen = generator_form(e.if_part);
    gen.insert(gen.end(), if_gen.begin(), if_gen.end());
    Binding b;
    join_literals(src, gen, b, [&] {
      GroundExec g;
      g.action = action_id_of(Literal{false, false, e.action}, b);
      for (const auto& l : e.if_part) {
        if (!decls.is_dyn(l.atom.pred)) continue;
        if (decls.actions.count(l.atom.pred)) {
          (l.default_neg ? g.pre_neg_act : g.pre_pos_act).push_back(action_id_of(l, b));
        } else {
          (l.default_neg ? g.pre_neg_fl : g.pre_pos_fl).push_back(fluent_code(l, b));
        }
      }
      auto norm = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      };
      norm(g.pre_pos_fl);
      norm(g.pre_neg_fl);
      norm(g.pre_pos_act);
      norm(g.pre_neg_act);
      std::vector<long long> key{g.action, -2};
      for (auto* v : {&g.pre_pos_fl, &g.pre_neg_fl, &g.pre_pos_act, &g.pre_neg_act}) {
        for (int x : *v) key.push_back(x);
        key.push_back(-2);
      }
      if (!seen_execs.insert(key).second) return;
      charge();
      gd.execs_.push_back(std::move(g));
    });
  };

  for (const auto& it : p.initially) {
    if (auto* r = std::get_if<Rule>(&it)) ground_rule(*r, true);
    else throw SemanticError("ground: program has unexpanded macros");
  }
  for (const auto& it : p.always) {
    if (auto* r = std::get_if<Rule>(&it)) ground_rule(*r, false);
    else if (auto* e = std::get_if<ExecCond>(&it)) ground_exec(*e);
    else throw SemanticError("ground: program has unexpanded macros");
  }

  // noConcurrency: caused false after a1, a2 for all distinct instance pairs
  if (p.no_concurrency) {
    int n = gd.action_count();
    charge(static_cast<long long>(n) * (n - 1) / 2);
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = a1 + 1; a2 < n; ++a2) {
        GroundRule g;
        g.dynamic = true;
        g.after_pos_act = {a1, a2};
        gd.rules_.push_back(std::move(g));
      }
  }

  // deterministic rule order
  auto rule_key = [](const GroundRule& g) {
    std::vector<long long> key{g.dynamic, g.head, -2};
    for (auto* v : {&g.if_pos, &g.if_neg, &g.after_pos_fl, &g.after_neg_fl, &g.after_pos_act,
                    &g.after_neg_act}) {
      for (int x : *v) key.push_back(x);
      key.push_back(-2);
    }
    return key;
  };
  std::stable_sort(gd.rules_.begin(), gd.rules_.end(),
                   [&](const GroundRule& a, const GroundRule& b) { return rule_key(a) < rule_key(b); });
  std::stable_sort(gd.initial_rules_.begin(), gd.initial_rules_.end(),
                   [&](const GroundRule& a, const GroundRule& b) { return rule_key(a) < rule_key(b); });

  gd.index_.by_min_action.resize(gd.action_count());
  gd.index_.execs_by_action.resize(gd.action_count());
  for (size_t i = 0; i < gd.rules_.size(); ++i) {
    const GroundRule& r = gd.rules_[i];
    if (!r.dynamic) gd.index_.statics.push_back(static_cast<int>(i));
    else if (r.after_pos_act.empty()) gd.index_.fluent_dynamics.push_back(static_cast<int>(i));
    else gd.index_.by_min_action[r.after_pos_act.front()].push_back(static_cast<int>(i));
  }
  for (size_t i = 0; i < gd.execs_.size(); ++i)
    gd.index_.execs_by_action[gd.execs_[i].action].push_back(static_cast<int>(i));

  // --- goal ------------------------------------------------------------------
  if (p.query) {
    for (const auto& l : p.query->goals) {
      Binding b;
      std::string name = ground_atom_name(m, l.atom.pred, bind_args(l.atom, b, m));
      int id = gd.find_fluent(name);
      if (id < 0) {
        if (!l.default_neg) gd.goal_.impossible = true;
        continue;  // a negated illegal instance is trivially satisfied
      }
      int code = flit(id, l.strong_neg);
      (l.default_neg ? gd.goal_.neg : gd.goal_.pos).push_back(code);
    }
    gd.plan_length_ = plan_length;
  }
  return gd;
}

}  // namespace kcp
