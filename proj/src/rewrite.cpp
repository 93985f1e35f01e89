#include "kcp/rewrite.hpp"

#include <algorithm>
#include <set>

#include "kcp/ground.hpp"
#include "kcp/macros.hpp"

namespace kcp {

namespace {

Literal not_atom(const std::string& pred) {
  return Literal{false, true, Atom{pred, {}}};
}

bool name_used(const Program& p, const std::string& n) {
  if (p.find_fluent(n) || p.find_action(n)) return true;
  for (const auto& r : p.background) {
    if (r.head.atom.pred == n) return true;
    for (const auto& l : r.body)
      if (l.atom.pred == n) return true;
  }
  return false;
}

std::string pick_name(const Program& p, const std::string& base, bool rename,
                      std::vector<std::string>& warnings) {
  if (!name_used(p, base)) return base;
  if (!rename)
    throw SemanticError("source program already declares `" + base +
                        "`; pass the rename option to rewrite anyway");
  std::string n = "kc_" + base;
  while (name_used(p, n)) n = "kc_" + n;
  warnings.push_back("renamed fresh symbol " + base + " to " + n);
  return n;
}

// `not gr` guards on always-scope rules and executability conditions;
// nonexecutable macros stay unchanged (their actions are already switched off
// through the executability conditions).
void guard_always(Program& q, const std::string& gr) {
  for (auto& it : q.always) {
    if (auto* r = std::get_if<Rule>(&it)) {
      r->if_part.push_back(not_atom(gr));
    } else if (auto* m = std::get_if<MacroRule>(&it)) {
      if (m->kind != MacroRule::Kind::Nonexecutable) m->if_part.push_back(not_atom(gr));
    } else {
      std::get<ExecCond>(it).if_part.push_back(not_atom(gr));
    }
  }
}

std::string fresh_cost_var(const ActionDecl& d) {
  std::set<std::string> used;
  auto collect = [&used](const std::vector<Literal>& ls) {
    for (const auto& l : ls)
      for (const auto& t : l.atom.args)
        if (t.is_var()) used.insert(t.name);
  };
  for (const auto& t : d.head.args) used.insert(t.name);
  collect(d.requires_);
  collect(d.where);
  if (d.has_cost && d.cost.is_var()) used.insert(d.cost.name);
  if (!used.count("C")) return "C";
  for (int i = 1;; ++i) {
    std::string n = "C" + std::to_string(i);
    if (!used.count(n)) return n;
  }
}

RewriteResult beta_core(const Program& p, int horizon, const RewriteOptions& opts) {
  if (horizon < 0) throw SemanticError("rewrite horizon must be non-negative");
  if (!p.query) throw SemanticError("rewrite requires a goal query");
  RewriteResult res;
  res.horizon = horizon;
  res.gr_name = pick_name(p, "gr", opts.rename_on_clash, res.warnings);
  res.finish_name = pick_name(p, "finish", opts.rename_on_clash, res.warnings);

  Program q = p;
  guard_always(q, res.gr_name);

  FluentDecl gr_decl;
  gr_decl.head = Atom{res.gr_name, {}};
  q.fluents.push_back(gr_decl);

  ActionDecl finish_decl;
  finish_decl.head = Atom{res.finish_name, {}};
  finish_decl.has_cost = true;
  finish_decl.cost = Term::var("time");
  q.actions.push_back(finish_decl);

  // executable finish if Q, not gr.
  ExecCond fin;
  fin.action = Atom{res.finish_name, {}};
  fin.if_part = p.query->goals;
  fin.if_part.push_back(not_atom(res.gr_name));
  q.always.push_back(fin);

  // caused gr after finish.  caused gr after gr.
  Rule r1;
  r1.head = Literal{false, false, Atom{res.gr_name, {}}};
  r1.after_part = {Literal{false, false, Atom{res.finish_name, {}}}};
  q.always.push_back(r1);
  Rule r2;
  r2.head = Literal{false, false, Atom{res.gr_name, {}}};
  r2.after_part = {Literal{false, false, Atom{res.gr_name, {}}}};
  q.always.push_back(r2);

  // nonexecutable A if finish, for every original action
  for (const auto& d : p.actions) {
    MacroRule nx;
    nx.kind = MacroRule::Kind::Nonexecutable;
    nx.subject = Literal{false, false, d.head};
    nx.if_part = {Literal{false, false, Atom{res.finish_name, {}}}};
    q.always.push_back(nx);
  }

  Query goal;
  goal.goals = {Literal{false, false, Atom{res.gr_name, {}}}};
  goal.plan_length = horizon + 1;
  q.query = goal;
  res.program = std::move(q);
  return res;
}

// total cost mass of the source domain over steps 1..i+1, and the largest
// single action cost; used for the delta factor
struct CostMass {
  long long total = 0;
  long long max_single = 0;
  long long max_value = 0;
};

CostMass cost_mass(const Program& p, const BackgroundModel& bg, int horizon) {
  Program expanded = expand_macros(p);
  GroundDomain gd = ground(expanded, bg, horizon + 1);
  if (!check_well_defined(gd, horizon + 1).empty())
    throw SemanticError("rewriting needs a well-defined source domain");
  CostMass cm;
  for (int a = 0; a < gd.action_count(); ++a)
    for (int t = 1; t <= horizon + 1; ++t) {
      long long c = gd.cost(a, t);
      cm.total += c;
      cm.max_single = std::max(cm.max_single, c);
      cm.max_value = std::max(cm.max_value, c);
    }
  return cm;
}

}  // namespace

RewriteResult rewrite_beta(const Program& p, int horizon, const BackgroundModel* bg,
                           const RewriteOptions& opts) {
  for (const auto& d : p.actions)
    if (d.has_cost)
      throw SemanticError("the shortest-plan rewriting assumes a source program without "
                          "action costs (found costs on " +
                          d.head.pred + ")");
  (void)bg;
  RewriteResult res = beta_core(p, horizon, opts);
  res.kind = RewriteKind::Beta;
  res.min_int_bound = horizon + 1;  // finish costs time
  return res;
}

RewriteResult rewrite_gamma(const Program& p, int horizon, const BackgroundModel* bg,
                            const RewriteOptions& opts) {
  RewriteResult res = beta_core(p, horizon, opts);
  res.kind = RewriteKind::Gamma;
  // costs C where D  ->  costs C' where C' = (i+1) * C, D
  for (auto& d : res.program.actions) {
    if (d.head.pred == res.finish_name || !d.has_cost) continue;
    std::string cv = fresh_cost_var(d);
    Atom mult{"#times", {Term::var(cv), Term::integer(horizon + 1), d.cost}};
    d.where.insert(d.where.begin(), Literal{false, false, mult});
    d.cost = Term::var(cv);
  }
  res.min_int_bound = horizon + 1;
  if (bg) {
    try {
      CostMass cm = cost_mass(p, *bg, horizon);
      res.min_int_bound = std::max<long long>(horizon + 1, cm.max_value * (horizon + 1));
    } catch (const SemanticError& e) {
      res.warnings.push_back(std::string("could not size the integer bound: ") + e.what());
    }
  }
  return res;
}

RewriteResult rewrite_delta(const Program& p, int horizon, const BackgroundModel* bg,
                            std::optional<long long> factor, const RewriteOptions& opts) {
  RewriteResult res = beta_core(p, horizon, opts);
  res.kind = RewriteKind::Delta;

  CostMass cm;
  bool have_mass = false;
  if (bg) {
    cm = cost_mass(p, *bg, horizon);
    have_mass = true;
  }
  long long safe = have_mass ? cm.total + 1 : 0;
  if (factor) {
    long long floor_f = have_mass ? cm.max_single + 1 : 1;
    if (*factor < floor_f)
      throw SemanticError("priority factor " + std::to_string(*factor) +
                          " is below the single-action floor " + std::to_string(floor_f));
    if (have_mass && *factor < safe)
      res.warnings.push_back("priority factor " + std::to_string(*factor) +
                             " is below the safe bound " + std::to_string(safe) +
                             "; correctness relies on a domain-specific argument");
    res.factor = *factor;
  } else {
    if (!have_mass)
      throw SemanticError("delta rewriting needs the background model to compute the "
                          "default priority factor");
    res.factor = safe;
  }

  // finish costs C where C = time * F.
  for (auto& d : res.program.actions) {
    if (d.head.pred != res.finish_name) continue;
    std::string cv = fresh_cost_var(d);
    d.cost = Term::var(cv);
    d.where = {Literal{false, false,
                       Atom{"#times", {Term::var(cv), Term::var("time"), Term::integer(res.factor)}}}};
  }
  res.min_int_bound = have_mass
                          ? std::max<long long>(res.factor * (horizon + 1), cm.max_value)
                          : res.factor * (horizon + 1);
  return res;
}

DecodedOptimum decode_optimum(const RewriteResult& r, long long opt_cost, int finish_time) {
  DecodedOptimum d;
  d.steps = finish_time - 1;
  switch (r.kind) {
    case RewriteKind::Beta:
      d.inner = 0;
      break;
    case RewriteKind::Gamma:
      d.inner = (opt_cost - finish_time) / (r.horizon + 1);
      break;
    case RewriteKind::Delta:
      d.inner = opt_cost - static_cast<long long>(finish_time) * r.factor;
      break;
  }
  return d;
}

}  // namespace kcp
