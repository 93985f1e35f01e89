#include "kcp/transition.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace kcp {

int Bitset::count() const {
  const uint64_t* w = words();
  int c = 0;
  for (int i = 0; i < nw_; ++i) c += __builtin_popcountll(w[i]);
  return c;
}

bool Bitset::intersects(const Bitset& o) const {
  const uint64_t *a = words(), *b = o.words();
  for (int i = 0; i < nw_; ++i)
    if (a[i] & b[i]) return true;
  return false;
}

bool Bitset::contains_all(const Bitset& o) const {
  const uint64_t *a = words(), *b = o.words();
  for (int i = 0; i < nw_; ++i)
    if ((b[i] & ~a[i]) != 0) return false;
  return true;
}

void Bitset::unite(const Bitset& o) {
  uint64_t* a = words();
  const uint64_t* b = o.words();
  for (int i = 0; i < nw_; ++i) a[i] |= b[i];
}

bool Bitset::operator<(const Bitset& o) const {
  const uint64_t *a = words(), *b = o.words();
  for (int i = 0; i < nw_; ++i) {
    uint64_t diff = a[i] ^ b[i];
    if (diff) {
      uint64_t low = diff & (~diff + 1);
      return a[i] & low;  // the side holding the smallest differing element is smaller
    }
  }
  return false;
}

size_t Bitset::hash() const {
  const uint64_t* w = words();
  size_t h = 0x9e3779b97f4a7c15ull;
  for (int i = 0; i < nw_; ++i) h = (h ^ w[i]) * 0x100000001b3ull;
  return h;
}

bool state_consistent(const State& s) {
  bool ok = true;
  s.for_each([&](int code) {
    if (!flit_neg(code) && s.test(code ^ 1)) ok = false;
  });
  return ok;
}

std::string state_to_string(const GroundDomain& gd, const State& s) {
  std::string out = "{";
  bool first = true;
  s.for_each([&](int code) {
    if (!first) out += ", ";
    first = false;
    out += gd.flit_name(code);
  });
  return out + "}";
}

std::string action_set_to_string(const GroundDomain& gd, const ActionSet& a) {
  std::string out = "{";
  for (size_t i = 0; i < a.ids.size(); ++i) {
    if (i) out += ", ";
    out += gd.action_name(a.ids[i]);
  }
  return out + "}";
}

State make_state(const GroundDomain& gd, const std::vector<int>& codes) {
  State s(2 * gd.fluent_count());
  for (int c : codes) s.set(c);
  return s;
}

namespace {

bool contains(const std::vector<int>& sorted, int x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

bool subset_of(const std::vector<int>& xs, const std::vector<int>& sorted) {
  for (int x : xs)
    if (!contains(sorted, x)) return false;
  return true;
}

bool any_in_state(const std::vector<int>& xs, const State& s) {
  for (int x : xs)
    if (s.test(x)) return true;
  return false;
}

bool all_in_state(const std::vector<int>& xs, const State& s) {
  for (int x : xs)
    if (!s.test(x)) return false;
  return true;
}

// A rule projected onto the successor state: head <- if_pos unless some
// if_neg literal ends up in s'.
struct CondRule {
  int head;  // -1 = false
  const std::vector<int>* if_pos;
  const std::vector<int>* if_neg;
};

// pre-part satisfaction of a dynamic rule w.r.t. (s, A)
bool fires_at(const GroundRule& r, const State& s, const std::vector<int>& acts) {
  if (!all_in_state(r.after_pos_fl, s)) return false;
  if (any_in_state(r.after_neg_fl, s)) return false;
  if (!subset_of(r.after_pos_act, acts)) return false;
  for (int a : r.after_neg_act)
    if (contains(acts, a)) return false;
  return true;
}

State lfp(const std::vector<CondRule>& rules, const std::vector<bool>& alive, int nbits,
          bool ignore_neg, const State* neg_against) {
  State s(nbits);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < rules.size(); ++i) {
      if (!alive[i]) continue;
      const CondRule& r = rules[i];
      if (r.head < 0 || s.test(r.head)) continue;
      if (!ignore_neg && neg_against) {
        bool blocked = false;
        for (int x : *r.if_neg)
          if (neg_against->test(x)) blocked = true;
        if (blocked) continue;
      }
      if (!all_in_state(*r.if_pos, s)) continue;
      s.set(r.head);
      changed = true;
    }
  }
  return s;
}

// Enumerates the stable models of the conditional rules: candidates s' with
// s' = least model of the rules surviving the reduct by s', consistent, and
// violating no false-head rule. Branching is confined to if_neg literals left
// undetermined by a three-valued pre-analysis.
std::vector<State> stable_models(const std::vector<CondRule>& rules, int nbits,
                                 const TransitionLimits& limits) {
  std::vector<bool> deriving(rules.size());
  for (size_t i = 0; i < rules.size(); ++i) deriving[i] = rules[i].head >= 0;

  auto accept = [&](State lm, std::vector<State>& out) {
    if (!state_consistent(lm)) return;
    for (const auto& r : rules) {
      if (r.head >= 0) continue;
      if (!all_in_state(*r.if_pos, lm)) continue;
      bool blocked = false;
      for (int x : *r.if_neg)
        if (lm.test(x)) blocked = true;
      if (!blocked) return;
    }
    out.push_back(std::move(lm));
  };

  // overestimate first; when no default-negated literal is even derivable the
  // least model is already the unique candidate
  State possible = lfp(rules, deriving, nbits, /*ignore_neg=*/true, nullptr);
  bool any_neg_possible = false;
  for (size_t i = 0; i < rules.size() && !any_neg_possible; ++i) {
    if (!deriving[i]) continue;
    for (int x : *rules[i].if_neg)
      if (possible.test(x)) any_neg_possible = true;
  }
  std::vector<State> out;
  if (!any_neg_possible) {
    accept(std::move(possible), out);
    return out;
  }

  // three-valued bounds: certain ⊆ every candidate ⊆ possible
  State certain(nbits);
  for (;;) {
    std::vector<bool> safe(rules.size(), false);
    for (size_t i = 0; i < rules.size(); ++i) {
      if (!deriving[i]) continue;
      bool undeletable = true;
      for (int x : *rules[i].if_neg)
        if (possible.test(x)) undeletable = false;
      safe[i] = undeletable;
    }
    certain = lfp(rules, safe, nbits, /*ignore_neg=*/true, nullptr);
    std::vector<bool> maybe(rules.size(), false);
    for (size_t i = 0; i < rules.size(); ++i) {
      if (!deriving[i]) continue;
      bool deleted = false;
      for (int x : *rules[i].if_neg)
        if (certain.test(x)) deleted = true;
      maybe[i] = !deleted;
    }
    State next = lfp(rules, maybe, nbits, /*ignore_neg=*/true, nullptr);
    if (next == possible) break;
    possible = std::move(next);
  }

  std::vector<int> branch;
  {
    std::set<int> bs;
    for (size_t i = 0; i < rules.size(); ++i) {
      if (!deriving[i]) continue;
      for (int x : *rules[i].if_neg)
        if (possible.test(x) && !certain.test(x)) bs.insert(x);
    }
    branch.assign(bs.begin(), bs.end());
  }
  if (static_cast<int>(branch.size()) > limits.max_branch_literals)
    throw SemanticError("state enumeration exceeds the branch cap (" +
                        std::to_string(branch.size()) + " undetermined literals)");

  if (branch.empty()) {
    // the reduct is fully determined: rules with an if_neg literal in the
    // overestimate are deleted for sure (the literal is certain), the rest
    // survive for sure, which is exactly the `certain` fixpoint
    accept(std::move(certain), out);
    return out;
  }

  for (uint64_t mask = 0; mask < (1ull << branch.size()); ++mask) {
    State assumed = certain;
    for (size_t b = 0; b < branch.size(); ++b)
      if (mask & (1ull << b)) assumed.set(branch[b]);
    std::vector<bool> alive(rules.size(), false);
    for (size_t i = 0; i < rules.size(); ++i) {
      if (!deriving[i]) continue;
      bool deleted = false;
      for (int x : *rules[i].if_neg)
        if (assumed.test(x)) deleted = true;
      alive[i] = !deleted;
    }
    State lm = lfp(rules, alive, nbits, /*ignore_neg=*/true, nullptr);
    // stability of the guess
    bool stable = true;
    for (size_t b = 0; b < branch.size() && stable; ++b)
      if (lm.test(branch[b]) != static_cast<bool>((mask >> b) & 1)) stable = false;
    if (!stable) continue;
    accept(std::move(lm), out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<GroundRule> reduct(const GroundDomain& gd, const Transition& t) {
  std::vector<GroundRule> out;
  std::vector<int> acts = t.actions.ids;
  auto apply = [&](const std::vector<GroundRule>& rules) {
    for (const auto& r : rules) {
      if (any_in_state(r.if_neg, t.to)) continue;
      if (any_in_state(r.after_neg_fl, t.from)) continue;
      bool blocked = false;
      for (int a : r.after_neg_act)
        if (contains(acts, a)) blocked = true;
      if (blocked) continue;
      GroundRule g = r;
      g.if_neg.clear();
      g.after_neg_fl.clear();
      g.after_neg_act.clear();
      out.push_back(std::move(g));
    }
  };
  apply(gd.rules());
  apply(gd.initial_rules());
  return out;
}

std::vector<State> legal_initial_states(const GroundDomain& gd, const TransitionLimits& limits) {
  std::vector<CondRule> rules;
  for (const auto& r : gd.initial_rules())
    rules.push_back({r.head, &r.if_pos, &r.if_neg});
  for (const auto& r : gd.rules())
    if (!r.dynamic) rules.push_back({r.head, &r.if_pos, &r.if_neg});
  return stable_models(rules, 2 * gd.fluent_count(), limits);
}

std::vector<State> successor_states(const GroundDomain& gd, const State& s, const ActionSet& a,
                                    const TransitionLimits& limits) {
  const auto& all = gd.rules();
  const auto& index = gd.rule_index();
  std::vector<CondRule> rules;
  rules.reserve(index.statics.size() + index.fluent_dynamics.size());
  for (int i : index.statics) rules.push_back({all[i].head, &all[i].if_pos, &all[i].if_neg});
  auto consider = [&](int i) {
    const GroundRule& r = all[i];
    if (fires_at(r, s, a.ids)) rules.push_back({r.head, &r.if_pos, &r.if_neg});
  };
  for (int i : index.fluent_dynamics) consider(i);
  for (int act : a.ids)
    for (int i : index.by_min_action[act]) consider(i);
  return stable_models(rules, 2 * gd.fluent_count(), limits);
}

bool is_executable(const GroundDomain& gd, const State& s, const ActionSet& a) {
  if (gd.no_concurrency() && a.ids.size() > 1) return false;
  for (int act : a.ids) {
    bool supported = false;
    for (int ei : gd.rule_index().execs_by_action[act]) {
      const GroundExec& e = gd.execs()[ei];
      if (!all_in_state(e.pre_pos_fl, s)) continue;
      if (any_in_state(e.pre_neg_fl, s)) continue;
      if (!subset_of(e.pre_pos_act, a.ids)) continue;
      bool blocked = false;
      for (int x : e.pre_neg_act)
        if (contains(a.ids, x)) blocked = true;
      if (blocked) continue;
      supported = true;
      break;
    }
    if (!supported) return false;
  }
  return true;
}

std::vector<ActionSet> executable_action_sets(const GroundDomain& gd, const State& s,
                                              const TransitionLimits& limits,
                                              const std::vector<long long>* action_costs,
                                              long long cost_cap) {
  // candidate actions: those with an executability condition whose fluent
  // preconditions hold in s
  std::vector<int> cands;
  for (const auto& e : gd.execs()) {
    if (!all_in_state(e.pre_pos_fl, s)) continue;
    if (any_in_state(e.pre_neg_fl, s)) continue;
    cands.push_back(e.action);
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  if (action_costs)
    std::erase_if(cands, [&](int a) { return (*action_costs)[a] > cost_cap; });

  std::vector<ActionSet> out;
  out.push_back(ActionSet{});  // the empty set is vacuously executable
  if (gd.no_concurrency()) {
    for (int a : cands) {
      ActionSet single{{a}};
      if (is_executable(gd, s, single)) out.push_back(std::move(single));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // state-independent conflict rules usable for monotone pruning: caused
  // false after a1,...,ak [fluents] with no default literals and no if part.
  // Bucketed by their largest action: a conflict can only start firing when
  // that action joins the (ascending) partial set.
  std::map<int, std::vector<const GroundRule*>> conflicts_by_max;
  for (int cand : cands) {
    for (int i : gd.rule_index().by_min_action[cand]) {
      const GroundRule& r = gd.rules()[i];
      if (r.head >= 0) continue;
      if (!r.if_pos.empty() || !r.if_neg.empty()) continue;
      if (!r.after_neg_act.empty()) continue;
      if (!all_in_state(r.after_pos_fl, s)) continue;
      if (any_in_state(r.after_neg_fl, s)) continue;
      conflicts_by_max[r.after_pos_act.back()].push_back(&r);
    }
  }

  long long budget = limits.max_action_subsets;
  std::vector<int> current;
  auto conflict_fires = [&](int added) {
    auto it = conflicts_by_max.find(added);
    if (it == conflicts_by_max.end()) return false;
    for (const auto* r : it->second)
      if (subset_of(r->after_pos_act, current)) return true;
    return false;
  };
  auto emit = [&](const std::vector<int>& acts) {
    ActionSet a{acts};
    if (!acts.empty() && is_executable(gd, s, a)) out.push_back(std::move(a));
  };
  auto rec = [&](auto&& self, size_t i, long long spent) -> void {
    if (--budget < 0)
      throw SemanticError("action set enumeration exceeds the subset cap");
    if (i == cands.size()) {
      emit(current);
      return;
    }
    self(self, i + 1, spent);  // exclude cands[i]
    long long c = action_costs ? (*action_costs)[cands[i]] : 0;
    if (action_costs && spent + c > cost_cap) return;
    current.push_back(cands[i]);
    if (!conflict_fires(cands[i])) self(self, i + 1, spent + c);
    current.pop_back();
  };
  rec(rec, 0, 0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool is_legal_transition(const GroundDomain& gd, const Transition& t,
                         const TransitionLimits& limits) {
  if (!state_consistent(t.from) || !state_consistent(t.to)) return false;
  if (!is_executable(gd, t.from, t.actions)) return false;
  auto succs = successor_states(gd, t.from, t.actions, limits);
  return std::find(succs.begin(), succs.end(), t.to) != succs.end();
}

bool satisfies_goal(const GroundDomain& gd, const State& s) {
  const GroundGoal& g = gd.goal();
  if (g.impossible) return false;
  for (int code : g.pos)
    if (!s.test(code)) return false;
  for (int code : g.neg)
    if (s.test(code)) return false;
  return true;
}

}  // namespace kcp
