#include "kcp/planner.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <unordered_map>

namespace kcp {

namespace {

constexpr long long kInf = (1ll << 62);

long long step_cost(const GroundDomain& gd, const ActionSet& a, int time) {
  long long c = 0;
  for (int id : a.ids) c += gd.cost(id, time);
  return c;
}

// Executable action sets with their successor states. Transitions do not
// depend on the time point, so one expansion per state serves every layer.
class Expander {
 public:
  struct Move {
    ActionSet a;
    std::vector<State> succs;  // nonempty
  };
  using Expansion = std::vector<Move>;

  Expander(const GroundDomain& gd, const SearchLimits& limits) : gd_(gd), limits_(limits) {
    min_costs_.resize(gd.action_count(), 0);
    for (int a = 0; a < gd.action_count() && gd.plan_length() > 0; ++a) {
      long long mc = kInf;
      for (int t = 1; t <= gd.plan_length(); ++t) mc = std::min(mc, gd.cost(a, t));
      min_costs_[a] = mc;
    }
  }

  // Executable sets with successors, restricted to sets whose minimum summed
  // cost stays within the cap. A cached entry computed under a larger cap is
  // reused; callers filter by the exact per-layer cost anyway. Returned
  // references stay valid for the lifetime of the Expander even if a later
  // call with a larger cap recomputes the entry.
  const Expansion& expand(const State& s, long long cap) {
    auto it = cache_.find(s);
    if (it != cache_.end() && it->second.cap >= cap) return *it->second.moves;
    auto exp = std::make_unique<Expansion>();
    for (const auto& a :
         executable_action_sets(gd_, s, limits_.transition, &min_costs_, cap)) {
      auto succs = successor_states(gd_, s, a, limits_.transition);
      if (succs.empty()) continue;
      exp->push_back({a, std::move(succs)});
    }
    auto& entry = cache_[s];
    if (entry.moves) retired_.push_back(std::move(entry.moves));
    entry.cap = cap;
    entry.moves = std::move(exp);
    return *entry.moves;
  }

 private:
  struct Entry {
    long long cap = -1;
    std::unique_ptr<Expansion> moves;
  };
  const GroundDomain& gd_;
  const SearchLimits& limits_;
  std::vector<long long> min_costs_;
  std::unordered_map<State, Entry, StateHash> cache_;
  std::vector<std::unique_ptr<Expansion>> retired_;
};

// Layered transition graph over (step, state), grown best-first from the
// legal initial states up to an arrival-cost bound.
struct Layered {
  struct Edge {
    int move;  // index into the expansion of the source state
    int to;    // state index in layer j+1
  };
  std::vector<std::vector<State>> states;                      // per layer
  std::vector<std::unordered_map<State, int, StateHash>> idx;  // per layer
  std::vector<std::vector<std::vector<Edge>>> edges;           // [layer][state]
  std::vector<std::vector<const Expander::Expansion*>> exps;   // [layer][state]
  std::vector<std::vector<long long>> dist;                    // cheapest arrival
  std::vector<std::vector<long long>> comp;                    // cheapest completion

  int intern(int layer, const State& s) {
    auto [it, fresh] = idx[layer].emplace(s, static_cast<int>(states[layer].size()));
    if (fresh) {
      states[layer].push_back(s);
      edges[layer].emplace_back();
      exps[layer].push_back(nullptr);
      dist[layer].push_back(kInf);
      comp[layer].push_back(kInf);
    }
    return it->second;
  }

  const ActionSet& action(int layer, int si, int move) const {
    return (*exps[layer][si])[move].a;
  }
};

// Settles every (step, state) node whose cheapest arrival cost stays within
// the bound. With find_optimum set, the bound tightens to the cheapest goal
// arrival at the final layer, so only potentially optimal nodes are expanded.
Layered build_graph(const GroundDomain& gd, Expander& ex, long long bound, bool find_optimum,
                    const SearchLimits& limits, long long* optimum_out = nullptr) {
  int l = gd.plan_length();
  Layered g;
  g.states.resize(l + 1);
  g.idx.resize(l + 1);
  g.edges.resize(l + 1);
  g.exps.resize(l + 1);
  g.dist.resize(l + 1);
  g.comp.resize(l + 1);

  using QEntry = std::tuple<long long, int, int>;  // (g, layer, index)
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<>> pq;
  long long nodes = 0;
  for (const auto& s0 : legal_initial_states(gd, limits.transition)) {
    int i = g.intern(0, s0);
    g.dist[0][i] = 0;
    pq.push({0, 0, i});
    nodes++;
  }
  long long best_goal = kInf;
  while (!pq.empty()) {
    auto [gc, j, si] = pq.top();
    pq.pop();
    if (gc > g.dist[j][si]) continue;  // stale entry
    if (gc > bound || gc > best_goal) break;
    if (j == l) {
      if (find_optimum && best_goal == kInf && satisfies_goal(gd, g.states[j][si]))
        best_goal = gc;
      continue;
    }
    const State s = g.states[j][si];
    long long cap = std::min(bound, best_goal) - gc;
    const auto& moves = ex.expand(s, cap);
    g.exps[j][si] = &moves;
    for (size_t mi = 0; mi < moves.size(); ++mi) {
      long long c = step_cost(gd, moves[mi].a, j + 1);
      long long ng = gc + c;
      if (ng > bound || ng > best_goal) continue;
      for (const auto& s2 : moves[mi].succs) {
        size_t before = g.states[j + 1].size();
        int ti = g.intern(j + 1, s2);
        if (g.states[j + 1].size() != before && ++nodes > limits.max_states)
          throw SemanticError("plan search exceeds the state cap; beyond desk scale");
        g.edges[j][si].push_back({static_cast<int>(mi), ti});
        if (ng < g.dist[j + 1][ti]) {
          g.dist[j + 1][ti] = ng;
          pq.push({ng, j + 1, ti});
        }
      }
    }
  }
  if (optimum_out) *optimum_out = best_goal;

  // exact completion costs, backward over the settled subgraph
  for (size_t i = 0; i < g.states[l].size(); ++i)
    if (satisfies_goal(gd, g.states[l][i])) g.comp[l][i] = 0;
  for (int j = l - 1; j >= 0; --j)
    for (size_t i = 0; i < g.states[j].size(); ++i)
      for (const auto& e : g.edges[j][i]) {
        if (g.comp[j + 1][e.to] >= kInf) continue;
        long long c = step_cost(gd, g.action(j, static_cast<int>(i), e.move), j + 1);
        g.comp[j][i] = std::min(g.comp[j][i], c + g.comp[j + 1][e.to]);
      }
  return g;
}

// Enumerates goal-reaching plans with total cost <= bound, deduplicating
// identical action sequences and keeping the least witness trajectory.
void enumerate_plans(const GroundDomain& gd, const Layered& g, long long bound, Mode mode,
                     const SearchLimits& limits,
                     std::map<std::vector<ActionSet>, PlanVerdict>& out) {
  int l = gd.plan_length();
  std::vector<ActionSet> steps;
  std::vector<State> traj;
  auto rec = [&](auto&& self, int j, int si, long long gcost) -> void {
    if (mode == Mode::Any && !out.empty()) return;
    if (j == l) {
      if (!satisfies_goal(gd, g.states[j][si])) return;
      PlanVerdict v;
      v.steps = steps;
      v.cost = gcost;
      v.witness.states = traj;
      auto it = out.find(v.steps);
      if (it == out.end()) {
        if (static_cast<long long>(out.size()) >= limits.max_plans)
          throw SemanticError("plan enumeration exceeds the plan cap");
        out.emplace(v.steps, std::move(v));
      } else if (traj < it->second.witness.states) {
        it->second.witness.states = traj;
      }
      return;
    }
    std::vector<const Layered::Edge*> es;
    for (const auto& e : g.edges[j][si]) es.push_back(&e);
    std::sort(es.begin(), es.end(), [&](const Layered::Edge* a, const Layered::Edge* b) {
      const ActionSet& aa = g.action(j, si, a->move);
      const ActionSet& ab = g.action(j, si, b->move);
      if (aa < ab) return true;
      if (ab < aa) return false;
      return g.states[j + 1][a->to] < g.states[j + 1][b->to];
    });
    for (const auto* e : es) {
      if (g.comp[j + 1][e->to] >= kInf) continue;
      const ActionSet& a = g.action(j, si, e->move);
      long long c = step_cost(gd, a, j + 1);
      if (gcost + c + g.comp[j + 1][e->to] > bound) continue;
      steps.push_back(a);
      traj.push_back(g.states[j + 1][e->to]);
      self(self, j + 1, e->to, gcost + c);
      steps.pop_back();
      traj.pop_back();
    }
  };
  std::vector<int> init(g.states[0].size());
  for (size_t i = 0; i < init.size(); ++i) init[i] = static_cast<int>(i);
  std::sort(init.begin(), init.end(),
            [&](int a, int b) { return g.states[0][a] < g.states[0][b]; });
  for (int i : init) {
    if (g.comp[0][i] > bound) continue;
    traj.push_back(g.states[0][i]);
    rec(rec, 0, i, 0);
    traj.pop_back();
  }
}

std::vector<PlanVerdict> sorted_plans(std::map<std::vector<ActionSet>, PlanVerdict>&& m) {
  std::vector<PlanVerdict> out;
  out.reserve(m.size());
  for (auto& [k, v] : m) out.push_back(std::move(v));
  std::stable_sort(out.begin(), out.end(), [](const PlanVerdict& a, const PlanVerdict& b) {
    return a.cost < b.cost;
  });
  return out;
}

}  // namespace

long long plan_cost(const GroundDomain& gd, const std::vector<ActionSet>& steps) {
  long long total = 0;
  for (size_t j = 0; j < steps.size(); ++j)
    total += step_cost(gd, steps[j], static_cast<int>(j) + 1);
  return total;
}

PlanSearchResult find_optimistic_plans(const GroundDomain& gd, Mode mode,
                                       std::optional<long long> cost_bound,
                                       const SearchLimits& limits) {
  PlanSearchResult res;
  long long bound = cost_bound.value_or(kInf - 1);
  Expander ex(gd, limits);
  Layered g = build_graph(gd, ex, bound, /*find_optimum=*/false, limits);
  std::map<std::vector<ActionSet>, PlanVerdict> plans;
  enumerate_plans(gd, g, bound, mode, limits, plans);
  res.plans = sorted_plans(std::move(plans));
  res.found = !res.plans.empty();
  if (res.found) res.best_cost = res.plans.front().cost;
  if (mode == Mode::Any && res.plans.size() > 1) res.plans.resize(1);
  return res;
}

PlanSearchResult find_optimal_plans(const GroundDomain& gd, Mode mode,
                                    const SearchLimits& limits) {
  PlanSearchResult res;
  Expander ex(gd, limits);
  long long best = kInf;
  Layered g = build_graph(gd, ex, kInf - 1, /*find_optimum=*/true, limits, &best);
  if (best >= kInf) return res;
  res.found = true;
  res.best_cost = best;
  std::map<std::vector<ActionSet>, PlanVerdict> plans;
  enumerate_plans(gd, g, best, mode, limits, plans);
  res.plans = sorted_plans(std::move(plans));
  if (mode == Mode::Any && res.plans.size() > 1) res.plans.resize(1);
  return res;
}

SecureStatus is_secure(const GroundDomain& gd, const std::vector<ActionSet>& steps,
                       const SearchLimits& limits) {
  std::vector<State> reach = legal_initial_states(gd, limits.transition);
  if (reach.empty()) return SecureStatus::Insecure;  // not even an optimistic plan
  for (const auto& a : steps) {
    std::set<State> next;
    for (const auto& s : reach) {
      if (!is_executable(gd, s, a)) return SecureStatus::Insecure;
      auto succs = successor_states(gd, s, a, limits.transition);
      if (succs.empty()) return SecureStatus::Insecure;
      next.insert(succs.begin(), succs.end());
    }
    if (static_cast<long long>(next.size()) > limits.max_belief_states)
      return SecureStatus::Inconclusive;
    reach.assign(next.begin(), next.end());
  }
  for (const auto& s : reach)
    if (!satisfies_goal(gd, s)) return SecureStatus::Insecure;
  return SecureStatus::Secure;
}

PlanSearchResult find_optimal_secure_plans(const GroundDomain& gd, Mode mode,
                                           std::optional<long long> cost_bound,
                                           const SearchLimits& limits) {
  PlanSearchResult res;
  int l = gd.plan_length();
  std::vector<State> init = legal_initial_states(gd, limits.transition);
  if (init.empty()) return res;

  // optimistic completion costs double as an admissible lower bound: a secure
  // suffix must reach the goal from every reachable state, and its cost does
  // not depend on the trajectory
  Expander ex(gd, limits);
  Layered g = build_graph(gd, ex, kInf - 1, /*find_optimum=*/false, limits);

  auto completion_bound = [&](int j, const std::vector<State>& reach) -> long long {
    long long worst = 0;
    for (const auto& s : reach) {
      auto it = g.idx[j].find(s);
      if (it == g.idx[j].end()) return kInf;
      long long h = g.comp[j][it->second];
      if (h >= kInf) return kInf;
      worst = std::max(worst, h);
    }
    return worst;
  };

  bool admissible_mode = cost_bound.has_value();
  long long best = admissible_mode ? *cost_bound : kInf;
  std::vector<std::pair<long long, std::vector<ActionSet>>> found;
  bool hit_cap = false;

  std::vector<ActionSet> steps;
  auto rec = [&](auto&& self, int j, const std::vector<State>& reach, long long gcost) -> void {
    if (mode == Mode::Any && admissible_mode && !found.empty()) return;
    if (j == l) {
      for (const auto& s : reach)
        if (!satisfies_goal(gd, s)) return;
      if (!admissible_mode && gcost < best) {
        best = gcost;
        std::erase_if(found, [&](const auto& p) { return p.first > best; });
      }
      found.emplace_back(gcost, steps);
      return;
    }
    long long hb = completion_bound(j, reach);
    if (hb >= kInf) return;
    if (gcost + hb > best) return;

    // candidate sets: a legal transition must exist from every reachable state
    struct Cand {
      long long est;
      const ActionSet* a;
      std::vector<State> next;
    };
    std::vector<Cand> moves;
    const auto& first_moves = ex.expand(reach.front(), kInf);
    for (const auto& mv : first_moves) {
      bool ok = true;
      std::set<State> next(mv.succs.begin(), mv.succs.end());
      for (size_t i = 1; i < reach.size() && ok; ++i) {
        const auto& exp = ex.expand(reach[i], kInf);
        auto it = std::find_if(exp.begin(), exp.end(),
                               [&](const auto& m) { return m.a == mv.a; });
        if (it == exp.end()) {
          ok = false;
          break;
        }
        next.insert(it->succs.begin(), it->succs.end());
      }
      if (!ok) continue;
      if (static_cast<long long>(next.size()) > limits.max_belief_states) {
        hit_cap = true;
        continue;
      }
      std::vector<State> nr(next.begin(), next.end());
      long long c = step_cost(gd, mv.a, j + 1);
      long long est = completion_bound(j + 1, nr);
      if (est >= kInf || gcost + c + est > best) continue;
      moves.push_back({c + est, &mv.a, std::move(nr)});
    }
    std::stable_sort(moves.begin(), moves.end(), [](const Cand& x, const Cand& y) {
      if (x.est != y.est) return x.est < y.est;
      return *x.a < *y.a;
    });
    for (auto& mv : moves) {
      long long c = step_cost(gd, *mv.a, j + 1);
      if (gcost + c > best) continue;
      steps.push_back(*mv.a);
      self(self, j + 1, mv.next, gcost + c);
      steps.pop_back();
    }
  };
  rec(rec, 0, init, 0);

  if (found.empty()) {
    res.inconclusive = hit_cap;
    return res;
  }
  if (!admissible_mode) {
    std::erase_if(found, [&](const auto& p) { return p.first > best; });
  }
  std::sort(found.begin(), found.end());
  res.found = true;
  res.best_cost = found.front().first;
  for (auto& [c, st] : found) {
    PlanVerdict v;
    v.steps = st;
    v.cost = c;
    v.secure = true;
    // witness trajectory, replayed deterministically from the least initial
    // state; any replay reaches the goal because the plan is secure
    State cur = init.front();
    v.witness.states.push_back(cur);
    for (size_t j = 0; j < st.size(); ++j) {
      auto succs = successor_states(gd, cur, st[j], limits.transition);
      if (succs.empty()) break;
      cur = succs.front();
      v.witness.states.push_back(cur);
    }
    res.plans.push_back(std::move(v));
    if (mode == Mode::Any) break;
  }
  return res;
}

}  // namespace kcp
