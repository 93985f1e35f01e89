#ifndef KCP_PLANNER_HPP
#define KCP_PLANNER_HPP

#include <optional>
#include <vector>

#include "kcp/transition.hpp"

namespace kcp {

struct Trajectory {
  std::vector<State> states;  // steps + 1 entries, states[0] initial
};

struct PlanVerdict {
  std::vector<ActionSet> steps;
  long long cost = 0;
  Trajectory witness;
  std::optional<bool> secure;
};

enum class Mode { Any, All };

struct SearchLimits {
  long long max_states = 2000000;     // optimistic layered graph nodes
  long long max_plans = 1000000;      // enumeration guard
  int max_belief_states = 100000;     // secure reachable-state sets
  TransitionLimits transition;
};

struct PlanSearchResult {
  bool found = false;
  long long best_cost = 0;  // cost* / cost*_sec; only meaningful when found
  std::vector<PlanVerdict> plans;
  bool inconclusive = false;  // a secure check hit the belief cap
};

enum class SecureStatus { Secure, Insecure, Inconclusive };

// Def 3.4: sum of cost_j(a) over steps; 0 for the void plan.
long long plan_cost(const GroundDomain& gd, const std::vector<ActionSet>& steps);

// Optimistic plans of exactly the query length, deduplicated (one
// lexicographically least witness per plan), in (cost, steps) order. With a
// cost bound only admissible plans are produced.
PlanSearchResult find_optimistic_plans(const GroundDomain& gd, Mode mode,
                                       std::optional<long long> cost_bound,
                                       const SearchLimits& limits = {});

// cost* and the plans attaining it; found=false when no plan exists.
PlanSearchResult find_optimal_plans(const GroundDomain& gd, Mode mode,
                                    const SearchLimits& limits = {});

// Def A.15 check by breadth-first expansion of the reachable state sets.
SecureStatus is_secure(const GroundDomain& gd, const std::vector<ActionSet>& steps,
                       const SearchLimits& limits = {});

// Optimal secure plans (Def 3.6: least cost among secure plans); with a cost
// bound, admissible secure plans instead.
PlanSearchResult find_optimal_secure_plans(const GroundDomain& gd, Mode mode,
                                           std::optional<long long> cost_bound,
                                           const SearchLimits& limits = {});

}  // namespace kcp

#endif
