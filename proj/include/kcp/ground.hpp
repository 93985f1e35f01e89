#ifndef KCP_GROUND_HPP
#define KCP_GROUND_HPP

#include <functional>
#include <string>
#include <vector>

#include "kcp/background.hpp"

namespace kcp {

// Fluent literals are encoded as 2*instance_id + (strong negation ? 1 : 0).
inline int flit(int fluent_id, bool neg) { return 2 * fluent_id + (neg ? 1 : 0); }
inline int flit_id(int code) { return code >> 1; }
inline bool flit_neg(int code) { return code & 1; }
inline int flit_complement(int code) { return code ^ 1; }

// A ground causation rule. Type literals are already evaluated against M and
// eliminated; substitutions whose type part fails are never materialized.
struct GroundRule {
  int head = -1;  // fluent literal code; -1 encodes `false`
  std::vector<int> if_pos, if_neg;                 // fluent literal codes
  std::vector<int> after_pos_fl, after_neg_fl;     // fluent literal codes
  std::vector<int> after_pos_act, after_neg_act;   // action instance ids
  bool dynamic = false;  // source rule carried an after part

  bool operator==(const GroundRule&) const = default;
};

struct GroundExec {
  int action = -1;
  std::vector<int> pre_pos_fl, pre_neg_fl;
  std::vector<int> pre_pos_act, pre_neg_act;
};

struct GroundGoal {
  std::vector<int> pos, neg;  // fluent literal codes
  bool impossible = false;    // a positive goal literal is not a legal instance
};

struct GroundOptions {
  long long max_ground_rules = 1000000;
};

// Typed instantiation of a planning problem: legal fluent/action instances,
// ground rules and executability conditions, the per-time action cost table,
// and the ground goal. Immutable after construction.
class GroundDomain {
 public:
  int fluent_count() const { return static_cast<int>(fluent_names_.size()); }
  int action_count() const { return static_cast<int>(action_names_.size()); }
  const std::string& fluent_name(int id) const { return fluent_names_[id]; }
  const std::string& action_name(int id) const { return action_names_[id]; }
  std::string flit_name(int code) const {
    return (flit_neg(code) ? "-" : "") + fluent_names_[flit_id(code)];
  }
  int find_fluent(const std::string& name) const;   // -1 when absent
  int find_action(const std::string& name) const;
  const std::pair<std::string, Tuple>& fluent_atom(int id) const { return fluent_structs_[id]; }
  const std::pair<std::string, Tuple>& action_atom(int id) const { return action_structs_[id]; }

  bool cost_defined(int action, int time) const;
  // The unique cost of a legal action instance at time point i >= 1. Throws
  // SemanticError when undefined (ill-defined domain) or beyond the horizon.
  long long cost(int action, int time) const;
  bool any_costs() const { return any_costs_; }

  const std::vector<GroundRule>& rules() const { return rules_; }
  const std::vector<GroundRule>& initial_rules() const { return initial_rules_; }
  const std::vector<GroundExec>& execs() const { return execs_; }

  // rules_ partitioned for transition computation: static rules, dynamic
  // rules without positive action preconditions, and dynamic rules bucketed
  // by their smallest positive action (they can only fire when that action is
  // part of the executed set)
  struct RuleIndex {
    std::vector<int> statics;
    std::vector<int> fluent_dynamics;
    std::vector<std::vector<int>> by_min_action;
    std::vector<std::vector<int>> execs_by_action;
  };
  const RuleIndex& rule_index() const { return index_; }
  const GroundGoal& goal() const { return goal_; }
  int plan_length() const { return plan_length_; }
  bool no_concurrency() const { return no_concurrency_; }
  const BackgroundModel& background() const { return *bg_; }
  const std::vector<Diagnostic>& wd_diagnostics() const { return wd_diags_; }

 private:
  friend GroundDomain ground(const Program&, const BackgroundModel&, int, const GroundOptions&);
  std::vector<std::string> fluent_names_, action_names_;
  std::vector<std::pair<std::string, Tuple>> fluent_structs_, action_structs_;
  std::unordered_map<std::string, int> fluent_ids_, action_ids_;
  struct CostEntry {
    bool costed = false;          // declaration has a costs part
    bool time_dependent = false;
    bool const_defined = true;
    long long const_cost = 0;
    std::vector<long long> by_time;  // index time-1, when time_dependent
    std::vector<bool> defined;
  };
  std::vector<CostEntry> costs_;
  bool any_costs_ = false;
  std::vector<GroundRule> rules_, initial_rules_;
  std::vector<GroundExec> execs_;
  GroundGoal goal_;
  RuleIndex index_;
  int plan_length_ = 0;
  bool no_concurrency_ = false;
  const BackgroundModel* bg_ = nullptr;
  std::vector<Diagnostic> wd_diags_;
};

// Grounds a validated, macro-expanded program for the given horizon. The cost
// table covers time points 1..plan_length. Well-definedness violations are
// recorded as diagnostics (see check_well_defined), not thrown. Throws
// SemanticError when the instance cap is exceeded.
GroundDomain ground(const Program& p, const BackgroundModel& m, int plan_length,
                    const GroundOptions& opts = {});

long long action_cost(const GroundDomain& gd, int action_id, int time);

// Empty iff every legal action instance has exactly one defined integer cost
// at every time point 1..horizon.
std::vector<Diagnostic> check_well_defined(const GroundDomain& gd, int horizon);

// Legal instances (parameter tuples) of one declaration, sorted. Shared with
// the translator, which needs them to materialize noConcurrency constraints.
std::vector<Tuple> legal_instances(const BackgroundModel& m, const Atom& head,
                                   const std::vector<Literal>& requires_part);

std::string ground_atom_name(const BackgroundModel& m, const std::string& pred, const Tuple& args);

}  // namespace kcp

#endif
