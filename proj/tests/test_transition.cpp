#include "doctest.h"
#include "helpers.hpp"
#include <set>

#include "kcp/transition.hpp"

using namespace kcp;
using kcptest::acts;
using kcptest::make_problem;

namespace {

int code(const GroundDomain& gd, const std::string& name) {
  bool neg = !name.empty() && name[0] == '-';
  int id = gd.find_fluent(neg ? name.substr(1) : name);
  REQUIRE(id >= 0);
  return flit(id, neg);
}

bool has_lit(const GroundDomain& gd, const State& s, const std::string& name) {
  return s.test(code(gd, name));
}

}  // namespace

TEST_CASE("reduct removes blocked rules and strips default literals") {
  Program p = parse_program("", "fluents: f. g.\nactions: a.\n"
                                "always: caused f if not g after a. executable a.\n"
                                "goal: f? (1)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 1);

  State empty = make_state(gd, {});
  State with_g = make_state(gd, {code(gd, "g")});
  int f = code(gd, "f");

  auto has_f_rule = [&](const std::vector<GroundRule>& rules) {
    for (const auto& r : rules)
      if (r.head == f) {
        CHECK(r.if_neg.empty());  // default literals are stripped
        return true;
      }
    return false;
  };
  // a not executed: the rule survives the reduct (deletion only looks at
  // default literals), its pre-part is simply unsatisfied
  Transition t1{empty, ActionSet{}, empty};
  CHECK(has_f_rule(reduct(gd, t1)));
  // g in the successor blocks the rule
  Transition t2{empty, acts(gd, {"a"}), with_g};
  CHECK_FALSE(has_f_rule(reduct(gd, t2)));
  // positive rules pass through unchanged
  Transition t3{empty, acts(gd, {"a"}), empty};
  auto rd = reduct(gd, t3);
  CHECK(has_f_rule(rd));
}

TEST_CASE("reduct deletes the bridge inertia rule when the complement holds") {
  auto pr = make_problem({"bridge.bk", "bridge.plan"});
  const GroundDomain& gd = pr.domain;
  int across_joe = code(gd, "across(joe)");
  State from = make_state(gd, {across_joe});
  State to = make_state(gd, {code(gd, "-across(joe)")});
  auto rd = reduct(gd, Transition{from, ActionSet{}, to});
  for (const auto& r : rd) {
    if (r.head != across_joe || !r.dynamic) continue;
    // the inertia rule `caused across(joe) if not -across(joe) after
    // across(joe)` must be gone; surviving across(joe) rules come from
    // crossings
    CHECK_FALSE(r.after_pos_act.empty());
  }
}

TEST_CASE("bridge has exactly one legal initial state") {
  auto pr = make_problem({"bridge.bk", "bridge.plan"});
  const GroundDomain& gd = pr.domain;
  auto states = legal_initial_states(gd);
  REQUIRE(states.size() == 1);
  const State& s0 = states[0];
  CHECK(has_lit(gd, s0, "-across(joe)"));
  CHECK(has_lit(gd, s0, "-across(averell)"));
  CHECK(has_lit(gd, s0, "hasLamp(joe)"));
  CHECK_FALSE(has_lit(gd, s0, "hasLamp(jack)"));
  CHECK_FALSE(has_lit(gd, s0, "-hasLamp(jack)"));  // unknown, not false
  CHECK_FALSE(has_lit(gd, s0, "differentSides(joe,jack)"));
  CHECK(state_consistent(s0));
}

TEST_CASE("total-lamp variant has 15 legal initial states") {
  auto pr = make_problem({"bridge.bk", "bridge_total.plan"});
  auto states = legal_initial_states(pr.domain);
  CHECK(states.size() == 15);  // all lamp subsets except the empty one
  for (const auto& s : states) {
    bool someone = false;
    for (const char* p : {"joe", "jack", "william", "averell"})
      if (has_lit(pr.domain, s, std::string("hasLamp(") + p + ")")) someone = true;
    CHECK(someone);
    CHECK(has_lit(pr.domain, s, "-across(joe)"));
  }
}

TEST_CASE("an initial false constraint kills every candidate") {
  Program p = parse_program("", "fluents: f.\ninitially: caused false.\ngoal: f? (0)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 0);
  CHECK(legal_initial_states(gd).empty());
}

TEST_CASE("executable action sets in the bridge initial state") {
  auto pr = make_problem({"bridge.bk", "bridge.plan"});
  const GroundDomain& gd = pr.domain;
  State s0 = legal_initial_states(gd)[0];
  auto sets = executable_action_sets(gd, s0);
  // noConcurrency: the empty set and singletons only
  REQUIRE(!sets.empty());
  CHECK(sets[0].ids.empty());
  std::set<std::string> names;
  for (const auto& a : sets) {
    CHECK(a.ids.size() <= 1);
    if (a.ids.size() == 1) names.insert(gd.action_name(a.ids[0]));
  }
  // joe has the lamp: his crossings plus every takeLamp
  std::set<std::string> expected = {
      "takeLamp(joe)", "takeLamp(jack)", "takeLamp(william)", "takeLamp(averell)",
      "cross(joe)", "crossTogether(joe,jack)", "crossTogether(joe,william)",
      "crossTogether(joe,averell)"};
  CHECK(names == expected);
}

TEST_CASE("an action whose precondition is unknown is not executable") {
  Program p = parse_program("", "fluents: hasLamp. f.\nactions: cross.\n"
                                "always: executable cross if hasLamp. caused f after cross.\n"
                                "goal: f? (1)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 1);
  State s = make_state(gd, {});
  auto sets = executable_action_sets(gd, s);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].ids.empty());  // only the empty set
}

TEST_CASE("successor of the first bridge crossing") {
  auto pr = make_problem({"bridge.bk", "bridge.plan"});
  const GroundDomain& gd = pr.domain;
  State s0 = legal_initial_states(gd)[0];
  auto succs = successor_states(gd, s0, acts(gd, {"crossTogether(joe,jack)"}));
  REQUIRE(succs.size() == 1);
  const State& s1 = succs[0];
  CHECK(has_lit(gd, s1, "across(joe)"));
  CHECK(has_lit(gd, s1, "across(jack)"));
  CHECK(has_lit(gd, s1, "-across(william)"));
  CHECK(has_lit(gd, s1, "-across(averell)"));
  CHECK(has_lit(gd, s1, "hasLamp(joe)"));
  CHECK(has_lit(gd, s1, "differentSides(joe,william)"));
  CHECK(has_lit(gd, s1, "differentSides(william,joe)"));
  CHECK_FALSE(has_lit(gd, s1, "differentSides(joe,jack)"));
}

TEST_CASE("total effects branch into two successors") {
  Program p = parse_program("", "fluents: f. g.\nactions: a.\n"
                                "always: executable a. total f after a. caused g after a.\n"
                                "goal: f? (1)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 1);
  State s = make_state(gd, {});
  auto succs = successor_states(gd, s, acts(gd, {"a"}));
  REQUIRE(succs.size() == 2);
  CHECK(has_lit(gd, succs[0], "f"));
  CHECK(has_lit(gd, succs[1], "-f"));
  CHECK(has_lit(gd, succs[0], "g"));
}

TEST_CASE("positive domains have at most one successor and initial state") {
  Program p = parse_program("", "fluents: f. g.\nactions: a.\n"
                                "initially: caused f.\n"
                                "always: executable a. caused g if f after a.\n"
                                "goal: g? (1)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 1);
  auto init = legal_initial_states(gd);
  REQUIRE(init.size() == 1);
  auto succs = successor_states(gd, init[0], acts(gd, {"a"}));
  CHECK(succs.size() == 1);
}

TEST_CASE("the five-step bridge plan is a chain of legal transitions") {
  auto pr = make_problem({"bridge.bk", "bridge.plan"}, 0, 5);
  const GroundDomain& gd = pr.domain;
  auto plan = kcptest::plan_of(gd, {{"crossTogether(joe,jack)"},
                                    {"cross(joe)"},
                                    {"crossTogether(joe,william)"},
                                    {"cross(joe)"},
                                    {"crossTogether(joe,averell)"}});
  State cur = legal_initial_states(gd)[0];
  std::vector<State> visited;
  for (const auto& step : plan) {
    auto succs = successor_states(gd, cur, step);
    REQUIRE(succs.size() == 1);
    Transition t{cur, step, succs[0]};
    CHECK(is_legal_transition(gd, t));
    cur = succs[0];
    visited.push_back(cur);
  }
  CHECK(satisfies_goal(gd, cur));
  // crossing together from different sides has no legal transition: the
  // nonexecutable rule fires as `caused false`
  const State& after_first = visited[0];  // joe and jack across, others not
  auto bad = acts(gd, {"crossTogether(joe,william)"});
  CHECK(is_executable(gd, after_first, bad));  // the lamp condition holds
  CHECK(successor_states(gd, after_first, bad).empty());
  CHECK_FALSE(is_legal_transition(gd, Transition{after_first, bad, after_first}));
  // an inconsistent to-state is never legal
  State incons = cur;
  incons.set(code(gd, "across(joe)"));
  incons.set(code(gd, "-across(joe)"));
  CHECK_FALSE(is_legal_transition(gd, Transition{cur, ActionSet{}, incons}));
}

TEST_CASE("successor enumeration is deterministic and sorted") {
  auto pr = make_problem({"bridge.bk", "bridge_total.plan"});
  auto states = legal_initial_states(pr.domain);
  for (size_t i = 1; i < states.size(); ++i) CHECK(states[i - 1] < states[i]);
  auto again = legal_initial_states(pr.domain);
  CHECK(states == again);
}

TEST_CASE("dependent actions: executability may require other actions in the set") {
  Program p = parse_program("", "fluents: f.\nactions: a. b.\n"
                                "always: executable a. executable b if a.\n"
                                "        caused f after b.\n"
                                "goal: f? (1)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 1);
  State s = make_state(gd, {});
  auto sets = executable_action_sets(gd, s);
  std::vector<ActionSet> expected = {ActionSet{},
                                     ActionSet{{gd.find_action("a")}},
                                     ActionSet{{gd.find_action("a"), gd.find_action("b")}}};
  std::sort(expected.begin(), expected.end());
  CHECK(sets == expected);  // {b} alone is not executable
}

TEST_CASE("dependent actions: default-negated action preconditions block within the set") {
  Program p = parse_program("", "fluents: f.\nactions: a. b.\n"
                                "always: executable a. executable b if not a.\n"
                                "        caused f after b.\n"
                                "goal: f? (1)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 1);
  State s = make_state(gd, {});
  auto sets = executable_action_sets(gd, s);
  std::vector<ActionSet> expected = {ActionSet{},
                                     ActionSet{{gd.find_action("a")}},
                                     ActionSet{{gd.find_action("b")}}};
  std::sort(expected.begin(), expected.end());
  CHECK(sets == expected);  // {a,b} would break b's condition
}
