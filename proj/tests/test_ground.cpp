#include "doctest.h"
#include "helpers.hpp"
#include "kcp/ground.hpp"

using namespace kcp;
using kcptest::make_problem;

TEST_CASE("bridge instance counts follow the type declarations") {
  auto pr = make_problem({"bridge.bk", "bridge.plan"});
  const GroundDomain& gd = pr.domain;
  int cross = 0, together = 0, take = 0, across = 0, different = 0;
  for (int a = 0; a < gd.action_count(); ++a) {
    const auto& name = gd.action_name(a);
    if (name.rfind("crossTogether", 0) == 0) together++;
    else if (name.rfind("cross", 0) == 0) cross++;
    else take++;
  }
  for (int f = 0; f < gd.fluent_count(); ++f) {
    const auto& name = gd.fluent_name(f);
    if (name.rfind("across", 0) == 0) across++;
    if (name.rfind("differentSides", 0) == 0) different++;
  }
  CHECK(cross == 4);
  CHECK(together == 6);  // X < Y filters the pairs
  CHECK(take == 4);
  CHECK(across == 4);
  CHECK(different == 16);
  // first-appearance order makes these the legal instances
  CHECK(gd.find_action("crossTogether(joe,jack)") >= 0);
  CHECK(gd.find_action("crossTogether(william,averell)") >= 0);
  CHECK(gd.find_action("crossTogether(jack,joe)") < 0);
}

TEST_CASE("bridge action costs") {
  auto pr = make_problem({"bridge.bk", "bridge.plan"});
  const GroundDomain& gd = pr.domain;
  CHECK(check_well_defined(gd, 7).empty());
  CHECK(action_cost(gd, gd.find_action("crossTogether(joe,averell)"), 1) == 10);
  CHECK(action_cost(gd, gd.find_action("crossTogether(joe,averell)"), 5) == 10);
  CHECK(action_cost(gd, gd.find_action("takeLamp(william)"), 1) == 0);
  CHECK(action_cost(gd, gd.find_action("cross(jack)"), 3) == 2);
}

TEST_CASE("TSP weekday costs are time dependent") {
  auto pr = make_problem({"tsp.bk", "tsp_costs.bk", "tsp_exc.bk", "tsp_weekday.plan"}, 10);
  const GroundDomain& gd = pr.domain;
  CHECK(check_well_defined(gd, 9).empty());
  int travel = gd.find_action("travel(stp,eis)");
  REQUIRE(travel >= 0);
  CHECK(action_cost(gd, travel, 2) == 10);  // Tuesday traffic jam
  CHECK(action_cost(gd, travel, 1) == 2);
  CHECK(action_cost(gd, travel, 9) == 10);  // day 9 is a Tuesday again
  int rev = gd.find_action("travel(eis,stp)");
  CHECK(action_cost(gd, rev, 2) == 2);  // exceptions are not bidirectional
}

TEST_CASE("well-definedness: conflicting witnesses") {
  Program p = parse_program("q(1). r(1,2). r(1,3).",
                            "fluents: f.\n"
                            "actions: a(X) requires q(X) costs C where r(X,C).\n"
                            "goal: f? (2)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 2);
  auto diags = check_well_defined(gd, 2);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].message.find("conflicting costs {2, 3}") != std::string::npos);
  CHECK_THROWS_AS(action_cost(gd, gd.find_action("a(1)"), 1), SemanticError);
}

TEST_CASE("well-definedness: no witness with a defined cost") {
  Program p = parse_program("q(1).",
                            "fluents: f.\n"
                            "actions: a(X) requires q(X) costs C where r(X,C).\n"
                            "goal: f? (2)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 2);
  auto diags = check_well_defined(gd, 2);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].message.find("no witness") != std::string::npos);
}

TEST_CASE("val maps a symbolic cost constant to 0") {
  Program p = parse_program("q(1). r(1,cheap).",
                            "fluents: f.\n"
                            "actions: a(X) requires q(X) costs C where r(X,C).\n"
                            "goal: f? (2)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundDomain gd = ground(p, m, 2);
  CHECK(check_well_defined(gd, 2).empty());
  CHECK(action_cost(gd, gd.find_action("a(1)"), 1) == 0);
}

TEST_CASE("noConcurrency materializes one constraint per action pair") {
  auto pr = make_problem({"bridge.bk", "bridge.plan"});
  const GroundDomain& gd = pr.domain;
  int n = gd.action_count();
  int pair_rules = 0;
  for (const auto& r : gd.rules())
    if (r.head < 0 && r.dynamic && r.if_pos.empty() && r.if_neg.empty() &&
        r.after_pos_act.size() == 2 && r.after_pos_fl.empty() && r.after_neg_fl.empty())
      pair_rules++;
  CHECK(pair_rules >= n * (n - 1) / 2);
}

TEST_CASE("type literals are resolved during grounding") {
  auto pr = make_problem({"blocks.bk", "blocks.plan"});
  const GroundDomain& gd = pr.domain;
  // moves onto the table never conflict through the same-target rule, since
  // block(L) fails for the table
  int b1 = gd.find_action("move(1,table)");
  int b3 = gd.find_action("move(3,table)");
  REQUIRE(b1 >= 0);
  REQUIRE(b3 >= 0);
  bool same_target_conflict = false;
  for (const auto& r : gd.rules()) {
    if (r.head < 0 && r.after_pos_act.size() == 2 && r.if_pos.empty() &&
        r.after_pos_fl.empty() && r.after_pos_act[0] == std::min(b1, b3) &&
        r.after_pos_act[1] == std::max(b1, b3))
      same_target_conflict = true;
  }
  CHECK_FALSE(same_target_conflict);
}

TEST_CASE("instance cap guards against blow-up") {
  Program p = parse_program("n(1). n(2). n(3). n(4). n(5). n(6). n(7). n(8).",
                            "fluents: f(A,B,C,D) requires n(A), n(B), n(C), n(D).\n"
                            "always: caused f(A,B,C,D) if f(B,A,C,D).\n"
                            "goal: f(1,1,1,1)? (1)");
  p = expand_macros(p);
  BackgroundModel m = evaluate_background(p, 0);
  GroundOptions opts;
  opts.max_ground_rules = 1000;
  CHECK_THROWS_AS(ground(p, m, 1, opts), SemanticError);
}
