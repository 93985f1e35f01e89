#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "kcp/macros.hpp"
#include "kcp/planner.hpp"
#include "kcp/rewrite.hpp"

using namespace kcp;
using kcptest::load_fixture;
using kcptest::make_problem;

namespace {

struct Solved {
  GroundDomain domain;
  PlanSearchResult result;
  int finish_time = 0;
};

Solved solve_rewritten(const RewriteResult& rw, const BackgroundModel& m, bool secure = false) {
  Program q = expand_macros(rw.program);
  REQUIRE(validate(q).empty());
  GroundDomain gd = ground(q, m, rw.horizon + 1);
  REQUIRE(check_well_defined(gd, rw.horizon + 1).empty());
  PlanSearchResult res = secure ? find_optimal_secure_plans(gd, Mode::Any, std::nullopt)
                                : find_optimal_plans(gd, Mode::Any);
  Solved s{std::move(gd), std::move(res), 0};
  if (s.result.found) {
    int finish = s.domain.find_action(rw.finish_name);
    for (size_t j = 0; j < s.result.plans[0].steps.size(); ++j)
      for (int a : s.result.plans[0].steps[j].ids)
        if (a == finish) s.finish_time = static_cast<int>(j) + 1;
  }
  return s;
}

// every goal-reaching plan of length <= max_len, by exhaustive search
std::set<std::pair<int, long long>> plans_by_length(const GroundDomain& gd, int max_len) {
  std::set<std::pair<int, long long>> out;  // (length, cost)
  auto rec = [&](auto&& self, const State& s, int depth, long long cost) -> void {
    if (satisfies_goal(gd, s)) out.insert({depth, cost});
    if (depth == max_len) return;
    for (const auto& a : executable_action_sets(gd, s)) {
      long long c = 0;
      for (int id : a.ids) c += gd.cost(id, depth + 1);
      for (const auto& s2 : successor_states(gd, s, a)) self(self, s2, depth + 1, cost + c);
    }
  };
  for (const auto& s0 : legal_initial_states(gd)) rec(rec, s0, 0, 0);
  return out;
}

}  // namespace

TEST_CASE("beta rejects source programs with action costs") {
  Program p = load_fixture({"blocks.bk", "blocks.plan"});
  CHECK_THROWS_AS(rewrite_beta(p, 6), SemanticError);
}

TEST_CASE("beta rejects a gr/finish clash unless renaming is enabled") {
  Program p = parse_program("", "fluents: gr.\nactions: a.\n"
                                "always: executable a. caused gr after a.\n"
                                "goal: gr? (1)");
  CHECK_THROWS_AS(rewrite_beta(p, 2), SemanticError);
  RewriteOptions opts;
  opts.rename_on_clash = true;
  RewriteResult rw = rewrite_beta(p, 2, nullptr, opts);
  CHECK(rw.gr_name == "kc_gr");
  CHECK(rw.program.find_fluent("kc_gr") != nullptr);
}

TEST_CASE("gamma on the blocks instance reproduces the displayed rewriting") {
  Program p = load_fixture({"blocks.bk", "blocks.plan"});
  RewriteResult rw = rewrite_gamma(p, 6);
  std::string text = print_program(rw.program);
  CHECK(text.find("move(B,L) requires block(B), location(L) costs C where C = 7 * 1.") !=
        std::string::npos);
  CHECK(text.find("finish costs time.") != std::string::npos);
  CHECK(text.find("executable finish if on(1,3), on(3,table), on(2,4), on(4,table), "
                  "on(6,5), on(5,table), not gr.") != std::string::npos);
  CHECK(text.find("caused gr after finish.") != std::string::npos);
  CHECK(text.find("caused gr after gr.") != std::string::npos);
  CHECK(text.find("nonexecutable move(B,L) if finish.") != std::string::npos);
  CHECK(text.find("caused on(B,L) if not moved(B), not gr after on(B,L).") != std::string::npos);
  CHECK(text.find("executable move(B,L) if B != L, not gr.") != std::string::npos);
  CHECK(text.find("goal: gr ? (7).") != std::string::npos);
  // nonexecutable rules stay unguarded
  CHECK(text.find("nonexecutable move(B,L) if blocked(B).") != std::string::npos);
  // initially rules stay unguarded
  CHECK(text.find("caused on(1,2).") != std::string::npos);
}

// the full-horizon gamma/delta runs on the six-block instance live in the
// acceptance suite; a tighter bound keeps this one quick
TEST_CASE("gamma optimum on blocks decodes to 5 moves in 3 steps") {
  Program p = load_fixture({"blocks.bk", "blocks.plan"});
  BackgroundModel m = evaluate_background(p, 0);
  RewriteResult rw = rewrite_gamma(p, 4, &m);
  Solved s = solve_rewritten(rw, m);
  REQUIRE(s.result.found);
  CHECK(s.result.best_cost == 29);  // five moves at factor 5 plus finish at 4
  CHECK(s.finish_time == 4);
  auto dec = decode_optimum(rw, s.result.best_cost, s.finish_time);
  CHECK(dec.inner == 5);   // minimum number of moves
  CHECK(dec.steps == 3);   // needed steps for five moves
}

TEST_CASE("delta optimum on blocks decodes to 6 moves in 2 steps") {
  Program p = load_fixture({"blocks.bk", "blocks.plan"});
  BackgroundModel m = evaluate_background(p, 0);
  RewriteResult rw = rewrite_delta(p, 4, &m, 30);
  CHECK(rw.factor == 30);
  CHECK_FALSE(rw.warnings.empty());  // 30 is below the safe bound
  std::string text = print_program(rw.program);
  CHECK(text.find("finish costs C where C = time * 30.") != std::string::npos);
  Solved s = solve_rewritten(rw, m);
  REQUIRE(s.result.found);
  CHECK(s.result.best_cost == 96);  // six moves plus finish at 3
  CHECK(s.finish_time == 3);
  auto dec = decode_optimum(rw, s.result.best_cost, s.finish_time);
  CHECK(dec.inner == 6);  // six moves
  CHECK(dec.steps == 2);  // in the shortest two steps
}

TEST_CASE("delta default factor is one above the total cost mass") {
  Program p = load_fixture({"blocks.bk", "blocks.plan"});
  BackgroundModel m = evaluate_background(p, 0);
  RewriteResult rw = rewrite_delta(p, 6, &m);
  CHECK(rw.factor == 6 * 7 * 7 + 1);  // 42 legal move instances, cost 1, steps 1..7
  CHECK(rw.warnings.empty());
}

TEST_CASE("delta rejects a factor below the single-action floor") {
  Program p = load_fixture({"blocks.bk", "blocks.plan"});
  BackgroundModel m = evaluate_background(p, 0);
  CHECK_THROWS_AS(rewrite_delta(p, 6, &m, 1), SemanticError);
}

TEST_CASE("rewritten programs validate") {
  Program p = load_fixture({"bridge.bk", "bridge_nocost.plan"});
  for (auto kind : {RewriteKind::Beta, RewriteKind::Gamma}) {
    RewriteResult rw = kind == RewriteKind::Beta ? rewrite_beta(p, 6) : rewrite_gamma(p, 6);
    Program q = expand_macros(rw.program);
    CHECK(validate(q).empty());
  }
}

TEST_CASE("Prop 5.1: the beta optimum equals the least feasible plan length") {
  auto check_beta = [](const std::vector<std::string>& fixtures, int horizon) {
    Program p = load_fixture(fixtures);
    BackgroundModel m = evaluate_background(p, 0);
    RewriteResult rw = rewrite_beta(p, horizon, &m);
    Solved s = solve_rewritten(rw, m);
    REQUIRE(s.result.found);
    // optimal beta plans finish right after the goal is first reachable
    auto dec = decode_optimum(rw, s.result.best_cost, s.finish_time);
    CHECK(s.result.best_cost == s.finish_time);  // finish costs its time point

    // reference: iterative deepening over the source problem
    Program src = expand_macros(p);
    REQUIRE(validate(src).empty());
    int least = -1;
    for (int l = 0; l <= horizon && least < 0; ++l) {
      src.query->plan_length = l;
      GroundDomain gd = ground(src, m, l);
      if (find_optimistic_plans(gd, Mode::Any, std::nullopt).found) least = l;
    }
    REQUIRE(least >= 0);
    CHECK(dec.steps == least);
    // the optimal plan has the Prop 5.1 shape: finish once, then voids
    const auto& steps = s.result.plans[0].steps;
    for (size_t j = s.finish_time; j < steps.size(); ++j) CHECK(steps[j].ids.empty());
  };
  check_beta({"blocks4.bk", "blocks4_nocost.plan"}, 4);
  check_beta({"bridge.bk", "bridge_nocost.plan"}, 6);
}

TEST_CASE("Prop 5.2 and 5.3 correspondences on the four-block instance") {
  Program p = load_fixture({"blocks4.bk", "blocks4.plan"});
  BackgroundModel m = evaluate_background(p, 0);
  const int horizon = 4;

  // reference: enumerate goal-reaching plans of every length <= horizon
  Program src = expand_macros(p);
  GroundDomain base = ground(src, m, horizon);
  auto reference = plans_by_length(base, horizon);
  REQUIRE(!reference.empty());
  long long min_cost = 1ll << 60;
  int min_len = 1 << 30;
  for (auto [len, cost] : reference) {
    min_cost = std::min(min_cost, cost);
    min_len = std::min(min_len, len);
  }
  int shortest_among_cheapest = 1 << 30;
  for (auto [len, cost] : reference)
    if (cost == min_cost) shortest_among_cheapest = std::min(shortest_among_cheapest, len);
  long long cheapest_among_shortest = 1ll << 60;
  for (auto [len, cost] : reference)
    if (len == min_len) cheapest_among_shortest = std::min(cheapest_among_shortest, cost);

  RewriteResult gamma = rewrite_gamma(p, horizon, &m);
  Solved sg = solve_rewritten(gamma, m);
  REQUIRE(sg.result.found);
  auto dg = decode_optimum(gamma, sg.result.best_cost, sg.finish_time);
  CHECK(dg.inner == min_cost);
  CHECK(dg.steps == shortest_among_cheapest);

  RewriteResult delta = rewrite_delta(p, horizon, &m);
  Solved sd = solve_rewritten(delta, m);
  REQUIRE(sd.result.found);
  auto dd = decode_optimum(delta, sd.result.best_cost, sd.finish_time);
  CHECK(dd.steps == min_len);
  CHECK(dd.inner == cheapest_among_shortest);
}

TEST_CASE("beta works for secure planning on the total-lamp bridge") {
  Program p = load_fixture({"bridge.bk", "bridge_total_nocost.plan"});
  BackgroundModel m = evaluate_background(p, 0);
  RewriteResult rw = rewrite_beta(p, 8, &m);

  Solved optimistic = solve_rewritten(rw, m, false);
  REQUIRE(optimistic.result.found);
  auto dopt = decode_optimum(rw, optimistic.result.best_cost, optimistic.finish_time);
  // from the initial state where both pairs hold lamps, two crossTogether
  // steps suffice
  CHECK(dopt.steps == 2);

  Solved secure = solve_rewritten(rw, m, true);
  REQUIRE(secure.result.found);
  auto dsec = decode_optimum(rw, secure.result.best_cost, secure.finish_time);
  // one initial takeLamp makes the lamp holder known; then the five-step
  // ferry works from every initial situation
  CHECK(dsec.steps == 6);
}

TEST_CASE("gamma reports the integer bound its products may need") {
  Program p = load_fixture({"blocks.bk", "blocks.plan"});
  BackgroundModel m = evaluate_background(p, 0);
  RewriteResult rw = rewrite_gamma(p, 6, &m);
  CHECK(rw.min_int_bound == 7);  // max original cost 1 times (i+1)
}

TEST_CASE("beta with horizon 0 on an initially satisfied goal: finish alone, cost 1") {
  Program p = parse_program("", "fluents: f.\nactions: a.\n"
                                "initially: caused f.\n"
                                "always: executable a. caused f after a.\n"
                                "goal: f? (0)");
  BackgroundModel m = evaluate_background(p, 0);
  RewriteResult rw = rewrite_beta(p, 0, &m);
  Solved s = solve_rewritten(rw, m);
  REQUIRE(s.result.found);
  CHECK(s.result.best_cost == 1);
  CHECK(s.finish_time == 1);
  REQUIRE(s.result.plans[0].steps.size() == 1);
  CHECK(s.result.plans[0].steps[0].ids ==
        std::vector<int>{s.domain.find_action(rw.finish_name)});
}
