// Acceptance suite: runs every acceptance check end to end and prints one
// PASS/FAIL line per criterion with the measured wall time. Exits nonzero if
// any check fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kcp/background.hpp"
#include "kcp/ground.hpp"
#include "kcp/macros.hpp"
#include "kcp/parser.hpp"
#include "kcp/planner.hpp"
#include "kcp/rewrite.hpp"
#include "kcp/translate.hpp"
#include "oracle_suite.hpp"

using namespace kcp;

namespace {

std::string fixture(const std::string& name) { return std::string(KCP_FIXTURES) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SemanticError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Problem {
  Program program;
  BackgroundModel model;
  GroundDomain domain;
};

Problem load(const std::vector<std::string>& files, long long int_bound, int plan_length = -1) {
  std::vector<SourceText> src;
  for (const auto& f : files) src.push_back({f, slurp(fixture(f))});
  Program p = parse_program(src);
  if (plan_length >= 0 && p.query) p.query->plan_length = plan_length;
  p = expand_macros(p);
  if (!validate(p).empty()) throw SemanticError("fixture fails validation");
  BackgroundModel m = evaluate_background(p, int_bound);
  int l = p.query ? p.query->plan_length : 0;
  GroundDomain gd = ground(p, m, l);
  return {std::move(p), std::move(m), std::move(gd)};
}

int failures = 0;

// collected for the Theorem 6.1 suite: every plan produced by criteria 1-6
struct Produced {
  std::string label;
  Program program;           // expanded
  const BackgroundModel* model;
  GroundDomain domain;
  std::vector<PlanVerdict> plans;
};
std::vector<Produced> produced;
std::vector<std::unique_ptr<BackgroundModel>> owned_models;

void record(const std::string& label, Problem& pr, const std::vector<PlanVerdict>& plans) {
  owned_models.push_back(std::make_unique<BackgroundModel>(pr.model));
  produced.push_back(
      {label, pr.program, owned_models.back().get(), pr.domain, plans});
}

struct Criterion {
  explicit Criterion(std::string name) : name_(std::move(name)) {
    start_ = std::chrono::steady_clock::now();
  }
  void check(bool ok, const std::string& what) {
    if (!ok) {
      problems_.push_back(what);
    }
  }
  void note(const std::string& n) { notes_.push_back(n); }
  ~Criterion() {
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2fs", secs);
    if (problems_.empty()) {
      std::cout << "[PASS] " << name_ << " (" << buf << ")\n";
    } else {
      failures++;
      std::cout << "[FAIL] " << name_ << " (" << buf << ")\n";
      for (const auto& p : problems_) std::cout << "       " << p << "\n";
    }
    for (const auto& n : notes_) std::cout << "       note: " << n << "\n";
  }
  std::string name_;
  std::vector<std::string> problems_;
  std::vector<std::string> notes_;
  std::chrono::steady_clock::time_point start_;
};

std::string plan_text(const GroundDomain& gd, const std::vector<ActionSet>& steps) {
  std::string s;
  for (const auto& a : steps) s += action_set_to_string(gd, a) + " ";
  return s;
}

void criterion1() {
  Criterion c("criterion 1: bridge crossing optimal costs (19 at l=5, 17 at l=7)");
  Problem p5 = load({"bridge.bk", "bridge.plan"}, 0, 5);
  auto r5 = find_optimal_plans(p5.domain, Mode::All);
  c.check(r5.found && r5.best_cost == 19,
          "expected cost* 19 at l=5, got " + std::to_string(r5.best_cost));
  record("bridge l=5", p5, r5.plans);

  Problem p7 = load({"bridge.bk", "bridge.plan"}, 0, 7);
  auto r7 = find_optimal_plans(p7.domain, Mode::All);
  c.check(r7.found && r7.best_cost == 17,
          "expected cost* 17 at l=7, got " + std::to_string(r7.best_cost));
  record("bridge l=7", p7, r7.plans);
}

void criterion2() {
  Criterion c("criterion 2: secure bridge (no secure plan at l=7; secure cost* 17 at l=8)");
  Problem p7 = load({"bridge.bk", "bridge_total.plan"}, 0, 7);
  auto r7 = find_optimal_secure_plans(p7.domain, Mode::Any, std::nullopt);
  c.check(!r7.found, "a secure plan exists at l=7 with cost " + std::to_string(r7.best_cost) +
                         ": " + (r7.found ? plan_text(p7.domain, r7.plans[0].steps) : ""));
  if (r7.found) {
    c.note("known-defective check: only COST-OPTIMAL (17) secure plans need 8 steps;");
    c.note("a 19-cost 7-step secure plan exists, double-checked by the independent");
    c.note("per-plan security simulation. cost*_sec(7) = " + std::to_string(r7.best_cost) +
           " > 17 = cost*_sec(8), so the length-8 optimum below stays meaningful.");
    c.check(is_secure(p7.domain, r7.plans[0].steps) == SecureStatus::Secure,
            "cross-check failed: belief search returned a plan is_secure rejects");
  }

  Problem p8 = load({"bridge.bk", "bridge_total.plan"}, 0, 8);
  auto r8 = find_optimal_secure_plans(p8.domain, Mode::Any, std::nullopt);
  c.check(r8.found && r8.best_cost == 17,
          "expected secure cost* 17 at l=8, got " + std::to_string(r8.best_cost));
  if (r8.found) {
    c.check(is_secure(p8.domain, r8.plans[0].steps) == SecureStatus::Secure,
            "secure plan fails the independent Def A.15 check");
    record("secure bridge l=8", p8, r8.plans);
  }
}

void criterion3() {
  Criterion c("criterion 3: blocks P0 (cost 6 at l=2, 5 at l=3; deepening finds l=2)");
  Problem p2 = load({"blocks.bk", "blocks.plan"}, 0, 2);
  auto r2 = find_optimal_plans(p2.domain, Mode::Any);
  c.check(r2.found && r2.best_cost == 6,
          "expected cost* 6 at l=2, got " + std::to_string(r2.best_cost));
  record("blocks l=2", p2, r2.plans);

  Problem p3 = load({"blocks.bk", "blocks.plan"}, 0, 3);
  auto r3 = find_optimal_plans(p3.domain, Mode::Any);
  c.check(r3.found && r3.best_cost == 5,
          "expected cost* 5 at l=3, got " + std::to_string(r3.best_cost));
  record("blocks l=3", p3, r3.plans);

  int least = -1;
  for (int l = 0; l <= 6 && least < 0; ++l) {
    Problem pl = load({"blocks.bk", "blocks.plan"}, 0, l);
    if (find_optimistic_plans(pl.domain, Mode::Any, std::nullopt).found) least = l;
  }
  c.check(least == 2, "iterative deepening found l=" + std::to_string(least));
}

void criterion4() {
  Criterion c("criterion 4: blocks rewritings (gamma 39 -> 5 moves/3 steps; delta 132 -> 6/2)");
  std::vector<SourceText> src{{"blocks.bk", slurp(fixture("blocks.bk"))},
                              {"blocks.plan", slurp(fixture("blocks.plan"))}};
  Program surface = parse_program(src);
  BackgroundModel m = evaluate_background(surface, 0);

  auto solve = [&](const RewriteResult& rw, const char* label) {
    Program q = expand_macros(rw.program);
    GroundDomain gd = ground(q, m, rw.horizon + 1);
    auto res = find_optimal_plans(gd, Mode::Any);
    int finish_time = 0;
    if (res.found) {
      int fid = gd.find_action(rw.finish_name);
      for (size_t j = 0; j < res.plans[0].steps.size(); ++j)
        for (int a : res.plans[0].steps[j].ids)
          if (a == fid) finish_time = static_cast<int>(j) + 1;
      Problem pr{std::move(q), m, std::move(gd)};
      record(label, pr, res.plans);
    }
    return std::tuple<bool, long long, int>(res.found, res.found ? res.best_cost : -1,
                                            finish_time);
  };

  RewriteResult gamma = rewrite_gamma(surface, 6, &m);
  auto [gfound, gcost, gfinish] = solve(gamma, "blocks gamma i=6");
  c.check(gfound && gcost == 39, "gamma cost* expected 39, got " + std::to_string(gcost));
  if (gfound) {
    auto dec = decode_optimum(gamma, gcost, gfinish);
    c.check(dec.inner == 5 && dec.steps == 3,
            "gamma decode expected 5 moves / 3 steps, got " + std::to_string(dec.inner) + " / " +
                std::to_string(dec.steps));
  }

  RewriteResult delta = rewrite_delta(surface, 6, &m, 42);
  auto [dfound, dcost, dfinish] = solve(delta, "blocks delta i=6");
  c.check(dfound && dcost == 132, "delta cost* expected 132, got " + std::to_string(dcost));
  if (dfound) {
    auto dec = decode_optimum(delta, dcost, dfinish);
    c.check(dec.inner == 6 && dec.steps == 2,
            "delta decode expected 6 moves / 2 steps, got " + std::to_string(dec.inner) + " / " +
                std::to_string(dec.steps));
  }
}

void criterion5() {
  Criterion c("criterion 5: TSP Austria (15 with 10 plans; exc 15, we 12, lwe 11)");
  Problem base = load({"tsp.bk", "tsp.plan"}, 10);
  auto rb = find_optimal_plans(base.domain, Mode::All);
  c.check(rb.found && rb.best_cost == 15,
          "base cost* expected 15, got " + std::to_string(rb.best_cost));
  c.check(rb.plans.size() == 10,
          "expected exactly 10 optimal tours, got " + std::to_string(rb.plans.size()));
  record("tsp base", base, rb.plans);

  auto variant = [&](const std::string& exc_file, long long want, const char* label) {
    Problem pr = load({"tsp.bk", "tsp_costs.bk", exc_file, "tsp_weekday.plan"}, 10);
    auto r = find_optimal_plans(pr.domain, Mode::Any);
    c.check(r.found && r.best_cost == want,
            std::string(label) + " cost* expected " + std::to_string(want) + ", got " +
                std::to_string(r.best_cost));
    record(label, pr, r.plans);
  };
  variant("tsp_exc.bk", 15, "tsp exc");
  variant("tsp_we.bk", 12, "tsp we");
  variant("tsp_lwe.bk", 11, "tsp lwe");
}

void criterion6() {
  Criterion c("criterion 6: buying (bound 6 -> no admissible plan, exit 1; cost* 7)");
  // exercised through the command line to pin the exit code
  std::string cmd = std::string(KCPLAN_BIN) + " " + fixture("buying.bk") + " " +
                    fixture("buying.plan") + " -N 10 --planlength=1 --costbound=6 >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  c.check(code == 1, "bounded run expected exit 1, got " + std::to_string(code));

  Problem pr = load({"buying.bk", "buying.plan"}, 10);
  auto bounded = find_optimistic_plans(pr.domain, Mode::All, 6);
  c.check(!bounded.found, "no plan admissible wrt. cost 6 may exist");
  auto opt = find_optimal_plans(pr.domain, Mode::All);
  c.check(opt.found && opt.best_cost == 7,
          "expected cost* 7, got " + std::to_string(opt.best_cost));
  record("buying", pr, opt.plans);
}

void criterion7() {
  Criterion c("criterion 7: Theorem 6.1 weak-constraint cost equation over all produced plans");
  int checked = 0;
  for (const auto& pr : produced) {
    LPProgram lp = translate_lpw(pr.program, *pr.model);
    for (const auto& v : pr.plans) {
      TrajectoryImage img = image_of(pr.domain, v.steps, v.witness);
      long long w = weak_cost_of_image(lp, *pr.model, img);
      checked++;
      if (w != v.cost) {
        c.check(false, pr.label + ": weak cost " + std::to_string(w) + " != plan cost " +
                           std::to_string(v.cost));
        return;
      }
    }
  }
  c.check(checked > 0, "no plans were produced");
  c.note(std::to_string(checked) + " plans checked, zero tolerance");
}

void criterion8() {
  Criterion c("criterion 8: successor/initial-state oracle equivalence on 500 micro-domains");
  auto st = kcptest::run_oracle_suite(500, /*seed=*/424242);
  c.check(st.mismatches == 0, std::to_string(st.mismatches) + " mismatches");
  c.note(std::to_string(st.domains) + " domains, " + std::to_string(st.successor_checks) +
         " successor checks, " + std::to_string(st.initial_checks) + " initial-state checks");
}

void criterion9() {
  Criterion c("criterion 9: well-definedness diagnostics");
  {
    Program p = parse_program("q(1). r(1,2). r(1,3).",
                              "fluents: f.\nactions: a(X) requires q(X) costs C where r(X,C).\n"
                              "goal: f? (2)");
    p = expand_macros(p);
    BackgroundModel m = evaluate_background(p, 0);
    GroundDomain gd = ground(p, m, 2);
    c.check(check_well_defined(gd, 2).size() == 1, "conflicting-cost fixture not diagnosed");
  }
  {
    Program p = parse_program("q(1).",
                              "fluents: f.\nactions: a(X) requires q(X) costs C where r(X,C).\n"
                              "goal: f? (2)");
    p = expand_macros(p);
    BackgroundModel m = evaluate_background(p, 0);
    GroundDomain gd = ground(p, m, 2);
    c.check(check_well_defined(gd, 2).size() == 1, "missing-witness fixture not diagnosed");
  }
  auto clean = [&](const std::vector<std::string>& files, long long n) {
    Problem pr = load(files, n);
    bool ok = check_well_defined(pr.domain, pr.domain.plan_length()).empty();
    c.check(ok, files.back() + " unexpectedly ill-defined");
  };
  clean({"bridge.bk", "bridge.plan"}, 0);
  clean({"bridge.bk", "bridge_total.plan"}, 0);
  clean({"blocks.bk", "blocks.plan"}, 0);
  clean({"tsp.bk", "tsp.plan"}, 10);
  clean({"tsp.bk", "tsp_costs.bk", "tsp_exc.bk", "tsp_weekday.plan"}, 10);
  clean({"buying.bk", "buying.plan"}, 10);
}

void criterion10() {
  Criterion c("criterion 10: large instances ship as stress fixtures only");
  // the fixtures must load and ground; no solution values are asserted
  auto loadable = [&](const std::string& bk, const std::string& plan, long long n) {
    try {
      Problem pr = load({bk, plan}, n);
      c.check(pr.domain.action_count() > 0, plan + " grounded to an empty domain");
    } catch (const std::exception& e) {
      c.check(false, plan + ": " + e.what());
    }
  };
  loadable("stress/blocks_p3.bk", "stress/blocks_p3.plan", 0);
  loadable("stress/blocks_p4.bk", "stress/blocks_p4.plan", 0);
  loadable("stress/tsp_eu.bk", "stress/tsp_eu.plan", 20);
  c.note("no pass/fail values are asserted for these, per the stated scope");
}

}  // namespace

int main() {
  try {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance suite aborted: " << e.what() << "\n";
    return 2;
  }
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
