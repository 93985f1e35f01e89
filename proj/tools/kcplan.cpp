// Command line driver: solve K^c planning problems, apply the
// shortest/cheapest rewritings, emit the logic-program translation.
//
// Exit codes: 0 = plan(s) found, 1 = no plan under the requested mode,
// 2 = usage, parse, validation, or well-definedness error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "kcp/background.hpp"
#include "kcp/ground.hpp"
#include "kcp/macros.hpp"
#include "kcp/parser.hpp"
#include "kcp/planner.hpp"
#include "kcp/rewrite.hpp"
#include "kcp/translate.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kcp::SemanticError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

kcp::Program load(const std::vector<std::string>& files) {
  std::vector<kcp::SourceText> sources;
  for (const auto& f : files) sources.push_back({f, read_file(f)});
  return kcp::parse_program(sources);
}

std::string format_plan(const kcp::GroundDomain& gd, const kcp::PlanVerdict& v) {
  std::string s = "PLAN:";
  for (size_t j = 0; j < v.steps.size(); ++j) {
    if (j) s += ";";
    for (size_t k = 0; k < v.steps[j].ids.size(); ++k) {
      s += k ? ", " : " ";
      int a = v.steps[j].ids[k];
      s += gd.action_name(a);
      long long c = gd.cost(a, static_cast<int>(j) + 1);
      if (c != 0) s += ":" + std::to_string(c);
    }
  }
  s += " COST: " + std::to_string(v.cost);
  return s;
}

struct SolveConfig {
  std::vector<std::string> files;
  std::optional<int> plan_length;
  std::optional<long long> cost_bound;
  long long int_bound = 0;
  std::string mode = "optimistic";
  bool all = false;
  bool confirm = false;
  std::optional<int> deepen;
};

struct Loaded {
  kcp::Program program;
  kcp::BackgroundModel model;
};

Loaded prepare(const std::vector<std::string>& files, long long int_bound,
               std::optional<int> plan_length) {
  kcp::Program p = load(files);
  if (plan_length && p.query) {
    p.query->plan_length = *plan_length;  // overrides the query-part length
  }
  p = kcp::expand_macros(p);
  auto diags = kcp::validate(p);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "error: " << d.message << "\n";
    throw kcp::SemanticError("validation failed");
  }
  kcp::BackgroundModel m = kcp::evaluate_background(p, int_bound);
  return {std::move(p), std::move(m)};
}

kcp::GroundDomain ground_checked(const kcp::Program& p, const kcp::BackgroundModel& m, int l) {
  kcp::GroundDomain gd = kcp::ground(p, m, l);
  auto diags = kcp::check_well_defined(gd, l);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "error: " << d.message << "\n";
    throw kcp::SemanticError("the planning domain is not well-defined");
  }
  return gd;
}

kcp::PlanSearchResult search(const kcp::GroundDomain& gd, const SolveConfig& cfg) {
  kcp::Mode mode = (cfg.all || cfg.confirm) ? kcp::Mode::All : kcp::Mode::Any;
  if (cfg.mode == "secure") return kcp::find_optimal_secure_plans(gd, mode, cfg.cost_bound);
  if (cfg.cost_bound) return kcp::find_optimistic_plans(gd, mode, cfg.cost_bound);
  return kcp::find_optimal_plans(gd, mode);
}

int report(const kcp::GroundDomain& gd, const SolveConfig& cfg,
           const kcp::PlanSearchResult& res) {
  bool secure = cfg.mode == "secure";
  if (!res.found) {
    if (res.inconclusive)
      std::cout << "INCONCLUSIVE: security check exceeded the state-set cap\n";
    else if (cfg.cost_bound)
      std::cout << (secure ? "NO ADMISSIBLE SECURE PLAN\n" : "NO ADMISSIBLE PLAN\n");
    else
      std::cout << (secure ? "NO SECURE PLAN\n" : "NO PLAN\n");
    return 1;
  }
  for (const auto& v : res.plans) {
    std::cout << format_plan(gd, v) << "\n";
    if (cfg.confirm) {
      std::cerr << "look for further plans? (y/n) ";
      std::string ans;
      if (!std::getline(std::cin, ans) || ans.empty() || ans[0] == 'n' || ans[0] == 'N') break;
    }
  }
  if (!cfg.cost_bound) {
    std::cout << (secure ? "OPTIMAL SECURE COST: " : "OPTIMAL COST: ") << res.best_cost << "\n";
  }
  return 0;
}

int run_solve(const SolveConfig& cfg) {
  Loaded ld = prepare(cfg.files, cfg.int_bound, cfg.plan_length);
  if (!ld.program.query)
    throw kcp::SemanticError("no goal query; the .plan file needs a goal section");
  if (cfg.deepen) {
    for (int l = 0; l <= *cfg.deepen; ++l) {
      ld.program.query->plan_length = l;
      kcp::GroundDomain gd = ground_checked(ld.program, ld.model, l);
      auto res = search(gd, cfg);
      if (res.found) {
        std::cout << "PLAN LENGTH: " << l << "\n";
        return report(gd, cfg, res);
      }
    }
    std::cout << "NO PLAN UP TO LENGTH " << *cfg.deepen << "\n";
    return 1;
  }
  int l = ld.program.query->plan_length;
  kcp::GroundDomain gd = ground_checked(ld.program, ld.model, l);
  if (gd.goal().impossible)
    std::cerr << "warning: a goal literal is not a legal fluent instance; "
                 "the goal is unsatisfiable\n";
  return report(gd, cfg, search(gd, cfg));
}

int run_rewrite(const std::vector<std::string>& files, const std::string& kind, int horizon,
                std::optional<long long> factor, long long int_bound, const std::string& out_path,
                bool solve, const std::string& mode, bool rename) {
  Loaded ld = prepare(files, int_bound, std::nullopt);
  kcp::RewriteOptions opts;
  opts.rename_on_clash = rename;
  // rewriting works on the surface program; re-parse rather than use the
  // expanded one so macros stay readable in the output
  kcp::Program surface = load(files);
  kcp::RewriteResult rw;
  if (kind == "beta") rw = kcp::rewrite_beta(surface, horizon, &ld.model, opts);
  else if (kind == "gamma") rw = kcp::rewrite_gamma(surface, horizon, &ld.model, opts);
  else rw = kcp::rewrite_delta(surface, horizon, &ld.model, factor, opts);
  for (const auto& w : rw.warnings) std::cerr << "warning: " << w << "\n";
  if (rw.min_int_bound > int_bound)
    std::cerr << "note: cost values reach " << rw.min_int_bound
              << "; raise -N accordingly if the program feeds them through #int\n";

  std::string text = kcp::print_program(rw.program);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw kcp::SemanticError("cannot write " + out_path);
    out << text;
  }
  if (!solve) return 0;

  kcp::Program q = kcp::expand_macros(rw.program);
  auto diags = kcp::validate(q);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "error: " << d.message << "\n";
    return 2;
  }
  kcp::GroundDomain gd = ground_checked(q, ld.model, horizon + 1);
  kcp::PlanSearchResult res = mode == "secure"
                                  ? kcp::find_optimal_secure_plans(gd, kcp::Mode::Any, {})
                                  : kcp::find_optimal_plans(gd, kcp::Mode::Any);
  if (!res.found) {
    std::cout << "NO PLAN\n";
    return 1;
  }
  const auto& best = res.plans.front();
  std::cout << format_plan(gd, best) << "\n";
  std::cout << "OPTIMAL COST: " << res.best_cost << "\n";
  int finish_id = gd.find_action(rw.finish_name);
  int finish_time = 0;
  for (size_t j = 0; j < best.steps.size(); ++j)
    for (int a : best.steps[j].ids)
      if (a == finish_id) finish_time = static_cast<int>(j) + 1;
  if (finish_time == 0) {
    std::cerr << "warning: optimal plan does not execute " << rw.finish_name << "\n";
    return 0;
  }
  auto dec = kcp::decode_optimum(rw, res.best_cost, finish_time);
  std::cout << "FINISH TIME: " << finish_time << "\n";
  std::cout << "SOURCE STEPS: " << dec.steps << "\n";
  if (rw.kind != kcp::RewriteKind::Beta) std::cout << "SOURCE COST: " << dec.inner << "\n";
  return 0;
}

int run_translate(const std::vector<std::string>& files, bool minimize, long long int_bound,
                  const std::string& out_path) {
  Loaded ld = prepare(files, int_bound, std::nullopt);
  kcp::LPProgram lp = minimize ? kcp::translate_minimize(ld.program, ld.model)
                               : kcp::translate_lpw(ld.program, ld.model);
  std::string text = lp.text();
  kcp::parse_lp_text(text);  // syntax self-check
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw kcp::SemanticError("cannot write " + out_path);
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kcplan: planning with action costs in the language K^c"};
  app.require_subcommand(0, 1);

  SolveConfig cfg;
  app.add_option("files", cfg.files, "background (.bk) and plan (.plan) files");
  int planlength = -1;
  app.add_option("--planlength", planlength,
                 "plan length; overrides the length in the goal query");
  long long costbound = -1;
  app.add_option("--costbound", costbound, "admissible planning: only plans with cost <= bound");
  app.add_option("--int-bound,-N", cfg.int_bound, "upper bound for #int and derived integers");
  app.add_option("--mode", cfg.mode, "optimistic | secure")
      ->check(CLI::IsMember({"optimistic", "secure"}));
  app.add_flag("--all", cfg.all, "enumerate all (optimal or admissible) plans");
  app.add_flag("--confirm", cfg.confirm, "ask before printing each further plan");
  int deepen = -1;
  app.add_option("--deepen", deepen, "iterative deepening up to this length, starting from 0");

  auto* rw = app.add_subcommand("rewrite", "emit a shortest/cheapest rewriting of the problem");
  std::vector<std::string> rw_files;
  rw->add_option("files", rw_files, "input files")->required();
  bool beta = false, gamma = false, delta = false;
  rw->add_flag("--beta", beta, "shortest plans");
  rw->add_flag("--gamma", gamma, "shortest among the cheapest plans");
  rw->add_flag("--delta", delta, "cheapest among the shortest plans");
  int horizon = -1;
  rw->add_option("--horizon", horizon, "plan length upper bound i")->required();
  long long factor = -1;
  rw->add_option("--factor", factor, "delta priority factor (default: safe bound)");
  std::string rw_out;
  rw->add_option("-o,--output", rw_out, "output .plan file (default: stdout)");
  bool rw_solve = false;
  rw->add_flag("--solve", rw_solve, "also solve the rewritten problem and decode the optimum");
  long long rw_int_bound = 0;
  rw->add_option("--int-bound,-N", rw_int_bound, "integer bound");
  std::string rw_mode = "optimistic";
  rw->add_option("--mode", rw_mode, "optimistic | secure")
      ->check(CLI::IsMember({"optimistic", "secure"}));
  bool rw_rename = false;
  rw->add_flag("--rename-on-clash", rw_rename, "rename gr/finish instead of failing on clash");

  auto* tr = app.add_subcommand("translate", "emit the logic-program translation");
  std::vector<std::string> tr_files;
  tr->add_option("files", tr_files, "input files")->required();
  bool weak = false, minimize = false;
  tr->add_flag("--weak", weak, "disjunctive program with weak constraints");
  tr->add_flag("--minimize", minimize, "minimize-style variant");
  std::string tr_out;
  tr->add_option("-o,--output", tr_out, "output file (default: stdout)");
  long long tr_int_bound = 0;
  tr->add_option("--int-bound,-N", tr_int_bound, "integer bound");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rw->parsed()) {
      if (static_cast<int>(beta) + static_cast<int>(gamma) + static_cast<int>(delta) != 1) {
        std::cerr << "error: choose exactly one of --beta, --gamma, --delta\n";
        return 2;
      }
      std::string kind = beta ? "beta" : gamma ? "gamma" : "delta";
      std::optional<long long> f;
      if (factor >= 0) f = factor;
      return run_rewrite(rw_files, kind, horizon, f, rw_int_bound, rw_out, rw_solve, rw_mode,
                         rw_rename);
    }
    if (tr->parsed()) {
      if (static_cast<int>(weak) + static_cast<int>(minimize) != 1) {
        std::cerr << "error: choose exactly one of --weak, --minimize\n";
        return 2;
      }
      return run_translate(tr_files, minimize, tr_int_bound, tr_out);
    }
    if (cfg.files.empty()) {
      std::cerr << app.help();
      return 2;
    }
    if (planlength >= 0) cfg.plan_length = planlength;
    if (costbound >= 0) cfg.cost_bound = costbound;
    if (deepen >= 0) cfg.deepen = deepen;
    return run_solve(cfg);
  } catch (const kcp::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const kcp::SemanticError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
