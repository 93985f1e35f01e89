#ifndef KCP_TRANSLATE_HPP
#define KCP_TRANSLATE_HPP

#include <set>
#include <string>
#include <vector>

#include "kcp/ground.hpp"
#include "kcp/planner.hpp"

namespace kcp {

// Disjunctive logic program with weak constraints (the translation target).
struct LPAtom {
  bool strong_neg = false;
  std::string pred;
  std::vector<Term> args;
};

struct LPLit {
  bool default_neg = false;
  LPAtom atom;
};

struct LPRule {
  std::vector<LPAtom> head;  // empty = strong constraint
  std::vector<LPLit> body;
};

struct WeakConstraint {
  std::vector<LPLit> body;
  Term weight;  // integer constant or a body variable
};

struct LPProgram {
  std::vector<std::string> background_text;  // the background program, verbatim
  std::vector<LPRule> rules;
  std::vector<WeakConstraint> weak;
  std::vector<size_t> cost_rule_indices;  // rules defining cost atoms (Step 7/7a)
  std::vector<std::string> directives;    // minimize[...] lines
  std::string text() const;
};

// Step 0-7 translation to a disjunctive program with weak constraints. The
// program must be validated and macro-expanded; noConcurrency is materialized
// as ground action-pair constraints over the legal instances.
LPProgram translate_lpw(const Program& p, const BackgroundModel& m);

// The minimize-style variant: unified-arity cost/occurs predicates padded
// with 0 up to the maximum action arity, action guess via unstratified
// negation, one minimize directive.
LPProgram translate_minimize(const Program& p, const BackgroundModel& m);

// Time-stamped literal-set encoding of a trajectory: a(t,j-1) for a in A_j,
// f(t,j) for f in s_j.
struct TrajectoryImage {
  std::set<std::pair<std::string, Tuple>> atoms;  // pred ('-' prefix = strong neg), args + stamp
  bool contains(const std::string& pred, const Tuple& t) const {
    return atoms.count({pred, t}) != 0;
  }
};

TrajectoryImage image_of(const GroundDomain& gd, const std::vector<ActionSet>& steps,
                         const Trajectory& witness);

// Sum of weak-constraint violation values against the image plus the cost
// atoms the translation derives from it. Equals the plan cost for images of
// legal goal trajectories. Throws on a non-integer violation weight.
long long weak_cost_of_image(const LPProgram& lp, const BackgroundModel& m,
                             const TrajectoryImage& img);

// Syntax self-check for emitted programs; returns the statement count.
// Throws ParseError when the text does not conform to the rule / constraint /
// weak constraint / minimize grammar.
int parse_lp_text(const std::string& text);

}  // namespace kcp

#endif
