#ifndef KCP_BACKGROUND_HPP
#define KCP_BACKGROUND_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kcp/ast.hpp"

namespace kcp {

// Ground value: a bounded integer or an interned symbolic constant.
// Built-in comparisons order integers numerically before all symbols;
// symbols are ordered by first appearance in the input.
struct GVal {
  bool is_int = false;
  long long num = 0;
  int sym = -1;

  static GVal integer(long long v) { return {true, v, -1}; }
  static GVal symbol(int id) { return {false, 0, id}; }

  bool operator==(const GVal& o) const {
    return is_int == o.is_int && (is_int ? num == o.num : sym == o.sym);
  }
  bool operator<(const GVal& o) const {
    if (is_int != o.is_int) return is_int;  // integers before symbols
    return is_int ? num < o.num : sym < o.sym;
  }
};

using Tuple = std::vector<GVal>;

struct TupleHash {
  size_t operator()(const Tuple& t) const {
    size_t h = 0xcbf29ce484222325ull;
    for (const auto& v : t) {
      h = (h ^ static_cast<size_t>(v.is_int ? v.num * 2 + 1 : v.sym * 2)) * 0x100000001b3ull;
    }
    return h;
  }
};

class ConstPool {
 public:
  int intern(const std::string& s) {
    auto it = ids_.find(s);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    names_.push_back(s);
    ids_.emplace(s, id);
    return id;
  }
  int lookup(const std::string& s) const {
    auto it = ids_.find(s);
    return it == ids_.end() ? -1 : it->second;
  }
  const std::string& name(int id) const { return names_[id]; }
  size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

struct GroundAtom {
  std::string pred;  // strong negation folded into the name as a '-' prefix
  Tuple args;

  bool operator==(const GroundAtom&) const = default;
};

using Relation = std::unordered_set<Tuple, TupleHash>;

// The unique model M of the background knowledge plus the bounded integer
// domain. Immutable once built; safe to share across threads.
class BackgroundModel {
 public:
  long long int_bound() const { return int_bound_; }
  const ConstPool& pool() const { return pool_; }

  // Membership of a ground non-built-in atom in M.
  bool contains(const std::string& pred, const Tuple& args) const;

  // Truth of a ground atom, built-ins included. Arithmetic results are exact;
  // #int is bounded by int_bound. Throws SemanticError on non-ground input.
  bool holds(const Atom& ground_atom) const;

  const Relation* relation(const std::string& pred, int arity) const;

  GVal to_gval(const Term& ground_term) const;  // symbol must be interned
  std::string to_string(const GVal&) const;
  std::string atom_to_string(const std::string& pred, const Tuple& args) const;

 private:
  friend BackgroundModel evaluate_background(const std::vector<BgRule>&, long long,
                                             const Program*);
  std::map<std::pair<std::string, int>, Relation> rels_;
  ConstPool pool_;
  long long int_bound_ = 0;
};

// Computes the total well-founded model of the background rules (stratified
// fast path, alternating fixpoint otherwise). Throws SemanticError when the
// model is not total, on inconsistency through strong negation, or on unsafe
// built-in use. When `full_program` is given, every constant in it is
// interned up front so downstream comparisons see input order.
BackgroundModel evaluate_background(const std::vector<BgRule>& rules, long long int_bound,
                                    const Program* full_program = nullptr);

inline BackgroundModel evaluate_background(const Program& p, long long int_bound) {
  return evaluate_background(p.background, int_bound, &p);
}

using Binding = std::map<std::string, GVal>;

// Generic body-join evaluation: positive literals enumerate tuples from `db`,
// default-negated literals are checked against `neg` once ground, built-ins
// solve or filter. Literals are reordered so each step has its inputs bound;
// an unsatisfiable ordering raises SemanticError (unsafe body).
struct JoinSource {
  std::function<const Relation*(const std::string&, int)> db;
  std::function<bool(const std::string&, const Tuple&)> neg;
  const ConstPool* pool;
  long long int_bound;
  bool bounded_results;  // cap computed arithmetic results at int_bound
};
void join_literals(const JoinSource& src, const std::vector<Literal>& lits, Binding& binding,
                   const std::function<void()>& fn);

// Evaluates a conjunction of type literals and built-ins against M, extending
// `binding` in all possible ways and invoking `fn` for each complete match.
// Used by the grounder, the cost evaluator, and the translator's
// weak-constraint evaluation. Arithmetic results here are exact (not capped).
void match_type_literals(const BackgroundModel& m, const std::vector<Literal>& lits,
                         Binding& binding, const std::function<void(const Binding&)>& fn);

}  // namespace kcp

#endif
