#ifndef KCP_TRANSITION_HPP
#define KCP_TRANSITION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kcp/ground.hpp"

namespace kcp {

// Fixed-width bitset over fluent literal codes. Ordering is lexicographic on
// the sorted literal sequences, so enumeration results have a stable order.
// Up to 192 bits live inline; larger domains spill to the heap.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(int nbits) : n_(nbits), nw_((nbits + 63) / 64) {
    if (nw_ > kInline) heap_.assign(nw_, 0);
  }

  void set(int i) { words()[i >> 6] |= 1ull << (i & 63); }
  void reset(int i) { words()[i >> 6] &= ~(1ull << (i & 63)); }
  bool test(int i) const { return (words()[i >> 6] >> (i & 63)) & 1; }
  int size() const { return n_; }

  int count() const;
  bool intersects(const Bitset& o) const;
  bool contains_all(const Bitset& o) const;  // o subset of this
  void unite(const Bitset& o);

  template <typename Fn>
  void for_each(Fn fn) const {
    const uint64_t* w_ = words();
    for (int wi = 0; wi < nw_; ++wi) {
      uint64_t w = w_[wi];
      while (w) {
        int b = __builtin_ctzll(w);
        fn(wi * 64 + b);
        w &= w - 1;
      }
    }
  }

  bool operator==(const Bitset& o) const {
    if (n_ != o.n_) return false;
    const uint64_t *a = words(), *b = o.words();
    for (int i = 0; i < nw_; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }
  // first-differing-element order: the set owning the smallest differing
  // element comes first
  bool operator<(const Bitset& o) const;
  size_t hash() const;

 private:
  static constexpr int kInline = 3;
  uint64_t* words() { return nw_ <= kInline ? inline_ : heap_.data(); }
  const uint64_t* words() const { return nw_ <= kInline ? inline_ : heap_.data(); }

  int n_ = 0;
  int nw_ = 0;
  uint64_t inline_[kInline] = {0, 0, 0};
  std::vector<uint64_t> heap_;
};

using State = Bitset;

struct StateHash {
  size_t operator()(const State& s) const { return s.hash(); }
};

struct ActionSet {
  std::vector<int> ids;  // sorted, distinct

  bool operator==(const ActionSet&) const = default;
  bool operator<(const ActionSet& o) const { return ids < o.ids; }
};

struct Transition {
  State from;
  ActionSet actions;
  State to;
};

struct TransitionLimits {
  int max_branch_literals = 20;          // successor/initial-state guesses
  long long max_action_subsets = 1 << 21;  // executable set enumeration
};

// consistent: no fluent instance occurs together with its strong negation
bool state_consistent(const State& s);

std::string state_to_string(const GroundDomain& gd, const State& s);
std::string action_set_to_string(const GroundDomain& gd, const ActionSet& a);

State make_state(const GroundDomain& gd, const std::vector<int>& flit_codes);

// Gelfond-Lifschitz style reduction of the causation rules by a transition:
// rules blocked by a default literal true in the transition are deleted, the
// rest are stripped of default literals. Returns positive rules only
// (always-scope rules followed by initial-state constraints).
std::vector<GroundRule> reduct(const GroundDomain& gd, const Transition& t);

// All legal initial states, in Bitset order.
std::vector<State> legal_initial_states(const GroundDomain& gd,
                                        const TransitionLimits& limits = {});

// Every executable action set w.r.t. s (the empty set always qualifies),
// in canonical order. Respects noConcurrency. When `action_costs` is given,
// sets whose summed cost exceeds `cost_cap` are skipped; the planner uses
// per-action minimum costs here so the cap stays sound across time points.
std::vector<ActionSet> executable_action_sets(const GroundDomain& gd, const State& s,
                                              const TransitionLimits& limits = {},
                                              const std::vector<long long>* action_costs = nullptr,
                                              long long cost_cap = 0);

// All states s' making <s, a, s'> a legal transition, assuming a is
// executable w.r.t. s. Empty result means the transition is blocked.
std::vector<State> successor_states(const GroundDomain& gd, const State& s, const ActionSet& a,
                                    const TransitionLimits& limits = {});

bool is_executable(const GroundDomain& gd, const State& s, const ActionSet& a);

bool is_legal_transition(const GroundDomain& gd, const Transition& t,
                         const TransitionLimits& limits = {});

bool satisfies_goal(const GroundDomain& gd, const State& s);

}  // namespace kcp

#endif
