#ifndef KCP_REWRITE_HPP
#define KCP_REWRITE_HPP

#include <optional>
#include <string>
#include <vector>

#include "kcp/background.hpp"

namespace kcp {

enum class RewriteKind { Beta, Gamma, Delta };

struct RewriteOptions {
  // rename gr/finish with a reserved prefix when the source already uses the
  // names, instead of failing
  bool rename_on_clash = false;
};

struct RewriteResult {
  Program program;  // horizon i+1 query `gr ? (i+1)` included
  RewriteKind kind = RewriteKind::Beta;
  int horizon = 0;           // the bound i
  long long factor = 1;      // delta priority factor F
  long long min_int_bound = 0;  // advisory -N needed if cost values pass through #int
  std::vector<std::string> warnings;
  std::string gr_name = "gr";
  std::string finish_name = "finish";
};

// Shortest plans: fresh gr/finish, `finish costs time`, `not gr` guards on
// executability conditions and causation rules (nonexecutable rules and the
// initially section stay untouched), query gr?(i+1). The source program must
// not carry action costs.
RewriteResult rewrite_beta(const Program& p, int horizon,
                           const BackgroundModel* bg = nullptr,
                           const RewriteOptions& opts = {});

// Shortest among the cheapest: beta plus every original cost C replaced by
// C' where C' = (i+1) * C.
RewriteResult rewrite_gamma(const Program& p, int horizon,
                            const BackgroundModel* bg = nullptr,
                            const RewriteOptions& opts = {});

// Cheapest among the shortest: beta with `finish costs C where C = time * F`.
// F defaults to 1 + the sum of all action costs of all legal instances over
// steps 1..i+1 (requires bg); a user factor below that bound is accepted with
// a warning, one below the single-action floor is rejected.
RewriteResult rewrite_delta(const Program& p, int horizon, const BackgroundModel* bg,
                            std::optional<long long> factor = {},
                            const RewriteOptions& opts = {});

struct DecodedOptimum {
  int steps = 0;        // optimal plan length in the source problem
  long long inner = 0;  // source-problem cost (gamma/delta); 0 for beta
};

// Recovers the source-problem optimum from the rewritten problem's cost* and
// the (1-based) time point at which finish occurs.
DecodedOptimum decode_optimum(const RewriteResult& r, long long opt_cost, int finish_time);

}  // namespace kcp

#endif
