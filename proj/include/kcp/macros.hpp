#ifndef KCP_MACROS_HPP
#define KCP_MACROS_HPP

#include <vector>

#include "kcp/ast.hpp"

namespace kcp {

// Replaces inertial/default/total/forbidden/nonexecutable by their causation
// rule expansions. The noConcurrency flag stays on the Program; it quantifies
// over legal action instance pairs and is materialized by the grounder.
// Idempotent. Throws SemanticError if `total` is applied to a non-positive
// fluent literal.
Program expand_macros(const Program& p);

// Static validation of an expanded program: rule safety (each variable in a
// default-negated type literal occurs in some literal that is not a
// default-negated type literal) and absence of positive cyclic dependencies
// among actions through executability conditions. Returns one diagnostic per
// violation; empty means valid.
std::vector<Diagnostic> validate(const Program& p);

}  // namespace kcp

#endif
