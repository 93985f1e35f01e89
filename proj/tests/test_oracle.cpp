#include "doctest.h"
#include "oracle_suite.hpp"

// Randomized cross-check of successor_states / legal_initial_states against
// the guess-and-check oracle. The acceptance suite runs the full 500-domain
// sweep; here a smaller deterministic sample keeps the unit run fast.
TEST_CASE("micro-domain oracle equivalence") {
  auto st = kcptest::run_oracle_suite(120, /*seed=*/20030917);
  CHECK(st.domains == 120);
  CHECK(st.mismatches == 0);
}
