#ifndef KCP_TEST_HELPERS_HPP
#define KCP_TEST_HELPERS_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kcp/background.hpp"
#include "kcp/ground.hpp"
#include "kcp/macros.hpp"
#include "kcp/parser.hpp"
#include "kcp/planner.hpp"

namespace kcptest {

inline std::string fixture_path(const std::string& name) {
  return std::string(KCP_FIXTURES) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline kcp::Program load_fixture(const std::vector<std::string>& names) {
  std::vector<kcp::SourceText> sources;
  for (const auto& n : names) sources.push_back({n, slurp(fixture_path(n))});
  return kcp::parse_program(sources);
}

struct Problem {
  kcp::Program program;
  kcp::BackgroundModel model;
  kcp::GroundDomain domain;
};

inline Problem make_problem(const std::vector<std::string>& fixtures, long long int_bound = 0,
                            int plan_length = -1) {
  kcp::Program p = load_fixture(fixtures);
  if (plan_length >= 0 && p.query) p.query->plan_length = plan_length;
  p = kcp::expand_macros(p);
  REQUIRE(kcp::validate(p).empty());
  kcp::BackgroundModel m = kcp::evaluate_background(p, int_bound);
  int l = p.query ? p.query->plan_length : 0;
  kcp::GroundDomain gd = kcp::ground(p, m, l);
  return {std::move(p), std::move(m), std::move(gd)};
}

// action set from instance names, e.g. {"cross(joe)"}
inline kcp::ActionSet acts(const kcp::GroundDomain& gd, const std::vector<std::string>& names) {
  kcp::ActionSet a;
  for (const auto& n : names) {
    int id = gd.find_action(n);
    REQUIRE(id >= 0);
    a.ids.push_back(id);
  }
  std::sort(a.ids.begin(), a.ids.end());
  return a;
}

inline std::vector<kcp::ActionSet> plan_of(const kcp::GroundDomain& gd,
                                           const std::vector<std::vector<std::string>>& steps) {
  std::vector<kcp::ActionSet> out;
  for (const auto& s : steps) out.push_back(acts(gd, s));
  return out;
}

}  // namespace kcptest

#endif
