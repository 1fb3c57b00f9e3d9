// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "support/oracles.hpp"

namespace {

void check_all_groups(const doorinet::nn::Architecture& arch, std::uint64_t seed) {
  const std::vector<oracle::GroupError> groups = oracle::gradient_check(arch, seed);
  REQUIRE(groups.size() == doorinet::nn::ParameterLayout(arch).tensors().size());
  for (const oracle::GroupError& g : groups) {
    INFO(g.name << " rel " << g.max_rel << " abs " << g.max_abs);
    CHECK(g.max_rel < 1e-4);
    CHECK(g.grad_scale > 0.0);
  }
}

}  // namespace

TEST_CASE("finite differences agree with backprop on the gyro-only model") {
  check_all_groups(oracle::shrunk_g(), 7);
  check_all_groups(oracle::shrunk_g(), 8);
}

TEST_CASE("finite differences agree with backprop on the two-head model") {
  check_all_groups(oracle::shrunk_ag(), 7);
}

TEST_CASE("shrunk models carry dropout, and the check also passes without it") {
  doorinet::nn::Architecture a = oracle::shrunk_ag();
  bool any = false;
  for (auto& f : a.fc) {
    any = any || f.dropout > 0.0;
    f.dropout = 0.0;
  }
  CHECK(any);
  check_all_groups(a, 21);
}
