/*
 * Copyright 2026 The unlead authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "unlead/losses.hpp"
#include "unlead/rng.hpp"

using namespace unlead;
using Catch::Matchers::WithinAbs;

namespace {

PositionDistribution dist(std::vector<double> probs) {
  PositionDistribution d;
  d.probs = std::move(probs);
  return d;
}

}  // namespace

TEST_CASE("summarization loss on hand-checked fixtures", "[losses]") {
  // Indifferent scores on any labels give exactly ln 2.
  REQUIRE_THAT(loss_summarization({0.5, 0.5}, {1, 0}), WithinAbs(std::log(2.0), 1e-12));
  // -(ln 0.9 + ln 0.8) / 2.
  REQUIRE_THAT(loss_summarization({0.9, 0.2}, {1, 0}),
               WithinAbs(0.164252033486018, 1e-12));
  // Confident wrong answers saturate at the clamp, not at infinity.
  const double clamped = loss_summarization({1.0, 0.0}, {0, 1});
  REQUIRE_THAT(clamped, WithinAbs(-std::log(1e-9), 1e-6));
  REQUIRE(std::isfinite(clamped));
}

TEST_CASE("summarization loss input validation", "[losses]") {
  REQUIRE_THROWS_AS(loss_summarization({0.5}, {1, 0}), Error);
  REQUIRE_THROWS_AS(loss_summarization({}, {}), Error);
}

TEST_CASE("position loss on hand-checked fixtures", "[losses]") {
  // Uniform over 10 buckets: -ln(1/10) = ln 10.
  std::vector<PositionDistribution> uniform(3, PositionDistribution::uniform(10));
  REQUIRE_THAT(loss_position(uniform, {0, 5, 9}), WithinAbs(std::log(10.0), 1e-12));
  REQUIRE_THAT(loss_position(uniform, {0, 5, 9}), WithinAbs(2.302585092994046, 1e-12));

  // -(ln 0.9 + ln 0.1) / 2.
  std::vector<PositionDistribution> two{dist({0.9, 0.1}), dist({0.9, 0.1})};
  REQUIRE_THAT(loss_position(two, {0, 1}), WithinAbs(1.2039728043259361, 1e-12));

  // Peaked on the right answer: -ln 0.25 with probability 0.25 on the target.
  std::vector<PositionDistribution> q{dist({0.25, 0.25, 0.25, 0.25})};
  REQUIRE_THAT(loss_position(q, {2}), WithinAbs(1.3862943611198906, 1e-12));
}

TEST_CASE("position loss input validation", "[losses]") {
  std::vector<PositionDistribution> one{dist({0.5, 0.5})};
  REQUIRE_THROWS_AS(loss_position(one, {0, 1}), Error);
  REQUIRE_THROWS_AS(loss_position(one, {2}), Error);
  REQUIRE_THROWS_AS(loss_position({}, {}), Error);
}

TEST_CASE("adversarial loss is minimized exactly at the uniform prediction", "[losses]") {
  std::vector<PositionDistribution> uniform(4, PositionDistribution::uniform(10));
  const double at_uniform = loss_adversarial(uniform);
  REQUIRE_THAT(at_uniform, WithinAbs(std::log(10.0), 1e-12));

  // Any non-uniform prediction scores strictly worse (Jensen).
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(10);
    double sum = 0.0;
    for (double& v : p) {
      v = 0.05 + rng.uniform01();
      sum += v;
    }
    for (double& v : p) v /= sum;
    REQUIRE(loss_adversarial({dist(p)}) >= at_uniform - 1e-12);
  }
  std::vector<PositionDistribution> peaked{dist({0.7, 0.1, 0.1, 0.1})};
  REQUIRE(loss_adversarial(peaked) > std::log(4.0) + 1e-3);
  REQUIRE_THROWS_AS(loss_adversarial({}), Error);
}

TEST_CASE("combined loss is the convex blend", "[losses]") {
  REQUIRE_THAT(loss_combined(0.5, 2.3, 0.9), WithinAbs(0.9 * 0.5 + 0.1 * 2.3, 1e-15));
  REQUIRE_THAT(loss_combined(0.5, 2.3, 0.9), WithinAbs(0.68, 1e-12));
  REQUIRE(loss_combined(0.7, 9.9, 1.0) == 0.7);
  REQUIRE(loss_combined(0.7, 9.9, 0.0) == 9.9);
  REQUIRE_THROWS_AS(loss_combined(0.5, 0.5, 1.5), Error);
  REQUIRE_THROWS_AS(loss_combined(0.5, 0.5, -0.1), Error);
}
