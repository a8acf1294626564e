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

#include <string>
#include <vector>

#include "unlead/rouge.hpp"

using namespace unlead;
using Catch::Matchers::WithinAbs;
using Tokens = std::vector<std::string>;

TEST_CASE("rouge-1 and rouge-2 on a hand-checked pair", "[rouge]") {
  const Tokens cand{"the", "cat", "sat"};
  const Tokens ref{"the", "cat", "ate"};
  REQUIRE_THAT(rouge_n(cand, ref, 1), WithinAbs(2.0 / 3.0, 1e-12));
  REQUIRE_THAT(rouge_n(cand, ref, 2), WithinAbs(0.5, 1e-12));
}

TEST_CASE("rouge-1 clips repeated candidate tokens", "[rouge]") {
  const Tokens cand{"the", "the", "the"};
  const Tokens ref{"the", "cat"};
  // Clipped overlap 1: P = 1/3, R = 1/2, F1 = 0.4.
  REQUIRE_THAT(rouge_n(cand, ref, 1), WithinAbs(0.4, 1e-12));
}

TEST_CASE("rouge-l uses the longest common subsequence", "[rouge]") {
  const Tokens ref{"a", "b", "c", "d", "e", "f"};
  const Tokens cand{"a", "c", "x", "d", "f"};
  // LCS = (a c d f) of length 4: P = 4/5, R = 4/6, F1 = 8/11.
  REQUIRE_THAT(rouge_l(cand, ref), WithinAbs(8.0 / 11.0, 1e-12));

  // Subsequences need not be contiguous.
  const Tokens gappy{"a", "z", "b", "z", "c"};
  const Tokens base{"a", "b", "c"};
  REQUIRE_THAT(rouge_l(gappy, base), WithinAbs(2.0 * (3.0 / 5.0) / (3.0 / 5.0 + 1.0), 1e-12));
}

TEST_CASE("identical sequences score one on every metric", "[rouge]") {
  const Tokens t{"alpha", "beta", "gamma", "delta"};
  const RougeScore s = rouge_all(t, t);
  REQUIRE(s.r1 == 1.0);
  REQUIRE(s.r2 == 1.0);
  REQUIRE(s.rl == 1.0);
  REQUIRE(s.mean() == 1.0);
}

TEST_CASE("disjoint sequences score zero on every metric", "[rouge]") {
  const RougeScore s = rouge_all({"a", "b", "c"}, {"x", "y", "z"});
  REQUIRE(s.r1 == 0.0);
  REQUIRE(s.r2 == 0.0);
  REQUIRE(s.rl == 0.0);
}

TEST_CASE("degenerate inputs give zero instead of dividing by zero", "[rouge]") {
  REQUIRE(rouge_n({}, {"a"}, 1) == 0.0);
  REQUIRE(rouge_n({"a"}, {}, 1) == 0.0);
  REQUIRE(rouge_n({"a"}, {"a"}, 2) == 0.0);  // no bigrams exist
  REQUIRE(rouge_l({}, {}) == 0.0);
}

TEST_CASE("f1 is symmetric in candidate and reference", "[rouge]") {
  const Tokens a{"w1", "w2", "w3", "w4", "w2"};
  const Tokens b{"w2", "w3", "w9"};
  const RougeScore ab = rouge_all(a, b);
  const RougeScore ba = rouge_all(b, a);
  REQUIRE_THAT(ab.r1, WithinAbs(ba.r1, 1e-12));
  REQUIRE_THAT(ab.r2, WithinAbs(ba.r2, 1e-12));
  REQUIRE_THAT(ab.rl, WithinAbs(ba.rl, 1e-12));
}

TEST_CASE("mean averages the three variants", "[rouge]") {
  RougeScore s;
  s.r1 = 0.6;
  s.r2 = 0.3;
  s.rl = 0.6;
  REQUIRE_THAT(s.mean(), WithinAbs(0.5, 1e-12));
}
