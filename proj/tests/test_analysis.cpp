/*
 * Copyright 2026 The qcafqmc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <random>

#include "doctest.h"
#include "qcafqmc/analysis.hpp"

using namespace qcafqmc;

namespace {

double naive_stderr(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / (x.size() - 1) / x.size());
}

}  // namespace

TEST_CASE("analysis: adjacent-point outlier rule") {
  const std::vector<double> d = {-1.0, -1.01, 1.0, -1.02, -0.99, -0.7};
  const auto keep = filter_outliers(d, 0.2);
  CHECK(keep == std::vector<std::size_t>{0, 1, 3, 4});
  // A step change is not a spike: each side has a close neighbour.
  const std::vector<double> step = {0.0, 0.0, 1.0, 1.0};
  CHECK(filter_outliers(step, 0.2).size() == 4);
}

TEST_CASE("analysis: reblocking recovers sigma/sqrt(n) on i.i.d. data") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(-1.0, 0.01);
  int good = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(4096);
    for (auto& v : x) v = nd(rng);
    const AnalysisResult a = analyze(x, 0);
    const double target = 0.01 / std::sqrt(4096.0);
    good += std::abs(a.std_error - target) <= 0.2 * target;
  }
  CHECK(good >= 18);
}

TEST_CASE("analysis: spike removed without shifting the mean") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(-1.1, 0.002);
  std::vector<double> x(150);
  for (auto& v : x) v = nd(rng);
  const AnalysisResult clean = analyze(x, 50);
  x[70] += 2.0;
  const AnalysisResult a = analyze(x, 50);
  CHECK(a.n_outliers == 1);
  CHECK(a.n_used == 99);
  CHECK(std::abs(a.mean - clean.mean) < clean.std_error);
}

TEST_CASE("analysis: correlated data reblocks above the naive error") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> x(8192);
  double prev = 0.0;
  for (auto& v : x) v = prev = 0.9 * prev + 0.01 * nd(rng);
  const AnalysisResult a = analyze(x, 0);
  CHECK(a.std_error >= naive_stderr(x));
  CHECK(a.block_size > 1);
  const auto lv = reblock(x);
  CHECK(lv.front().block_size == 1);
  CHECK(lv.back().n_blocks >= 2);
}

TEST_CASE("analysis: insufficient data") {
  CHECK_THROWS_AS(analyze(std::vector<double>(52, 0.0), 50), InsufficientDataError);
  CHECK_THROWS_AS(analyze({}, 0), InsufficientDataError);
  CHECK_NOTHROW(analyze(std::vector<double>(53, 0.0), 50));
}
