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


#include "qcafqmc/analysis.hpp"

#include <cmath>
#include <numeric>

namespace qcafqmc {

std::vector<std::size_t> filter_outliers(const std::vector<double>& data, double threshold) {
  std::vector<std::size_t> keep;
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool far_left = i == 0 || std::abs(data[i] - data[i - 1]) >= threshold;
    const bool far_right = i + 1 == n || std::abs(data[i] - data[i + 1]) >= threshold;
    if (n == 1 || !(far_left && far_right)) keep.push_back(i);
  }
  return keep;
}

std::vector<ReblockLevel> reblock(const std::vector<double>& data) {
  std::vector<ReblockLevel> levels;
  std::vector<double> cur = data;
  std::size_t size = 1;
  while (cur.size() >= 2) {
    const double n = static_cast<double>(cur.size());
    const double mean = std::accumulate(cur.begin(), cur.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : cur) ss += (x - mean) * (x - mean);
    ReblockLevel lv;
    lv.block_size = size;
    lv.n_blocks = cur.size();
    lv.mean = mean;
    lv.std_error = std::sqrt(ss / (n - 1.0) / n);
    lv.std_error_error = lv.std_error / std::sqrt(2.0 * (n - 1.0));
    levels.push_back(lv);
    std::vector<double> next(cur.size() / 2);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (cur[2 * i] + cur[2 * i + 1]);
    cur.swap(next);
    size *= 2;
  }
  return levels;
}

std::size_t optimal_level(const std::vector<ReblockLevel>& levels, std::size_t n) {
  if (levels.empty()) throw InsufficientDataError("no reblocking levels");
  const double se0 = levels[0].std_error;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double b = static_cast<double>(levels[k].block_size);
    const double ratio = se0 > 0.0 ? levels[k].std_error / se0 : 1.0;
    if (b * b * b > 2.0 * static_cast<double>(n) * std::pow(ratio, 4)) return k;
  }
  return levels.size() - 1;
}

AnalysisResult analyze(const std::vector<double>& energies, std::size_t n_equil, double threshold) {
  if (energies.size() <= n_equil + 2)
    throw InsufficientDataError("trace has " + std::to_string(energies.size()) + " blocks; need more than " +
                                std::to_string(n_equil + 2));
  const std::vector<double> prod(energies.begin() + static_cast<std::ptrdiff_t>(n_equil), energies.end());
  const auto keep = filter_outliers(prod, threshold);
  if (keep.size() < 3) throw InsufficientDataError("fewer than three blocks survive outlier removal");
  std::vector<double> clean;
  for (auto i : keep) clean.push_back(prod[i]);
  AnalysisResult out;
  out.n_used = clean.size();
  out.n_outliers = prod.size() - clean.size();
  out.levels = reblock(clean);
  const std::size_t k = optimal_level(out.levels, clean.size());
  out.mean = out.levels[0].mean;
  out.std_error = out.levels[k].std_error;
  out.block_size = out.levels[k].block_size;
  return out;
}

}  // namespace qcafqmc
