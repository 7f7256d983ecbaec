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


// Post-processing of block-energy traces.

#pragma once

#include <vector>

#include "qcafqmc/common.hpp"

namespace qcafqmc {

/// Indices of points kept by the adjacent-point rule: a point is an outlier
/// when it differs by at least `threshold` from every neighbour.
std::vector<std::size_t> filter_outliers(const std::vector<double>& data, double threshold = 0.2);

struct ReblockLevel {
  std::size_t block_size = 1;
  std::size_t n_blocks = 0;
  double mean = 0.0;
  double std_error = 0.0;
  /// Uncertainty of std_error itself.
  double std_error_error = 0.0;
};

/// Successive pairwise averaging down to two blocks.
std::vector<ReblockLevel> reblock(const std::vector<double>& data);

/// Smallest level with block_size^3 > 2 n (se_k / se_0)^4; the last level if none.
std::size_t optimal_level(const std::vector<ReblockLevel>& levels, std::size_t n);

struct AnalysisResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_used = 0;
  std::size_t n_outliers = 0;
  std::size_t block_size = 1;
  std::vector<ReblockLevel> levels;
};

/// Drops `n_equil` leading points, removes outliers and reblocks. Throws
/// InsufficientDataError with fewer than three points left.
AnalysisResult analyze(const std::vector<double>& energies, std::size_t n_equil = 50, double threshold = 0.2);

}  // namespace qcafqmc
