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

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "qcafqmc/common.hpp"
#include "qcafqmc/focksim.hpp"

namespace qcafqmc {

/// Q with Q(perm[mu], mu) = signs[mu] and det Q = +1.
struct SignedPermutation {
  std::vector<std::uint16_t> perm;
  std::vector<std::int8_t> signs;

  int dim() const { return static_cast<int>(perm.size()); }
  RMatrix matrix() const;
  /// Permutation parity times the product of signs.
  int determinant() const;
  bool operator==(const SignedPermutation&) const = default;
};

SignedPermutation sample_signed_permutation(std::mt19937_64& rng, int n);

/// C_{|b>} = direct sum over modes of [[0, s_j], [-s_j, 0]], s_j = (-1)^{b_j}.
RMatrix covariance_of(Bitstring b, int n_qubits);

struct ShadowSample {
  SignedPermutation q;
  Bitstring b = 0;
  bool operator==(const ShadowSample&) const = default;
};

/// Q^T C_{|b>} Q of one snapshot, stored as a signed perfect matching:
/// partner[mu] = nu and sign[mu] = C(mu, nu).
struct SnapshotMatching {
  std::vector<std::uint16_t> partner;
  std::vector<std::int8_t> sign;

  RMatrix matrix() const;
  bool operator==(const SnapshotMatching&) const = default;
};

SnapshotMatching snapshot_matching(const ShadowSample& s, int n_qubits);

struct ShadowSet {
  int n_qubits = 0;
  int eta = 0;
  std::uint64_t seed = 0;
  std::string source = "simulator";
  std::vector<ShadowSample> samples;

  bool operator==(const ShadowSet&) const = default;
};

/// Seed of the independent stream used for sample `index`.
std::uint64_t sample_stream_seed(std::uint64_t seed, std::uint64_t index);

/// Draws samples [first, first + count) from per-sample streams, so a set can
/// be extended later without changing the samples it already holds.
void extend_shadows(ShadowSet& set, const TrialState& trial, std::uint64_t count);

ShadowSet collect(const TrialState& trial, std::uint64_t count, std::uint64_t seed);

void save_shadows(const ShadowSet& set, const std::filesystem::path& path);
ShadowSet load_shadows(const std::filesystem::path& path);

}  // namespace qcafqmc
