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


// Frozen-core embedding of an active-space overlap estimator.
//
// The full-space trial is a^dag_{c_1} ... a^dag_{c_k} |Psi_T^act>, core spin
// orbitals in increasing order, with active mode i mapped to active_so[i].
// For a walker V with core rows Phi_c = U Sigma W^dag (W = [W1 W2]),
//
//   <Psi|phi(V)> = det(U Sigma) F(Phi_a W2) / det(W),
//
// where F is the active-space overlap. Virtual rows never enter.

#pragma once

#include <memory>
#include <vector>

#include "qcafqmc/common.hpp"
#include "qcafqmc/estimator.hpp"
#include "qcafqmc/focksim.hpp"
#include "qcafqmc/integrals.hpp"

namespace qcafqmc {

struct CorePartition {
  int n_full = 0;
  std::vector<int> core;
  std::vector<int> active;
  std::vector<int> virt;

  /// Interleaved spin-orbital indices of the core and active spaces.
  std::vector<int> core_so() const;
  std::vector<int> active_so() const;
  int n_full_modes() const { return 2 * n_full; }
  int n_active_modes() const { return 2 * static_cast<int>(active.size()); }
  int n_core_elec() const { return 2 * static_cast<int>(core.size()); }
  /// Xi_c: N x k matrix of unit columns on the core spin orbitals.
  RMatrix core_occupancy() const;
};

/// Validates the lists (disjoint, in range) and fills `virt` with the rest.
CorePartition make_partition(int n_full, const std::vector<int>& core, const std::vector<int>& active);
CorePartition partition_of(const EmbeddedSystem& sys);

/// Dense full-space trial for a dense active state.
FockState embed_trial(const FockState& active, const CorePartition& part);

/// Factors of the embedding for one walker, kept for diagnostics.
struct CoreFactorization {
  /// det(U Sigma) / det(W).
  complex_t core_factor;
  RVector singular_values;
  /// Active-space walker Phi_a W2.
  CMatrix active_walker;
};

/// Throws DecoupledCoreError when a core singular value drops below 1e-10
/// relative to the walker scale.
CoreFactorization factor_core(const CMatrix& v, const CorePartition& part);

/// <Psi_T|phi> through the active-space overlap `active_overlap`.
template <typename Fn>
complex_t embed_overlap(const CMatrix& v, const CorePartition& part, Fn&& active_overlap) {
  const CoreFactorization f = factor_core(v, part);
  return f.core_factor * active_overlap(f.active_walker);
}

/// Estimator over the full space that routes every call through an
/// active-space estimator, including the one-body derivative ratios.
class VceEstimator final : public OverlapEstimator {
 public:
  VceEstimator(std::shared_ptr<const OverlapEstimator> active, CorePartition part);
  int n_modes() const override { return part_.n_full_modes(); }
  int n_elec() const override { return active_->n_elec() + part_.n_core_elec(); }
  LocalEstimate evaluate(const CMatrix& v, const std::vector<CMatrix>& first,
                         const std::vector<CMatrix>& second) const override;
  const CorePartition& partition() const { return part_; }

 private:
  std::shared_ptr<const OverlapEstimator> active_;
  CorePartition part_;
  std::vector<int> core_so_;
  std::vector<int> active_so_;
};

}  // namespace qcafqmc
