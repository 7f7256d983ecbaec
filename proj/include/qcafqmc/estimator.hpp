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

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "qcafqmc/common.hpp"
#include "qcafqmc/focksim.hpp"
#include "qcafqmc/integrals.hpp"
#include "qcafqmc/overlap.hpp"
#include "qcafqmc/shadows.hpp"

namespace qcafqmc {

/// Overlap <Psi_T|phi> and one-body ratios for a walker phi with orbitals V.
/// For each direction Y, first[d] = <Psi_T|Y-hat|phi> / <Psi_T|phi> and
/// second[d] = <Psi_T|Y-hat^2|phi> / <Psi_T|phi>, Y-hat = sum Y_pq a^dag_p a_q.
struct LocalEstimate {
  complex_t overlap;
  /// Statistical error of the overlap (0 for exact estimators).
  double overlap_stderr = 0.0;
  std::vector<complex_t> first;
  std::vector<complex_t> second;
};

class OverlapEstimator {
 public:
  virtual ~OverlapEstimator() = default;
  virtual int n_modes() const = 0;
  virtual int n_elec() const = 0;
  /// Throws VanishingOverlapError when the overlap cannot be divided by.
  virtual LocalEstimate evaluate(const CMatrix& v, const std::vector<CMatrix>& first,
                                 const std::vector<CMatrix>& second) const = 0;
  complex_t overlap(const CMatrix& v) const { return evaluate(v, {}, {}).overlap; }
};

/// Dense Fock-space inner products against a stored trial vector.
class ExactEstimator final : public OverlapEstimator {
 public:
  ExactEstimator(FockState trial, int eta);
  int n_modes() const override { return trial_.n_qubits; }
  int n_elec() const override { return eta_; }
  LocalEstimate evaluate(const CMatrix& v, const std::vector<CMatrix>& first,
                         const std::vector<CMatrix>& second) const override;
  const FockState& trial() const { return trial_; }

 private:
  FockState trial_;
  int eta_;
};

/// Pfaffian estimator over a shadow set. Snapshots are grouped by their
/// covariance matching, which the estimator depends on exclusively.
class ShadowEstimator final : public OverlapEstimator {
 public:
  explicit ShadowEstimator(const ShadowSet& set);
  int n_modes() const override { return n_; }
  int n_elec() const override { return eta_; }
  LocalEstimate evaluate(const CMatrix& v, const std::vector<CMatrix>& first,
                         const std::vector<CMatrix>& second) const override;

  /// Mean of o_p with its sample variance.
  OverlapEstimate estimate_overlap(const WalkerMatrix& walker) const;

  std::uint64_t n_samples() const { return n_samples_; }
  std::size_t n_groups() const { return groups_.size(); }
  /// Node evaluations at a singular matrix, resolved by contour averaging (diagnostic).
  std::uint64_t singular_nodes() const { return singular_nodes_.load(); }

 private:
  struct Group {
    SnapshotMatching matching;
    double count;
  };
  int n_;
  int eta_;
  std::uint64_t n_samples_ = 0;
  std::vector<Group> groups_;
  std::vector<double> nodes_;
  CVector beta_;
  CMatrix c0_;
  /// Fixed antisymmetric direction for contour averaging around singular nodes.
  CMatrix perturbation_;
  mutable std::atomic<std::uint64_t> singular_nodes_{0};
};

/// Spin-orbital (interleaved) lift of a Cholesky Hamiltonian.
struct SpinOrbitalTerms {
  double e_core = 0.0;
  CMatrix v0;
  std::vector<CMatrix> l;

  int n_gamma() const { return static_cast<int>(l.size()); }
};

SpinOrbitalTerms spin_orbital_terms(const CholeskyHamiltonian& ham);

/// Ratios <v_gamma> = i <L-hat_gamma> for every Cholesky vector.
CVector force_bias(const OverlapEstimator& est, const CMatrix& v, const SpinOrbitalTerms& terms);

/// e_core + <v0-hat> + 1/2 sum_gamma <L-hat_gamma^2>.
complex_t local_energy(const OverlapEstimator& est, const CMatrix& v, const SpinOrbitalTerms& terms);

/// Overlap, force-bias ratios and (optionally) the local energy from a single
/// evaluate() call.
struct WalkerEstimate {
  complex_t overlap;
  double overlap_stderr = 0.0;
  CVector force_bias;
  complex_t local_energy;
  bool has_energy = false;
};

WalkerEstimate estimate_walker(const OverlapEstimator& est, const CMatrix& v, const SpinOrbitalTerms& terms,
                               bool with_energy);

}  // namespace qcafqmc
