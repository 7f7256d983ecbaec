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


// Phaseless AFQMC over interleaved spin-orbital walkers.
//
//   H = e_core + v0 + 1/2 sum_g L_g^2,   v_g = i L_g,
//   B(x) = exp(-dt/2 v0) exp(sqrt(dt) sum_g x_g v_g) exp(-dt/2 v0).

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "qcafqmc/common.hpp"
#include "qcafqmc/estimator.hpp"
#include "qcafqmc/integrals.hpp"

namespace qcafqmc {

struct PropagationConfig {
  double dt = 0.01;
  int n_walkers = 128;
  int n_blocks = 150;
  int steps_per_block = 10;
  int reorth_interval = 5;
  /// Local-energy interval in hybrid mode.
  int energy_interval = 10;
  /// Hybrid weights (shadow estimators) instead of local-energy weights.
  bool hybrid = false;
  double force_bias_cap = 10.0;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
  std::uint64_t hash() const;
};

struct Walker {
  CMatrix v;
  double weight = 1.0;
  /// <Psi_T|phi> for the current (unnormalized) v.
  complex_t overlap;
  CVector force_bias;
  complex_t local_energy;
  bool has_energy = false;
};

struct BlockRecord {
  int block = 0;
  complex_t energy;
  double total_weight = 0.0;
  int n_walkers = 0;
};

/// Everything needed to continue a run bit-identically.
struct RunState {
  std::uint64_t step = 0;
  int blocks_done = 0;
  double e_shift = 0.0;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal;
  std::vector<Walker> walkers;
  std::vector<BlockRecord> trace;
  /// Walkers whose weight was zeroed by an estimator failure.
  std::uint64_t failures = 0;
  std::uint64_t clamped_biases = 0;
};

/// N x eta matrix of unit columns on the occupied modes of b.
CMatrix determinant_walker(Bitstring b, int n_modes);

/// exp of a spatial one-body matrix lifted to interleaved spin orbitals.
CMatrix spin_orbital_exp(const CMatrix& spatial);

/// Comb resampling to `target` walkers; every survivor gets weight W / target.
/// Throws PopulationCollapseError when the total weight is zero.
void population_control(std::vector<Walker>& walkers, int target, std::mt19937_64& rng);

/// Weighted mean of the cached local energies.
complex_t mixed_energy(const std::vector<Walker>& walkers);

/// Phaseless projection factor max(0, cos(arg ratio)).
double phaseless_factor(complex_t ratio);

class Propagator {
 public:
  Propagator(const CholeskyHamiltonian& ham, std::shared_ptr<const OverlapEstimator> est, PropagationConfig cfg);

  const PropagationConfig& config() const { return cfg_; }
  const SpinOrbitalTerms& terms() const { return terms_; }
  const OverlapEstimator& estimator() const { return *est_; }

  /// n_walkers copies of v with estimator data filled in; E_shift starts at E_L(v).
  RunState initial_state(const CMatrix& v) const;

  /// One imaginary-time step of every walker.
  void step(RunState& s) const;

  /// steps_per_block steps, the block energy, population control.
  BlockRecord run_block(RunState& s) const;

  /// Runs until `s.blocks_done == until_block`, calling `after_block` each time.
  void run(RunState& s, int until_block, const std::function<void(const RunState&)>& after_block = {}) const;

  /// Refreshes overlap, force bias and (optionally) local energy of a walker.
  /// Returns false if the estimator failed for it.
  bool refresh(Walker& w, bool with_energy) const;

 private:
  void propagate_walker(Walker& w, const std::vector<double>& x, bool with_energy, RunState& s) const;
  template <typename Fn>
  void for_walkers(std::size_t n, Fn&& fn) const;

  CholeskyHamiltonian ham_;
  std::shared_ptr<const OverlapEstimator> est_;
  PropagationConfig cfg_;
  SpinOrbitalTerms terms_;
  CMatrix half_v0_;
  std::uint64_t ham_hash_;
};

/// Checkpoint: config hash, Hamiltonian hash, trial fingerprint and the full
/// run state, written through a temporary file.
void save_checkpoint(const RunState& s, const PropagationConfig& cfg, const CholeskyHamiltonian& ham,
                     std::uint64_t trial_fingerprint, const std::filesystem::path& path);
/// Throws IncompatibleCheckpointError when any fingerprint disagrees.
RunState load_checkpoint(const PropagationConfig& cfg, const CholeskyHamiltonian& ham,
                         std::uint64_t trial_fingerprint, const std::filesystem::path& path);

/// CSV with header "block,energy_re,energy_im,total_weight".
void write_trace_csv(const std::vector<BlockRecord>& trace, const std::filesystem::path& path);
std::vector<BlockRecord> read_trace_csv(const std::filesystem::path& path);

}  // namespace qcafqmc
