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
#include <vector>

#include "qcafqmc/common.hpp"

namespace qcafqmc {

/**
 * Spatial-orbital electronic integrals.
 *
 * Two-electron integrals are stored in chemists' notation, g(p,q,r,s) = (pq|rs),
 * flattened row-major. The Hamiltonian they define is
 *
 *   H = e_core + sum_pq t_pq E_pq + 1/2 sum_pqrs (pq|rs) (E_pq E_rs - delta_qr E_ps)
 *
 * with E_pq the spin-summed excitation operator.
 */
struct IntegralSet {
  int n_orb = 0;
  double e_core = 0.0;
  RMatrix t;
  std::vector<double> g;
  int n_alpha = 0;
  int n_beta = 0;

  double& eri(int p, int q, int r, int s) {
    return g[((static_cast<std::size_t>(p) * n_orb + q) * n_orb + r) * n_orb + s];
  }
  double eri(int p, int q, int r, int s) const {
    return g[((static_cast<std::size_t>(p) * n_orb + q) * n_orb + r) * n_orb + s];
  }
  int n_elec() const { return n_alpha + n_beta; }

  /// Two-electron tensor as the symmetric (pq),(rs) pair matrix.
  RMatrix pair_matrix() const;
};

/// Cholesky-factorized Hamiltonian: (pq|rs) ~= sum_g L^g_pq L^g_rs.
struct CholeskyHamiltonian {
  int n_orb = 0;
  double e_core = 0.0;
  RMatrix t;
  std::vector<RMatrix> L;
  /// Modified one-body term t_pq - 1/2 sum_g sum_r L^g_pr L^g_rq.
  RMatrix v0;
  double chol_tol = 0.0;
  int n_alpha = 0;
  int n_beta = 0;

  int n_gamma() const { return static_cast<int>(L.size()); }
  int n_elec() const { return n_alpha + n_beta; }

  /// Rebuilds (pq|rs) from the Cholesky vectors.
  IntegralSet reconstruct() const;
};

/// Frozen-core / active / virtual partition of a full orbital space.
struct EmbeddedSystem {
  int n_full = 0;
  std::vector<int> core;
  std::vector<int> active;
  std::vector<int> virt;
  IntegralSet active_ints;
  CholeskyHamiltonian full_ham;
};

inline constexpr double kDefaultCholTol = 1e-8;

/// Parses an FCIDUMP file (1-based indices, chemists' notation).
IntegralSet load_fcidump(const std::filesystem::path& path);

/// Writes integrals in FCIDUMP format with unique 8-fold records.
void write_fcidump(const IntegralSet& ints, const std::filesystem::path& path);

/// Checks t symmetry and the 8-fold g symmetry; throws InconsistentIntegralsError.
void validate_integrals(const IntegralSet& ints, double tol = 1e-10);

/// Pivoted incomplete Cholesky of the pair matrix. Stops once the largest
/// remaining diagonal residual drops below `tol`.
CholeskyHamiltonian cholesky_factorize(const IntegralSet& ints, double tol = kDefaultCholTol);

/// Frozen-core embedding; `virt` is everything not in core or active.
EmbeddedSystem build_embedded(const IntegralSet& ints, const std::vector<int>& core,
                              const std::vector<int>& active, double chol_tol = kDefaultCholTol);

/// Lifts a spatial-orbital one-body matrix to interleaved spin orbitals (a,b,a,b,...).
RMatrix to_spin_orbital(const RMatrix& spatial);

/// FNV-1a digest over e_core, t and every Cholesky vector.
std::uint64_t content_hash(const CholeskyHamiltonian& ham);

void save_cholesky(const CholeskyHamiltonian& ham, const std::filesystem::path& path);
CholeskyHamiltonian load_cholesky(const std::filesystem::path& path);

}  // namespace qcafqmc
