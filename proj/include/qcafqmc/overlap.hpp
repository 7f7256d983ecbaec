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

// Matchgate-shadow overlap kernels.
//
// A snapshot with covariance C_s = Q^T C_{|b>} Q and a walker whose occupied
// orbitals are the first eta columns of the unitary frame V give
//
//   B    = W^* M C_s M^T W^dag,        M = block(V^dag)
//   A(z) = C0^(s) + z B^(s)
//   o    = 2 i^{eta/2} / 2^{N - eta/2} sum_x c_x C(2N, 2x) / C(N, x)
//
// where c_x are the coefficients of Pf A(z), and (s) keeps index 2j+1 of every
// occupied mode j < eta together with both indices of every empty mode.

#pragma once

#include <cstdint>
#include <vector>

#include "qcafqmc/common.hpp"
#include "qcafqmc/shadows.hpp"

namespace qcafqmc {

/// Real 2N x 2N matrix with 2x2 blocks [[Re x, -Im x], [Im x, Re x]].
RMatrix majorana_block(const CMatrix& x);

/// Walker orbitals plus the unitary frame used by the estimators.
class WalkerMatrix {
 public:
  /// QR-normalizes `v` (N x zeta). Throws InvalidArgumentError on a zero or
  /// rank-deficient matrix.
  explicit WalkerMatrix(const CMatrix& v);

  int n_modes() const { return static_cast<int>(v_.rows()); }
  int n_elec() const { return static_cast<int>(v_.cols()); }
  const CMatrix& v() const { return v_; }
  /// N x N unitary whose first zeta columns span the walker.
  const CMatrix& frame() const { return frame_; }
  /// det R of v = frame[:, :zeta] R.
  complex_t norm_factor() const { return det_r_; }
  /// block(frame^dag).
  const RMatrix& m_phi() const { return m_phi_; }

 private:
  CMatrix v_;
  CMatrix frame_;
  complex_t det_r_;
  RMatrix m_phi_;
};

/// Direct sum of (1/sqrt 2)[[1, -i], [1, i]] for the first xi modes and
/// identity blocks after.
CMatrix w_matrix(int n, int xi);

/// Retained rows/columns of the "(s)" submatrix, in increasing order.
std::vector<int> retained_indices(int n, int eta);

/// C0^(s): zero on singleton indices, [[0, 1], [-1, 0]] on retained pairs.
CMatrix vacuum_selected(int n, int eta);

/// W^* M C M^T W^dag by chained dense products.
CMatrix build_B(const RMatrix& c_sigma, const RMatrix& m_phi, const CMatrix& w);

/// Interpolation nodes cos((2k+1) pi / (2K)), k = 0..l, with K = N unless
/// that would repeat a node (K = l + 1 then).
std::vector<double> chebyshev_nodes(int n, int eta);

struct OverlapPolynomial {
  CVector coeffs;
};

/// Pfaffian of A(z) at the nodes, then a Vandermonde solve.
OverlapPolynomial overlap_polynomial(const RMatrix& c_sigma, const WalkerMatrix& walker, int eta);

/// Binomial reweighting of the coefficients into o_p.
complex_t overlap_from_polynomial(const OverlapPolynomial& poly, int n, int eta);

/// Weights beta_k with o_p = sum_k beta_k Pf A(z_k).
CVector node_weights(int n, int eta);

/// Reference single-sample estimate o_p for the walker's normalized frame
/// (multiply by walker.norm_factor() for the unnormalized walker).
complex_t sample_overlap(const ShadowSample& sample, const WalkerMatrix& walker, int eta);

struct OverlapEstimate {
  complex_t value;
  std::uint64_t n_samples = 0;
  /// Sample variance of |o_p - mean|^2.
  double variance = 0.0;

  double std_error() const;
};

/// One-body generator on Majorana indices: exp(lambda Y-hat) acts on the
/// snapshot covariance as C -> T C T^T with T = exp(lambda K).
CMatrix majorana_generator(const CMatrix& y);

}  // namespace qcafqmc
