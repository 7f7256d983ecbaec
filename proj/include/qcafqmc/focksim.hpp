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

// Dense Fock-space statevectors over N spin orbitals (Jordan-Wigner, bit j of
// the basis index is the occupation of mode j).
//
// Majorana operators are numbered from zero:
//   g_{2j} = a_j + a_j^dag,  g_{2j+1} = -i (a_j - a_j^dag).

#pragma once

#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "qcafqmc/common.hpp"
#include "qcafqmc/integrals.hpp"

namespace qcafqmc {

inline constexpr int kMaxDenseModes = 14;

struct FockState {
  int n_qubits = 0;
  CVector amps;

  static FockState zero(int n);
  static FockState basis(int n, Bitstring b);
  double norm() const { return amps.norm(); }
};

struct TrialState {
  FockState psi_t;
  int eta = 0;
  /// (|0...0> + |psi_T>) / sqrt(2)
  FockState superposition;
};

/// Validates the particle-number sector and builds the superposition state.
TrialState build_trial(const FockState& psi_t, int eta);

/// Jordan-Wigner sign (-1)^{number of occupied modes below j}.
inline double jw_sign(Bitstring x, int j) {
  return (popcount(x & ((Bitstring{1} << j) - 1)) & 1) ? -1.0 : 1.0;
}

/// a_q then a^dag_p on a basis state; returns false when the result vanishes.
bool apply_hop(int p, int q, Bitstring& x, double& sign);

/// g_mu |x> = phase |x'>.
std::pair<complex_t, Bitstring> majorana_on_basis(int mu, Bitstring x);

/// One factor cos(angle/2) + sin(angle/2) g_mu g_nu of a Gaussian unitary.
struct MajoranaGivens {
  int mu = 0;
  int nu = 0;
  double angle = 0.0;
};

/// Factors U_Q = F_1 F_2 ... F_k with U_Q^dag g_mu U_Q = sum_nu Q_{mu nu} g_nu.
/// Throws InvalidRotationError (not orthogonal) or UnsupportedParityError
/// (det Q = -1).
std::vector<MajoranaGivens> majorana_givens(const RMatrix& q);

/// Applies U = F_1 ... F_k to a statevector in place.
void apply_majorana_rotation(const std::vector<MajoranaGivens>& factors, CVector& state, int n);

struct MajoranaRotation {
  RMatrix q;
  /// Dense 2^N x 2^N unitary; the first entry of magnitude > 1e-12 in
  /// column-major order is real positive.
  CMatrix u;
};

MajoranaRotation majorana_unitary(const RMatrix& q);

/// Dense matrix of g_mu on n modes.
CMatrix majorana_matrix(int mu, int n);

/// Samples a basis state with Born probabilities.
Bitstring measure(const FockState& state, std::mt19937_64& rng);

/// <x|phi> = det V[rows of x, :] for the Slater determinant of the columns of V.
CVector slater_amplitudes(const CMatrix& v, int n);

/// Sum_pq Y_pq a^dag_p a_q applied to a statevector.
CVector apply_one_body(const CMatrix& y, const CVector& v, int n);

/// G_pq = <bra| a^dag_p a_q |ket>.
CMatrix transition_one_body(const CVector& bra, const CVector& ket, int n);

/// H|v> for the spin-orbital lift of spatial integrals (interleaved spins).
CVector apply_hamiltonian(const IntegralSet& ints, const CVector& v);

struct GroundState {
  double energy = 0.0;
  FockState state;
};

/// Lowest eigenpair in the (n_alpha, n_beta) sector. Capacity error past
/// kMaxDenseModes spin orbitals or for electron counts that do not fit.
GroundState exact_ground_state(const IntegralSet& ints, int n_alpha, int n_beta);
GroundState exact_ground_state(const IntegralSet& ints);
GroundState exact_ground_state(const CholeskyHamiltonian& ham);

/// "0110" style text with mode 0 leftmost.
std::string bitstring_to_string(Bitstring b, int n);
Bitstring bitstring_from_string(const std::string& s);

/// Text amplitude files: one "bitstring re im" record per line; the state is
/// normalized on load.
FockState load_trial_amplitudes(const std::filesystem::path& path);
void save_trial_amplitudes(const FockState& state, const std::filesystem::path& path);

}  // namespace qcafqmc
