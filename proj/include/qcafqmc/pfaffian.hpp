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

#include <array>

#include "qcafqmc/common.hpp"

namespace qcafqmc {

/// Pfaffian in polar form: value = exp(log_abs) * phase. A zero Pfaffian has
/// log_abs = -inf and phase = 0.
struct PfaffianValue {
  double log_abs = 0.0;
  complex_t phase{1.0, 0.0};

  complex_t value() const;
};

/// Projects onto the antisymmetric part. Throws DimensionError for odd or
/// non-square input, and InvalidArgumentError when the symmetric part exceeds
/// 1e-12 relative to the largest entry.
CMatrix antisymmetrize(const CMatrix& a);

/// Parlett-Reid with partial pivoting. The input must be antisymmetric and of
/// even order (not re-checked on this hot path).
complex_t pfaffian(const CMatrix& a);

/// Same elimination, accumulated as log-magnitude and phase.
PfaffianValue pfaffian_log(const CMatrix& a);

struct PfaffianInverse {
  complex_t pf;
  CMatrix inv;
};

/// Pfaffian together with A^{-1}. A pivot smaller than `rel_guard` times the
/// largest entry of A raises SingularPfaffianError.
PfaffianInverse pfaffian_with_inverse(const CMatrix& a, double rel_guard = 1e-8);

/// Non-throwing form: returns false (and the smallest pivot) for a singular matrix.
bool try_pfaffian_with_inverse(const CMatrix& a, PfaffianInverse& out, double rel_guard = 1e-8,
                               double* pivot = nullptr);

/// (pf/2) Tr(A^{-1} dA).
complex_t pfaffian_derivative(complex_t pf, const CMatrix& a_inv, const CMatrix& da);

/// (pf/2) [Tr(A^{-1} d2A) - Tr(A^{-1} dA1 A^{-1} dA2) + 1/2 Tr(A^{-1} dA1) Tr(A^{-1} dA2)].
complex_t pfaffian_second_derivative(complex_t pf, const CMatrix& a_inv, const CMatrix& da1,
                                     const CMatrix& da2, const CMatrix& d2a);

/// Value, first and second derivative at t = 0 of Pf(A + t dA + t^2/2 d2A),
/// recovered from Pfaffians on a circle in the complex t plane. Works for
/// singular A.
std::array<complex_t, 3> pfaffian_jet(const CMatrix& a, const CMatrix& da, const CMatrix& d2a);

}  // namespace qcafqmc
