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


// One-particle reduced density matrices from matchgate shadows.

#pragma once

#include <filesystem>

#include "qcafqmc/common.hpp"
#include "qcafqmc/shadows.hpp"

namespace qcafqmc {

struct MajoranaEstimate {
  complex_t value;
  double stderr_re = 0.0;
  double stderr_im = 0.0;
};

/// Shadow estimate of <gamma~_mu gamma~_nu> on the measured state, where
/// gamma~_mu = sum_nu Q'_{mu nu} gamma_nu. Throws NoSamplesError on an empty
/// set and InvalidArgumentError when mu == nu.
MajoranaEstimate estimate_majorana_expectation(const ShadowSet& set, int mu, int nu);
MajoranaEstimate estimate_majorana_expectation(const ShadowSet& set, int mu, int nu, const RMatrix& rotation);

struct OneRdm {
  /// D(p, q) = <Psi_T| a^dag_p a_q |Psi_T>
  CMatrix matrix;
  RMatrix stderr_re;
  RMatrix stderr_im;
  /// Standard error of Re Tr D from the per-sample traces.
  double trace_stderr = 0.0;
  std::uint64_t n_samples = 0;
};

/// Spin-orbital 1-RDM of the trial state. The set is measured on
/// (|0> + |Psi_T>)/sqrt(2); number-conserving operators have no cross terms
/// between the two components and vanish on the vacuum, so D_T = 2 D_Psi.
OneRdm estimate_1rdm(const ShadowSet& set);

double particle_number(const OneRdm& rdm);

/// CSV with header "p,q,re,im,stderr_re,stderr_im".
void write_rdm_csv(const OneRdm& rdm, const std::filesystem::path& path);

}  // namespace qcafqmc
