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


#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "qcafqmc/focksim.hpp"
#include "qcafqmc/rdm.hpp"

using namespace qcafqmc;

namespace {

FockState basis_state(int n, Bitstring b) {
  FockState s{n, CVector::Zero(Eigen::Index{1} << n)};
  s.amps(static_cast<Eigen::Index>(b)) = 1.0;
  return s;
}

CMatrix dense_rdm(const CVector& psi, int n) {
  const auto a = oracle::annihilators(n);
  CMatrix d(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) d(p, q) = psi.dot(a[p].adjoint() * a[q] * psi);
  return d;
}

}  // namespace

TEST_CASE("rdm: determinant occupations") {
  const auto set = collect(build_trial(basis_state(4, 0b0011), 2), 20000, 4);
  const OneRdm d = estimate_1rdm(set);
  CHECK(d.n_samples == 20000);
  const double expect[4] = {1.0, 1.0, 0.0, 0.0};
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const double target = p == q ? expect[p] : 0.0;
      CHECK(std::abs(d.matrix(p, q).real() - target) <= 5 * d.stderr_re(p, q) + 1e-12);
      CHECK(std::abs(d.matrix(p, q).imag()) <= 5 * d.stderr_im(p, q) + 1e-12);
    }
  CHECK(std::abs(particle_number(d) - 2.0) <= 5 * d.trace_stderr + 1e-12);
}

TEST_CASE("rdm: empty-orbital Majorana sign follows the operator definitions") {
  TrialState vac_trial;
  vac_trial.psi_t = basis_state(3, 0);
  vac_trial.superposition = vac_trial.psi_t;
  const auto set = collect(vac_trial, 5000, 5);
  const auto g = oracle::majoranas(3);
  CVector vac = CVector::Zero(8);
  vac(0) = 1.0;
  for (int p = 0; p < 3; ++p) {
    const complex_t dense = kI * vac.dot(g[2 * p] * g[2 * p + 1] * vac);
    CHECK(std::abs(dense - (-1.0)) < 1e-14);
    const MajoranaEstimate e = estimate_majorana_expectation(set, 2 * p, 2 * p + 1);
    CHECK(std::abs(kI * e.value - dense) <= 5 * e.stderr_im + 1e-12);
  }
  CHECK_THROWS_AS(estimate_majorana_expectation(set, 1, 1), InvalidArgumentError);
  CHECK_THROWS_AS(estimate_majorana_expectation(set, 0, 6), DimensionError);
  ShadowSet empty;
  empty.n_qubits = 3;
  CHECK_THROWS_AS(estimate_majorana_expectation(empty, 0, 1), NoSamplesError);
  CHECK_THROWS_AS(estimate_1rdm(empty), NoSamplesError);
}

TEST_CASE("rdm: superposition cross terms vanish for a^dag a") {
  const IntegralSet ints = oracle::synthetic_integrals(3, 1, 1, 2, 31);
  const TrialState t = build_trial(exact_ground_state(ints).state, 2);
  const CMatrix on_sup = dense_rdm(t.superposition.amps, 6);
  const CMatrix on_trial = dense_rdm(t.psi_t.amps, 6);
  CHECK((2.0 * on_sup - on_trial).cwiseAbs().maxCoeff() < 1e-12);
  // Individual Majorana pairs do carry cross terms at eta = 2.
  const auto g = oracle::majoranas(6);
  double cross = 0.0;
  for (int mu = 0; mu < 12; ++mu)
    for (int nu = mu + 1; nu < 12; ++nu) {
      const complex_t s = t.superposition.amps.dot(g[mu] * g[nu] * t.superposition.amps);
      const complex_t p = t.psi_t.amps.dot(g[mu] * g[nu] * t.psi_t.amps);
      const complex_t v = complex_t{0.0, (mu % 2 == 0 && nu == mu + 1) ? 1.0 : 0.0};
      cross = std::max(cross, std::abs(2.0 * s - p - v));
    }
  CHECK(cross > 1e-3);
}

TEST_CASE("rdm: Majorana estimates agree with dense expectations") {
  const IntegralSet ints = oracle::synthetic_integrals(3, 1, 1, 2, 32);
  const TrialState t = build_trial(exact_ground_state(ints).state, 2);
  const auto set = collect(t, 20000, 6);
  const auto g = oracle::majoranas(6);
  const CVector& psi = t.superposition.amps;
  int within = 0, total = 0;
  for (int mu = 0; mu < 12; ++mu)
    for (int nu = 0; nu < 12; ++nu) {
      if (mu == nu) continue;
      const complex_t dense = psi.dot(g[mu] * g[nu] * psi);
      const MajoranaEstimate e = estimate_majorana_expectation(set, mu, nu);
      CHECK(std::abs(e.value.real()) < 1e-15);
      ++total;
      within += std::abs(e.value.imag() - dense.imag()) <= 3 * e.stderr_im + 1e-12;
    }
  CHECK(within >= total * 9 / 10);

  std::mt19937_64 rng(7);
  const RMatrix rot = oracle::random_orthogonal(12, rng);
  const MajoranaEstimate plain = estimate_majorana_expectation(set, 0, 3);
  const MajoranaEstimate ident = estimate_majorana_expectation(set, 0, 3, RMatrix::Identity(12, 12));
  CHECK(std::abs(plain.value - ident.value) < 1e-14);
  CMatrix gr0 = CMatrix::Zero(64, 64), gr1 = CMatrix::Zero(64, 64);
  for (int a = 0; a < 12; ++a) {
    gr0 += rot(1, a) * g[a];
    gr1 += rot(4, a) * g[a];
  }
  const complex_t dense_rot = psi.dot(gr0 * gr1 * psi);
  const MajoranaEstimate er = estimate_majorana_expectation(set, 1, 4, rot);
  CHECK(std::abs(er.value.imag() - dense_rot.imag()) <= 5 * er.stderr_im);
  RMatrix bad = RMatrix::Identity(12, 12);
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(estimate_majorana_expectation(set, 0, 1, bad), InvalidRotationError);
}

TEST_CASE("rdm: 1-RDM of a correlated trial against the dense oracle") {
  const IntegralSet ints = oracle::synthetic_integrals(3, 1, 1, 2, 33);
  const TrialState t = build_trial(exact_ground_state(ints).state, 2);
  const auto set = collect(t, 100000, 8);
  const OneRdm d = estimate_1rdm(set);
  const CMatrix ref = dense_rdm(t.psi_t.amps, 6);
  int within = 0;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) {
      const bool ok = std::abs(d.matrix(p, q).real() - ref(p, q).real()) <= 3 * d.stderr_re(p, q) + 1e-12 &&
                      std::abs(d.matrix(p, q).imag() - ref(p, q).imag()) <= 3 * d.stderr_im(p, q) + 1e-12;
      within += ok;
      const double herm_re = std::abs(d.matrix(p, q).real() - d.matrix(q, p).real());
      const double herm_im = std::abs(d.matrix(p, q).imag() + d.matrix(q, p).imag());
      CHECK(herm_re <= 5 * (d.stderr_re(p, q) + d.stderr_re(q, p)) + 1e-12);
      CHECK(herm_im <= 5 * (d.stderr_im(p, q) + d.stderr_im(q, p)) + 1e-12);
    }
  CHECK(within >= 32);
  CHECK(std::abs(particle_number(d) - 2.0) <= 5 * d.trace_stderr);

  const auto path = std::filesystem::temp_directory_path() / "qcafqmc_test_rdm.csv";
  write_rdm_csv(d, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "p,q,re,im,stderr_re,stderr_im");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 36);
  std::filesystem::remove(path);
}
