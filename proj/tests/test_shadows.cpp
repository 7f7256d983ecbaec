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


#include <fstream>
#include <iterator>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "qcafqmc/shadows.hpp"

using namespace qcafqmc;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TrialState h2_like_trial() {
  FockState s = FockState::zero(4);
  s.amps(bitstring_from_string("1100")) = 0.99;
  s.amps(bitstring_from_string("0011")) = -std::sqrt(1.0 - 0.99 * 0.99);
  return build_trial(s, 2);
}

double chi_square(const std::map<std::vector<int>, int>& counts, int categories, int draws) {
  const double e = static_cast<double>(draws) / categories;
  double chi2 = 0.0;
  for (const auto& [k, c] : counts) chi2 += (c - e) * (c - e) / e;
  chi2 += (categories - static_cast<int>(counts.size())) * e;
  return chi2;
}

std::vector<int> key_of(const SignedPermutation& q) {
  std::vector<int> k;
  for (int i = 0; i < q.dim(); ++i) k.push_back(q.perm[i] * q.signs[i]);
  for (int i = 0; i < q.dim(); ++i) k.push_back(q.signs[i]);
  return k;
}

}  // namespace

TEST_CASE("shadows: signed permutations are orthogonal with unit determinant") {
  std::mt19937_64 rng(21);
  for (int n : {2, 4, 6, 8, 16}) {
    for (int k = 0; k < 50; ++k) {
      const auto q = sample_signed_permutation(rng, n);
      const RMatrix m = q.matrix();
      CHECK((m.transpose() * m - RMatrix::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0);
      CHECK(q.determinant() == 1);
      CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
    }
  }
  CHECK_THROWS_AS(sample_signed_permutation(rng, 3), InvalidArgumentError);
}

TEST_CASE("shadows: uniform over the even subgroup") {
  std::mt19937_64 rng(22);
  // n = 2: 8 signed permutations, 4 with det +1.
  std::map<std::vector<int>, int> c2;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) ++c2[key_of(sample_signed_permutation(rng, 2))];
  CHECK(c2.size() == 4);
  CHECK(chi_square(c2, 4, draws) < 16.27);  // 3 dof, p = 0.001

  // n = 4: 4! 2^4 / 2 = 192 elements; 191 dof, p = 0.001 at 257.
  std::map<std::vector<int>, int> c4;
  for (int k = 0; k < draws; ++k) ++c4[key_of(sample_signed_permutation(rng, 4))];
  CHECK(c4.size() == 192);
  CHECK(chi_square(c4, 192, draws) < 257.0);
}

TEST_CASE("shadows: computational-basis covariance") {
  const RMatrix c0 = covariance_of(0, 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(c0(2 * j, 2 * j + 1) == 1.0);
    CHECK(c0(2 * j + 1, 2 * j) == -1.0);
  }
  CHECK(c0.cwiseAbs().sum() == 6.0);
  RMatrix one(2, 2);
  one << 0.0, -1.0, 1.0, 0.0;
  CHECK(covariance_of(1, 1) == one);
  for (Bitstring b = 0; b < 16; ++b) CHECK((covariance_of(b, 4) + covariance_of(b, 4).transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shadows: snapshot matching equals Q^T C Q and the dense covariance") {
  std::mt19937_64 rng(23);
  const int n = 3;
  const auto g = oracle::majoranas(n);
  for (int k = 0; k < 20; ++k) {
    ShadowSample s{sample_signed_permutation(rng, 2 * n), static_cast<Bitstring>(k % 8)};
    const RMatrix q = s.q.matrix();
    const RMatrix expect = q.transpose() * covariance_of(s.b, n) * q;
    const SnapshotMatching m = snapshot_matching(s, n);
    CHECK(m.matrix() == expect);

    // -i Tr(sigma g_mu g_nu) for sigma = U^dag |b><b| U.
    const CMatrix u = majorana_unitary(q).u;
    const CVector ub = u.adjoint().col(static_cast<Eigen::Index>(s.b));
    double worst = 0.0;
    for (int mu = 0; mu < 2 * n; ++mu)
      for (int nu = 0; nu < 2 * n; ++nu) {
        if (mu == nu) continue;
        const complex_t c = complex_t{0.0, -1.0} * ub.dot(g[mu] * g[nu] * ub);
        worst = std::max(worst, std::abs(c - expect(mu, nu)));
      }
    CHECK(worst < 1e-10);
  }
  ShadowSample wrong{sample_signed_permutation(rng, 4), 0};
  CHECK_THROWS_AS(snapshot_matching(wrong, 3), DimensionError);
}

TEST_CASE("shadows: collection shape and determinism") {
  const auto trial = h2_like_trial();
  const auto set = collect(trial, 3, 7);
  CHECK(set.samples.size() == 3);
  CHECK(set.n_qubits == 4);
  CHECK(set.eta == 2);
  for (const auto& s : set.samples) {
    CHECK(s.q.dim() == 8);
    CHECK(s.q.determinant() == 1);
    CHECK(s.b < 16);
  }
  CHECK(collect(trial, 3, 7) == set);
  CHECK(!(collect(trial, 3, 8) == set));
  CHECK_THROWS_AS(collect(trial, 0, 7), InvalidArgumentError);

  auto grown = collect(trial, 2, 7);
  extend_shadows(grown, trial, 1);
  CHECK(grown == set);
}

TEST_CASE("shadows: measured bits follow the rotated superposition") {
  // With Q fixed by the seed stream, b is a Born sample of U_Q |Psi>.
  const auto trial = h2_like_trial();
  const auto set = collect(trial, 4000, 31);
  double loglik = 0.0;
  for (const auto& s : set.samples) {
    CVector psi = trial.superposition.amps;
    apply_majorana_rotation(majorana_givens(s.q.matrix()), psi, 4);
    const double p = std::norm(psi(static_cast<Eigen::Index>(s.b)));
    CHECK(p > 1e-12);
    loglik += std::log(p);
  }
  CHECK(std::isfinite(loglik));
}

TEST_CASE("shadows: archive round trip and failures") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "qcafqmc_shadows_test.bin";
  const auto trial = h2_like_trial();
  const auto set = collect(trial, 50, 5);
  save_shadows(set, path);
  const auto back = load_shadows(path);
  CHECK(back == set);

  const auto path2 = dir / "qcafqmc_shadows_test2.bin";
  save_shadows(collect(trial, 50, 5), path2);
  CHECK(slurp(path) == slurp(path2));

  const std::string bytes = slurp(path);
  {
    std::ofstream out(path2, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 3));
  }
  CHECK_THROWS_AS(load_shadows(path2), ArchiveError);
  {
    std::string bad = bytes;
    bad[8] = 9;
    std::ofstream out(path2, std::ios::binary | std::ios::trunc);
    out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
  }
  CHECK_THROWS_AS(load_shadows(path2), ArchiveError);
  {
    std::ofstream out(path2, std::ios::binary | std::ios::trunc);
    out << "NOTSHADOWS";
  }
  CHECK_THROWS_AS(load_shadows(path2), ArchiveError);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}
