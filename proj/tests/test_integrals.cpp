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
#include "qcafqmc/integrals.hpp"

using namespace qcafqmc;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

double max_reconstruction_error(const IntegralSet& ints, const CholeskyHamiltonian& ham) {
  const IntegralSet r = ham.reconstruct();
  double err = 0.0;
  for (std::size_t i = 0; i < ints.g.size(); ++i) err = std::max(err, std::abs(ints.g[i] - r.g[i]));
  return err;
}

}  // namespace

TEST_CASE("fcidump: H2 records are echoed and symmetrized") {
  const IntegralSet ints = load_fcidump(oracle::data_path("h2_sto3g.fcidump"));
  CHECK(ints.n_orb == 2);
  CHECK(ints.n_alpha == 1);
  CHECK(ints.n_beta == 1);
  CHECK(ints.e_core == doctest::Approx(0.7137539936876182).epsilon(1e-15));
  CHECK(ints.t(0, 0) == doctest::Approx(-1.252463573564898).epsilon(1e-15));
  CHECK(ints.eri(0, 0, 0, 0) == doctest::Approx(0.6744887663568377).epsilon(1e-15));
  CHECK(ints.eri(1, 0, 1, 0) == doctest::Approx(0.1812888082114958).epsilon(1e-15));
  CHECK(ints.eri(0, 1, 0, 1) == ints.eri(1, 0, 1, 0));
  CHECK(ints.eri(0, 1, 1, 0) == ints.eri(1, 0, 1, 0));
}

TEST_CASE("fcidump: a single record fills its symmetry partners") {
  const auto p = write_temp("qc_sym.fcidump",
                            "&FCI NORB=2,NELEC=2,MS2=0,\n ORBSYM=1,1,\n ISYM=1,\n&END\n"
                            "1.0D0 1 1 1 1\n1.0 2 2 2 2\n0.5 1 1 2 2\n-1.0 1 1 0 0\n-0.5 2 2 0 0\n0.25 0 0 0 0\n");
  const IntegralSet ints = load_fcidump(p);
  CHECK(ints.eri(0, 0, 1, 1) == 0.5);
  CHECK(ints.eri(1, 1, 0, 0) == 0.5);
  CHECK(ints.e_core == 0.25);
  CHECK(ints.t(1, 1) == -0.5);
}

TEST_CASE("fcidump: parse errors name the line") {
  const auto p = write_temp("qc_bad.fcidump", "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n1.0 1 1 1 1\nfoo 1 1 1 1\n");
  try {
    load_fcidump(p);
    FAIL("expected a parse error");
  } catch (const MalformedInputError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(load_fcidump("/nonexistent/qc.fcidump"), MissingInputError);
}

TEST_CASE("fcidump: non-PSD pair matrix is rejected") {
  // (11|22) larger than the geometric mean of (11|11) and (22|22).
  const auto p = write_temp("qc_npsd.fcidump",
                            "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n1.0 1 1 1 1\n1.0 2 2 2 2\n1.5 1 1 2 2\n");
  RMatrix pair(2, 2);
  pair << 1.0, 1.5, 1.5, 1.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(pair);
  REQUIRE(eig.eigenvalues()(0) < -1e-8);
  CHECK_THROWS_AS(load_fcidump(p), InconsistentIntegralsError);
}

TEST_CASE("fcidump: contradicting symmetric records are rejected") {
  const auto p = write_temp("qc_conflict.fcidump",
                            "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n0.5 1 1 2 2\n0.4 2 2 1 1\n");
  CHECK_THROWS_AS(load_fcidump(p), InconsistentIntegralsError);
}

TEST_CASE("fcidump: write then load round-trips") {
  const IntegralSet a = oracle::synthetic_integrals(3, 2, 1, 3, 11);
  const auto p = std::filesystem::temp_directory_path() / "qc_rt.fcidump";
  write_fcidump(a, p);
  const IntegralSet b = load_fcidump(p);
  CHECK(b.n_alpha == 2);
  CHECK(b.n_beta == 1);
  CHECK((a.t - b.t).cwiseAbs().maxCoeff() < 1e-15);
  for (std::size_t i = 0; i < a.g.size(); ++i) CHECK(std::abs(a.g[i] - b.g[i]) < 1e-15);
}

TEST_CASE("cholesky: single product term gives one vector") {
  IntegralSet ints;
  ints.n_orb = 3;
  ints.t = RMatrix::Zero(3, 3);
  ints.g.assign(81, 0.0);
  for (int p = 0; p < 3; ++p)
    for (int r = 0; r < 3; ++r) ints.eri(p, p, r, r) = 1.0;
  const auto h1 = cholesky_factorize(ints, 1e-12);
  REQUIRE(h1.n_gamma() == 1);
  CHECK((h1.L[0].cwiseAbs() - RMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(max_reconstruction_error(ints, h1) < 1e-14);

  // With the extra delta_pr the tensor is diagonal over pairs: one vector per orbital.
  std::fill(ints.g.begin(), ints.g.end(), 0.0);
  for (int p = 0; p < 3; ++p) ints.eri(p, p, p, p) = 1.0;
  CHECK(cholesky_factorize(ints, 1e-12).n_gamma() == 3);
}

TEST_CASE("cholesky: H2 reconstruction within tolerance") {
  const IntegralSet ints = load_fcidump(oracle::data_path("h2_sto3g.fcidump"));
  const auto ham = cholesky_factorize(ints, 1e-8);
  CHECK(max_reconstruction_error(ints, ham) < 1e-7);
  for (const auto& l : ham.L) CHECK((l - l.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("cholesky: recovers the rank of a synthetic tensor") {
  for (int rank : {1, 2, 4}) {
    const IntegralSet ints = oracle::synthetic_integrals(4, 2, 2, rank, 100 + rank);
    const auto ham = cholesky_factorize(ints, 1e-12);
    CHECK(ham.n_gamma() == rank);
    CHECK(max_reconstruction_error(ints, ham) < 1e-11);
  }
}

TEST_CASE("cholesky: residual bound is 10 tol over all indices") {
  for (double tol : {1e-4, 1e-6, 1e-8}) {
    const IntegralSet ints = oracle::synthetic_integrals(5, 2, 2, 9, 7);
    CHECK(max_reconstruction_error(ints, cholesky_factorize(ints, tol)) <= 10 * tol);
  }
}

TEST_CASE("cholesky: refactorized Hamiltonian has the same FCI energy") {
  const IntegralSet ints = oracle::synthetic_integrals(4, 2, 1, 5, 3);
  const auto ham = cholesky_factorize(ints, 1e-12);
  const IntegralSet rec = ham.reconstruct();
  const double e0 = oracle::sector_ground_energy(ints, 2, 1);
  CHECK(std::abs(exact_ground_state(rec, 2, 1).energy - e0) < 1e-10);
  CHECK(std::abs(exact_ground_state(ham).energy - e0) < 1e-10);
}

TEST_CASE("cholesky: v0 makes H = v0 + 1/2 sum L^2 exact") {
  const IntegralSet ints = oracle::synthetic_integrals(3, 1, 1, 3, 5);
  const auto ham = cholesky_factorize(ints, 1e-12);
  const int n = 6;
  CMatrix h = ham.e_core * CMatrix::Identity(64, 64) + oracle::one_body(to_spin_orbital(ham.v0).cast<complex_t>(), n);
  for (const auto& l : ham.L) {
    const CMatrix lo = oracle::one_body(to_spin_orbital(l).cast<complex_t>(), n);
    h += 0.5 * lo * lo;
  }
  CHECK((h - oracle::hamiltonian(ints)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("cholesky: binary cache round-trips and hashes by content") {
  const IntegralSet ints = oracle::synthetic_integrals(3, 1, 1, 3, 9);
  const auto ham = cholesky_factorize(ints);
  const auto p = std::filesystem::temp_directory_path() / "qc_chol.bin";
  save_cholesky(ham, p);
  const auto back = load_cholesky(p);
  CHECK(content_hash(back) == content_hash(ham));
  CHECK((back.v0 - ham.v0).cwiseAbs().maxCoeff() == 0.0);
  auto other = ham;
  other.e_core += 1e-12;
  CHECK(content_hash(other) != content_hash(ham));
  {
    std::ofstream trunc(p, std::ios::binary | std::ios::trunc);
    trunc << "QCHOLESK";
  }
  CHECK_THROWS_AS(load_cholesky(p), ArchiveError);
}

TEST_CASE("embedding: identity partition keeps the integrals") {
  const IntegralSet ints = oracle::synthetic_integrals(3, 1, 1, 2, 21);
  const auto sys = build_embedded(ints, {}, {0, 1, 2});
  CHECK(sys.active_ints.e_core == ints.e_core);
  CHECK(sys.active_ints.t == ints.t);
  CHECK(sys.active_ints.g == ints.g);
  CHECK(sys.virt.empty());
}

TEST_CASE("embedding: frozen-core energy matches the constrained full problem") {
  const IntegralSet ints = oracle::synthetic_integrals(4, 2, 2, 4, 31);
  const auto sys = build_embedded(ints, {0}, {1, 2});
  CHECK(sys.virt == std::vector<int>{3});
  CHECK(sys.active_ints.n_alpha == 1);
  CHECK(sys.active_ints.n_beta == 1);
  const double e_active = exact_ground_state(sys.active_ints).energy;

  // Dense full-space Hamiltonian restricted to: orbital 0 doubly occupied,
  // orbital 3 empty, one alpha and one beta electron in orbitals 1 and 2.
  const CMatrix h = oracle::hamiltonian(ints);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index s = 0; s < h.rows(); ++s) {
    if ((s & 0b11) != 0b11 || (s & 0b11000000) != 0) continue;
    int na = 0, nb = 0;
    for (int j = 2; j < 6; ++j) ((j % 2) ? nb : na) += (s >> j) & 1;
    if (na == 1 && nb == 1) idx.push_back(s);
  }
  CMatrix sub(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = h(idx[i], idx[j]);
  const double e_ref = Eigen::SelfAdjointEigenSolver<CMatrix>(sub).eigenvalues()(0);
  CHECK(std::abs(e_active - e_ref) < 1e-10);
}

TEST_CASE("embedding: invalid partitions") {
  const IntegralSet ints = oracle::synthetic_integrals(3, 1, 1, 2, 1);
  CHECK_THROWS_AS(build_embedded(ints, {0}, {0, 1}), PartitionError);
  CHECK_THROWS_AS(build_embedded(ints, {}, {0, 5}), PartitionError);
  CHECK_THROWS_AS(build_embedded(ints, {0, 1}, {2}), PartitionError);
}
