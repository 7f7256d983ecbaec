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

#include "doctest.h"
#include "oracles.hpp"
#include "qcafqmc/pfaffian.hpp"

using namespace qcafqmc;

TEST_CASE("pfaffian: closed forms") {
  CMatrix a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  CHECK(std::abs(pfaffian(a) - 1.0) < 1e-15);

  const complex_t x{1.5, -0.2}, y{-0.7, 2.0};
  CMatrix b = CMatrix::Zero(4, 4);
  b(0, 1) = x;
  b(1, 0) = -x;
  b(2, 3) = y;
  b(3, 2) = -y;
  CHECK(std::abs(pfaffian(b) - x * y) < 1e-14);
  CHECK(pfaffian(CMatrix(0, 0)) == complex_t{1.0, 0.0});
}

TEST_CASE("pfaffian: square equals determinant") {
  std::mt19937_64 rng(1);
  for (int dim = 2; dim <= 16; dim += 2) {
    const CMatrix a = oracle::random_antisymmetric(dim, rng);
    const complex_t pf = pfaffian(a);
    const complex_t det = a.determinant();
    CHECK(std::abs(pf * pf - det) <= 1e-8 * std::abs(det));
  }
}

TEST_CASE("pfaffian: log form agrees and handles large scales") {
  std::mt19937_64 rng(2);
  const CMatrix a = oracle::random_antisymmetric(10, rng);
  const auto lp = pfaffian_log(a);
  CHECK(std::abs(lp.value() - pfaffian(a)) < 1e-10 * std::abs(pfaffian(a)));
  const auto big = pfaffian_log(1e200 * oracle::random_antisymmetric(40, rng));
  CHECK(std::isfinite(big.log_abs));
  CHECK(big.log_abs > 20 * std::log(1e200) - 10);
  CMatrix z = CMatrix::Zero(4, 4);
  CHECK(pfaffian_log(z).value() == complex_t{0.0, 0.0});
}

TEST_CASE("pfaffian: congruence and scaling") {
  std::mt19937_64 rng(3);
  for (int dim = 2; dim <= 12; dim += 2) {
    const CMatrix a = oracle::random_antisymmetric(dim, rng);
    const CMatrix b = oracle::random_complex(dim, dim, rng);
    const complex_t lhs = pfaffian(b * a * b.transpose());
    const complex_t rhs = b.determinant() * pfaffian(a);
    CHECK(std::abs(lhs - rhs) <= 1e-7 * std::abs(rhs));
    const complex_t c{0.3, 1.1};
    CHECK(std::abs(pfaffian(c * a) - std::pow(c, dim / 2) * pfaffian(a)) <= 1e-10 * std::abs(pfaffian(c * a)));
  }
}

TEST_CASE("pfaffian: inverse") {
  CMatrix a(2, 2);
  a << 0.0, 2.0, -2.0, 0.0;
  const auto pi = pfaffian_with_inverse(a);
  CHECK(std::abs(pi.pf - 2.0) < 1e-15);
  CHECK(std::abs(pi.inv(0, 1) + 0.5) < 1e-15);
  CHECK(std::abs(pi.inv(1, 0) - 0.5) < 1e-15);

  std::mt19937_64 rng(4);
  const CMatrix r = oracle::random_antisymmetric(12, rng);
  const auto pr = pfaffian_with_inverse(r);
  CHECK((r * pr.inv - CMatrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((pr.inv + pr.inv.transpose()).cwiseAbs().maxCoeff() < 1e-9);

  CMatrix s = CMatrix::Zero(4, 4);
  s(0, 1) = 1.0;
  s(1, 0) = -1.0;
  CHECK_THROWS_AS(pfaffian_with_inverse(s), SingularPfaffianError);
}

TEST_CASE("pfaffian: antisymmetrize guards its input") {
  CMatrix a = CMatrix::Zero(3, 3);
  CHECK_THROWS_AS(antisymmetrize(a), DimensionError);
  CMatrix b = CMatrix::Zero(2, 2);
  b(0, 1) = 1.0;
  CHECK_THROWS_AS(antisymmetrize(b), InvalidArgumentError);
  b(1, 0) = -1.0;
  CHECK(antisymmetrize(b) == b);
}

TEST_CASE("pfaffian: derivative formulas") {
  CMatrix a(2, 2), da(2, 2), z = CMatrix::Zero(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  da << 0.0, 1.0, -1.0, 0.0;
  auto pi = pfaffian_with_inverse(a);
  CHECK(std::abs(pfaffian_derivative(pi.pf, pi.inv, z)) == 0.0);
  CHECK(std::abs(pfaffian_derivative(pi.pf, pi.inv, da) - 1.0) < 1e-15);
  // Pf = (1 + l1)(1 + l2): mixed second derivative 1 with d2A = [[0,1],[-1,0]].
  CHECK(std::abs(pfaffian_second_derivative(pi.pf, pi.inv, da, da, da) - 1.0) < 1e-15);
  CHECK(std::abs(pfaffian_second_derivative(pi.pf, pi.inv, z, z, z)) == 0.0);

  std::mt19937_64 rng(5);
  const CMatrix r = oracle::random_antisymmetric(8, rng);
  const CMatrix d1 = oracle::random_antisymmetric(8, rng);
  const CMatrix d2 = oracle::random_antisymmetric(8, rng);
  const CMatrix d12 = oracle::random_antisymmetric(8, rng);
  const auto pr = pfaffian_with_inverse(r);
  const double h = 1e-5;
  const complex_t fd1 = (pfaffian(r + h * d1) - pfaffian(r - h * d1)) / (2 * h);
  const complex_t ad1 = pfaffian_derivative(pr.pf, pr.inv, d1);
  CHECK(std::abs(fd1 - ad1) <= 1e-6 * std::abs(ad1));

  auto f = [&](double l1, double l2) { return pfaffian(r + l1 * d1 + l2 * d2 + l1 * l2 * d12); };
  const double k = 1e-4;
  const complex_t fd2 = (f(k, k) - f(k, -k) - f(-k, k) + f(-k, -k)) / (4 * k * k);
  const complex_t ad2 = pfaffian_second_derivative(pr.pf, pr.inv, d1, d2, d12);
  CHECK(std::abs(fd2 - ad2) <= 1e-5 * std::abs(ad2));
}

TEST_CASE("pfaffian: jet matches the inverse formulas and survives singular matrices") {
  std::mt19937_64 rng(6);
  const CMatrix r = oracle::random_antisymmetric(6, rng);
  const CMatrix d1 = oracle::random_antisymmetric(6, rng);
  const CMatrix d2 = oracle::random_antisymmetric(6, rng);
  const auto pr = pfaffian_with_inverse(r);
  const auto jet = pfaffian_jet(r, d1, d2);
  CHECK(std::abs(jet[0] - pr.pf) < 1e-10 * std::abs(pr.pf));
  CHECK(std::abs(jet[1] - pfaffian_derivative(pr.pf, pr.inv, d1)) < 1e-9 * std::abs(jet[1]));
  const complex_t second = pfaffian_second_derivative(pr.pf, pr.inv, d1, d1, d2);
  CHECK(std::abs(jet[2] - second) < 1e-9 * std::abs(second));

  // Rank-2 A: Pf(A + t dA) = t * (...) near zero.
  CMatrix s = CMatrix::Zero(4, 4);
  s(0, 1) = 1.0;
  s(1, 0) = -1.0;
  CMatrix ds = CMatrix::Zero(4, 4);
  ds(2, 3) = 3.0;
  ds(3, 2) = -3.0;
  const auto js = pfaffian_jet(s, ds, CMatrix::Zero(4, 4));
  CHECK(std::abs(js[0]) < 1e-14);
  CHECK(std::abs(js[1] - 3.0) < 1e-13);
  CHECK(std::abs(js[2]) < 1e-12);
}
