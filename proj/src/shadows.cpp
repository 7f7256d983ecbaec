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

#include "qcafqmc/shadows.hpp"

#include <numeric>

#include "qcafqmc/binio.hpp"

namespace qcafqmc {

RMatrix SignedPermutation::matrix() const {
  const int n = dim();
  RMatrix q = RMatrix::Zero(n, n);
  for (int mu = 0; mu < n; ++mu) q(perm[mu], mu) = signs[mu];
  return q;
}

int SignedPermutation::determinant() const {
  const int n = dim();
  std::vector<char> seen(n, 0);
  int parity = 1;
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (int j = i; !seen[j]; j = perm[j]) {
      seen[j] = 1;
      ++len;
    }
    if (len % 2 == 0) parity = -parity;
  }
  for (auto s : signs) parity *= s;
  return parity;
}

SignedPermutation sample_signed_permutation(std::mt19937_64& rng, int n) {
  if (n < 2 || n % 2 != 0) throw InvalidArgumentError("signed permutation order must be even and >= 2");
  SignedPermutation q;
  q.perm.resize(n);
  std::iota(q.perm.begin(), q.perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(q.perm[i], q.perm[pick(rng)]);
  }
  q.signs.resize(n);
  std::bernoulli_distribution coin(0.5);
  for (auto& s : q.signs) s = coin(rng) ? -1 : 1;
  if (q.determinant() < 0) q.signs[n - 1] = static_cast<std::int8_t>(-q.signs[n - 1]);
  return q;
}

RMatrix covariance_of(Bitstring b, int n_qubits) {
  RMatrix c = RMatrix::Zero(2 * n_qubits, 2 * n_qubits);
  for (int j = 0; j < n_qubits; ++j) {
    const double s = ((b >> j) & 1) ? -1.0 : 1.0;
    c(2 * j, 2 * j + 1) = s;
    c(2 * j + 1, 2 * j) = -s;
  }
  return c;
}

RMatrix SnapshotMatching::matrix() const {
  const auto n = static_cast<Eigen::Index>(partner.size());
  RMatrix c = RMatrix::Zero(n, n);
  for (Eigen::Index mu = 0; mu < n; ++mu) c(mu, partner[mu]) = sign[mu];
  return c;
}

SnapshotMatching snapshot_matching(const ShadowSample& s, int n_qubits) {
  const int m = 2 * n_qubits;
  if (s.q.dim() != m) throw DimensionError("shadow sample does not match " + std::to_string(n_qubits) + " qubits");
  // (Q^T C Q)(mu, nu) = s_mu s_nu C(perm[mu], perm[nu]); C pairs 2j with 2j+1.
  std::vector<int> inv(m);
  for (int mu = 0; mu < m; ++mu) inv[s.q.perm[mu]] = mu;
  SnapshotMatching out;
  out.partner.resize(m);
  out.sign.resize(m);
  for (int mu = 0; mu < m; ++mu) {
    const int a = s.q.perm[mu];
    const int b = a ^ 1;
    const int j = a / 2;
    const int cb = ((s.b >> j) & 1) ? -1 : 1;
    const int cab = (a % 2 == 0) ? cb : -cb;
    const int nu = inv[b];
    out.partner[mu] = static_cast<std::uint16_t>(nu);
    out.sign[mu] = static_cast<std::int8_t>(s.q.signs[mu] * s.q.signs[nu] * cab);
  }
  return out;
}

std::uint64_t sample_stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 of a combined key
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void extend_shadows(ShadowSet& set, const TrialState& trial, std::uint64_t count) {
  const int n = trial.psi_t.n_qubits;
  if (set.n_qubits != n || set.eta != trial.eta) throw DimensionError("shadow set does not match the trial state");
  const std::uint64_t first = set.samples.size();
  set.samples.reserve(first + count);
  FockState work = trial.superposition;
  for (std::uint64_t i = first; i < first + count; ++i) {
    std::mt19937_64 rng(sample_stream_seed(set.seed, i));
    ShadowSample s;
    s.q = sample_signed_permutation(rng, 2 * n);
    work.amps = trial.superposition.amps;
    apply_majorana_rotation(majorana_givens(s.q.matrix()), work.amps, n);
    s.b = measure(work, rng);
    set.samples.push_back(std::move(s));
  }
}

ShadowSet collect(const TrialState& trial, std::uint64_t count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgumentError("shadow count must be positive");
  ShadowSet set;
  set.n_qubits = trial.psi_t.n_qubits;
  set.eta = trial.eta;
  set.seed = seed;
  extend_shadows(set, trial, count);
  return set;
}

namespace {
constexpr std::string_view kShadowMagic = "QCSHADOW";
constexpr std::uint32_t kShadowVersion = 1;
}  // namespace

void save_shadows(const ShadowSet& set, const std::filesystem::path& path) {
  const int m = 2 * set.n_qubits;
  binio::Writer w;
  w.bytes(kShadowMagic);
  w.put(kShadowVersion);
  w.put<std::uint32_t>(set.n_qubits);
  w.put<std::uint32_t>(set.eta);
  w.put<std::uint64_t>(set.samples.size());
  w.put<std::uint64_t>(set.seed);
  w.str(set.source);
  const int sign_bytes = (m + 7) / 8;
  const int bit_bytes = (set.n_qubits + 7) / 8;
  for (const auto& s : set.samples) {
    if (s.q.dim() != m) throw DimensionError("sample dimension differs from the set");
    for (auto p : s.q.perm) w.put<std::uint16_t>(p);
    for (int k = 0; k < sign_bytes; ++k) {
      std::uint8_t byte = 0;
      for (int i = 0; i < 8 && 8 * k + i < m; ++i)
        if (s.q.signs[8 * k + i] < 0) byte |= std::uint8_t(1u << i);
      w.put(byte);
    }
    for (int k = 0; k < bit_bytes; ++k) w.put<std::uint8_t>(static_cast<std::uint8_t>(s.b >> (8 * k)));
  }
  w.commit(path);
}

ShadowSet load_shadows(const std::filesystem::path& path) {
  binio::Reader r(path);
  if (r.remaining() < kShadowMagic.size() || r.bytes(kShadowMagic.size()) != kShadowMagic)
    throw ArchiveError(path.string() + ": not a shadow archive");
  if (r.get<std::uint32_t>() != kShadowVersion) throw ArchiveError(path.string() + ": unsupported archive version");
  ShadowSet set;
  set.n_qubits = static_cast<int>(r.get<std::uint32_t>());
  set.eta = static_cast<int>(r.get<std::uint32_t>());
  const auto count = r.get<std::uint64_t>();
  set.seed = r.get<std::uint64_t>();
  set.source = r.str();
  if (set.n_qubits < 1 || set.n_qubits > 64) throw ArchiveError(path.string() + ": bad qubit count");
  const int m = 2 * set.n_qubits;
  const int sign_bytes = (m + 7) / 8;
  const int bit_bytes = (set.n_qubits + 7) / 8;
  const std::uint64_t per_sample = 2ull * m + sign_bytes + bit_bytes;
  if (r.remaining() != count * per_sample) throw ArchiveError(path.string() + ": truncated or oversized archive");
  set.samples.resize(count);
  for (auto& s : set.samples) {
    s.q.perm.resize(m);
    s.q.signs.resize(m);
    for (auto& p : s.q.perm) {
      p = r.get<std::uint16_t>();
      if (p >= m) throw ArchiveError(path.string() + ": permutation index out of range");
    }
    for (int k = 0; k < sign_bytes; ++k) {
      const auto byte = r.get<std::uint8_t>();
      for (int i = 0; i < 8 && 8 * k + i < m; ++i) s.q.signs[8 * k + i] = (byte >> i) & 1 ? -1 : 1;
    }
    s.b = 0;
    for (int k = 0; k < bit_bytes; ++k) s.b |= Bitstring{r.get<std::uint8_t>()} << (8 * k);
  }
  return set;
}

}  // namespace qcafqmc
