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

#include "qcafqmc/focksim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace qcafqmc {

namespace {

void check_modes(int n) {
  if (n < 1 || n > 30) throw CapacityError("statevector over " + std::to_string(n) + " modes is out of range");
}

}  // namespace

FockState FockState::zero(int n) {
  check_modes(n);
  return {n, CVector::Zero(Eigen::Index{1} << n)};
}

FockState FockState::basis(int n, Bitstring b) {
  FockState s = zero(n);
  s.amps(static_cast<Eigen::Index>(b)) = 1.0;
  return s;
}

TrialState build_trial(const FockState& psi_t, int eta) {
  if (eta < 1 || eta > psi_t.n_qubits)
    throw SectorViolationError("electron count " + std::to_string(eta) + " is invalid for " +
                               std::to_string(psi_t.n_qubits) + " modes");
  if (std::abs(psi_t.norm() - 1.0) > 1e-8) throw InvalidArgumentError("trial state is not normalized");
  for (Eigen::Index x = 0; x < psi_t.amps.size(); ++x) {
    if (std::abs(psi_t.amps(x)) > 1e-14 && popcount(static_cast<Bitstring>(x)) != eta)
      throw SectorViolationError("trial amplitude on " + bitstring_to_string(x, psi_t.n_qubits) +
                                 " lies outside the " + std::to_string(eta) + "-electron sector");
  }
  TrialState t;
  t.psi_t = psi_t;
  t.eta = eta;
  t.superposition = psi_t;
  t.superposition.amps(0) += 1.0;
  t.superposition.amps /= std::sqrt(2.0);
  return t;
}

bool apply_hop(int p, int q, Bitstring& x, double& sign) {
  const Bitstring bq = Bitstring{1} << q;
  if (!(x & bq)) return false;
  sign *= jw_sign(x, q);
  x ^= bq;
  const Bitstring bp = Bitstring{1} << p;
  if (x & bp) return false;
  sign *= jw_sign(x, p);
  x ^= bp;
  return true;
}

std::pair<complex_t, Bitstring> majorana_on_basis(int mu, Bitstring x) {
  const int j = mu / 2;
  const Bitstring bj = Bitstring{1} << j;
  const double s = jw_sign(x, j);
  if (mu % 2 == 0) return {s, x ^ bj};
  return {(x & bj) ? complex_t{0.0, -s} : complex_t{0.0, s}, x ^ bj};
}

std::vector<MajoranaGivens> majorana_givens(const RMatrix& q) {
  const Eigen::Index m = q.rows();
  if (q.cols() != m || m % 2 != 0) throw InvalidRotationError("rotation must be square of even order");
  if ((q.transpose() * q - RMatrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidRotationError("matrix is not orthogonal");
  if (q.determinant() < 0.0) throw UnsupportedParityError("orthogonal matrix has determinant -1");

  // Eliminate below the diagonal with rotations G on rows (r-1, r), so that
  // G_k ... G_1 Q = D. Then Q = G_1^T ... G_k^T D.
  RMatrix a = q;
  std::vector<MajoranaGivens> out;
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index r = m - 1; r > c; --r) {
      const double x = a(r - 1, c);
      const double y = a(r, c);
      if (std::abs(y) < 1e-15) continue;
      const double th = std::atan2(y, x);
      const double cs = std::cos(th), sn = std::sin(th);
      for (Eigen::Index k = 0; k < m; ++k) {
        const double u = a(r - 1, k), v = a(r, k);
        a(r - 1, k) = cs * u + sn * v;
        a(r, k) = -sn * u + cs * v;
      }
      out.push_back({static_cast<int>(r - 1), static_cast<int>(r), -th});
    }
  }
  std::vector<int> neg;
  for (Eigen::Index i = 0; i < m; ++i)
    if (a(i, i) < 0.0) neg.push_back(static_cast<int>(i));
  for (std::size_t k = 0; k + 1 < neg.size(); k += 2) out.push_back({neg[k], neg[k + 1], -std::numbers::pi});
  return out;
}

void apply_majorana_rotation(const std::vector<MajoranaGivens>& factors, CVector& state, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CVector next(dim);
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    const double c = std::cos(0.5 * it->angle), s = std::sin(0.5 * it->angle);
    next = c * state;
    for (Eigen::Index x = 0; x < dim; ++x) {
      if (state(x) == complex_t{0.0, 0.0}) continue;
      auto [p1, y] = majorana_on_basis(it->nu, static_cast<Bitstring>(x));
      auto [p2, z] = majorana_on_basis(it->mu, y);
      next(static_cast<Eigen::Index>(z)) += s * p1 * p2 * state(x);
    }
    state.swap(next);
  }
}

MajoranaRotation majorana_unitary(const RMatrix& q) {
  const auto factors = majorana_givens(q);
  const int n = static_cast<int>(q.rows() / 2);
  check_modes(n);
  const Eigen::Index dim = Eigen::Index{1} << n;
  MajoranaRotation out;
  out.q = q;
  out.u = CMatrix(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    CVector col = CVector::Zero(dim);
    col(x) = 1.0;
    apply_majorana_rotation(factors, col, n);
    out.u.col(x) = col;
  }
  for (Eigen::Index k = 0; k < out.u.size(); ++k) {
    const complex_t v = out.u.data()[k];
    if (std::abs(v) > 1e-12) {
      out.u *= std::conj(v) / std::abs(v);
      break;
    }
  }
  return out;
}

CMatrix majorana_matrix(int mu, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix g = CMatrix::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    auto [ph, y] = majorana_on_basis(mu, static_cast<Bitstring>(x));
    g(static_cast<Eigen::Index>(y), x) = ph;
  }
  return g;
}

Bitstring measure(const FockState& state, std::mt19937_64& rng) {
  const double total = state.amps.squaredNorm();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u = uni(rng) * total;
  Eigen::Index last = 0;
  for (Eigen::Index x = 0; x < state.amps.size(); ++x) {
    const double p = std::norm(state.amps(x));
    if (p == 0.0) continue;
    last = x;
    if (u < p) return static_cast<Bitstring>(x);
    u -= p;
  }
  return static_cast<Bitstring>(last);
}

CVector slater_amplitudes(const CMatrix& v, int n) {
  check_modes(n);
  if (v.rows() != n) throw DimensionError("walker rows do not match the number of modes");
  const int eta = static_cast<int>(v.cols());
  const Eigen::Index dim = Eigen::Index{1} << n;
  CVector out = CVector::Zero(dim);
  CMatrix sub(eta, eta);
  for (Eigen::Index x = 0; x < dim; ++x) {
    if (popcount(static_cast<Bitstring>(x)) != eta) continue;
    int r = 0;
    for (int j = 0; j < n; ++j)
      if ((x >> j) & 1) sub.row(r++) = v.row(j);
    out(x) = eta == 0 ? complex_t{1.0, 0.0} : sub.determinant();
  }
  return out;
}

CVector apply_one_body(const CMatrix& y, const CVector& v, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CVector out = CVector::Zero(dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    if (v(x) == complex_t{0.0, 0.0}) continue;
    for (int q = 0; q < n; ++q) {
      if (!((x >> q) & 1)) continue;
      for (int p = 0; p < n; ++p) {
        if (y(p, q) == complex_t{0.0, 0.0}) continue;
        Bitstring z = static_cast<Bitstring>(x);
        double s = 1.0;
        if (apply_hop(p, q, z, s)) out(static_cast<Eigen::Index>(z)) += y(p, q) * s * v(x);
      }
    }
  }
  return out;
}

CMatrix transition_one_body(const CVector& bra, const CVector& ket, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix g = CMatrix::Zero(n, n);
  for (Eigen::Index x = 0; x < dim; ++x) {
    if (ket(x) == complex_t{0.0, 0.0}) continue;
    for (int q = 0; q < n; ++q) {
      if (!((x >> q) & 1)) continue;
      for (int p = 0; p < n; ++p) {
        Bitstring z = static_cast<Bitstring>(x);
        double s = 1.0;
        if (apply_hop(p, q, z, s)) g(p, q) += std::conj(bra(static_cast<Eigen::Index>(z))) * s * ket(x);
      }
    }
  }
  return g;
}

namespace {

// Appends H|x> as (basis, coefficient) pairs.
void hamiltonian_row(const IntegralSet& ints, Bitstring x, std::vector<std::pair<Bitstring, double>>& out) {
  const int n = 2 * ints.n_orb;
  out.emplace_back(x, ints.e_core);
  for (int qs = 0; qs < n; ++qs) {
    if (!((x >> qs) & 1)) continue;
    for (int ps = qs % 2; ps < n; ps += 2) {
      Bitstring z = x;
      double s = 1.0;
      if (apply_hop(ps, qs, z, s)) out.emplace_back(z, s * ints.t(ps / 2, qs / 2));
    }
  }
  // 1/2 sum (pq|rs) a^dag_P a^dag_R a_S a_Q with spin(P)=spin(Q), spin(R)=spin(S)
  for (int qs = 0; qs < n; ++qs) {
    if (!((x >> qs) & 1)) continue;
    const Bitstring x1 = x ^ (Bitstring{1} << qs);
    const double s1 = jw_sign(x, qs);
    for (int ss = 0; ss < n; ++ss) {
      if (!((x1 >> ss) & 1)) continue;
      const Bitstring x2 = x1 ^ (Bitstring{1} << ss);
      const double s2 = s1 * jw_sign(x1, ss);
      for (int rs = ss % 2; rs < n; rs += 2) {
        if ((x2 >> rs) & 1) continue;
        const Bitstring x3 = x2 ^ (Bitstring{1} << rs);
        const double s3 = s2 * jw_sign(x2, rs);
        for (int ps = qs % 2; ps < n; ps += 2) {
          if ((x3 >> ps) & 1) continue;
          const double v = ints.eri(ps / 2, qs / 2, rs / 2, ss / 2);
          if (v == 0.0) continue;
          out.emplace_back(x3 ^ (Bitstring{1} << ps), 0.5 * v * s3 * jw_sign(x3, ps));
        }
      }
    }
  }
}

}  // namespace

CVector apply_hamiltonian(const IntegralSet& ints, const CVector& v) {
  const int n = 2 * ints.n_orb;
  check_modes(n);
  if (v.size() != (Eigen::Index{1} << n)) throw DimensionError("statevector size does not match the integrals");
  CVector out = CVector::Zero(v.size());
  std::vector<std::pair<Bitstring, double>> row;
  for (Eigen::Index x = 0; x < v.size(); ++x) {
    if (v(x) == complex_t{0.0, 0.0}) continue;
    row.clear();
    hamiltonian_row(ints, static_cast<Bitstring>(x), row);
    for (const auto& [z, h] : row) out(static_cast<Eigen::Index>(z)) += h * v(x);
  }
  return out;
}

GroundState exact_ground_state(const IntegralSet& ints, int n_alpha, int n_beta) {
  const int n = 2 * ints.n_orb;
  if (n > kMaxDenseModes)
    throw CapacityError(std::to_string(n) + " spin orbitals exceed the dense budget of " +
                        std::to_string(kMaxDenseModes));
  if (n_alpha < 0 || n_beta < 0 || n_alpha > ints.n_orb || n_beta > ints.n_orb)
    throw CapacityError("electron counts do not fit in " + std::to_string(ints.n_orb) + " orbitals");

  Bitstring alpha_mask = 0;
  for (int p = 0; p < ints.n_orb; ++p) alpha_mask |= Bitstring{1} << (2 * p);
  std::vector<Bitstring> dets;
  for (Bitstring x = 0; x < (Bitstring{1} << n); ++x)
    if (popcount(x & alpha_mask) == n_alpha && popcount(x & ~alpha_mask) == n_beta) dets.push_back(x);
  std::unordered_map<Bitstring, Eigen::Index> index;
  for (std::size_t i = 0; i < dets.size(); ++i) index[dets[i]] = static_cast<Eigen::Index>(i);

  const auto dim = static_cast<Eigen::Index>(dets.size());
  RMatrix h = RMatrix::Zero(dim, dim);
  std::vector<std::pair<Bitstring, double>> row;
  for (Eigen::Index i = 0; i < dim; ++i) {
    row.clear();
    hamiltonian_row(ints, dets[i], row);
    for (const auto& [z, v] : row) h(index.at(z), i) += v;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(0.5 * (h + h.transpose()));
  if (eig.info() != Eigen::Success) throw Error("numerical", "dense diagonalization failed");

  GroundState out;
  out.energy = eig.eigenvalues()(0);
  out.state = FockState::zero(n);
  RVector c = eig.eigenvectors().col(0);
  Eigen::Index big;
  c.cwiseAbs().maxCoeff(&big);
  if (c(big) < 0.0) c = -c;
  for (Eigen::Index i = 0; i < dim; ++i) out.state.amps(static_cast<Eigen::Index>(dets[i])) = c(i);
  return out;
}

GroundState exact_ground_state(const IntegralSet& ints) {
  return exact_ground_state(ints, ints.n_alpha, ints.n_beta);
}

GroundState exact_ground_state(const CholeskyHamiltonian& ham) {
  return exact_ground_state(ham.reconstruct(), ham.n_alpha, ham.n_beta);
}

std::string bitstring_to_string(Bitstring b, int n) {
  std::string s(n, '0');
  for (int j = 0; j < n; ++j)
    if ((b >> j) & 1) s[j] = '1';
  return s;
}

Bitstring bitstring_from_string(const std::string& s) {
  if (s.empty() || s.size() > 64) throw MalformedInputError("bad bitstring '" + s + "'");
  Bitstring b = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] == '1') b |= Bitstring{1} << j;
    else if (s[j] != '0') throw MalformedInputError("bad bitstring '" + s + "'");
  }
  return b;
}

FockState load_trial_amplitudes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open trial amplitudes " + path.string());
  std::vector<std::pair<Bitstring, complex_t>> recs;
  int n = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string bits;
    double re = 0.0, im = 0.0;
    if (!(ss >> bits >> re >> im))
      throw MalformedInputError(path.string() + ": line " + std::to_string(line_no) + ": expected 'bitstring re im'");
    if (n == -1) n = static_cast<int>(bits.size());
    if (static_cast<int>(bits.size()) != n)
      throw MalformedInputError(path.string() + ": line " + std::to_string(line_no) + ": bitstring length changes");
    recs.emplace_back(bitstring_from_string(bits), complex_t{re, im});
  }
  if (n <= 0) throw MalformedInputError(path.string() + ": no amplitudes");
  FockState s = FockState::zero(n);
  for (const auto& [b, a] : recs) s.amps(static_cast<Eigen::Index>(b)) += a;
  const double nrm = s.norm();
  if (nrm == 0.0) throw MalformedInputError(path.string() + ": zero state");
  s.amps /= nrm;
  return s;
}

void save_trial_amplitudes(const FockState& state, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ArchiveError("cannot write " + tmp.string());
    out << std::setprecision(17);
    for (Eigen::Index x = 0; x < state.amps.size(); ++x) {
      const complex_t a = state.amps(x);
      if (std::abs(a) < 1e-15) continue;
      out << bitstring_to_string(static_cast<Bitstring>(x), state.n_qubits) << ' ' << a.real() << ' '
          << a.imag() << '\n';
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qcafqmc
