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

#include "qcafqmc/estimator.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "qcafqmc/pfaffian.hpp"

namespace qcafqmc {

ExactEstimator::ExactEstimator(FockState trial, int eta) : trial_(std::move(trial)), eta_(eta) {
  if (eta_ < 0 || eta_ > trial_.n_qubits) throw SectorViolationError("electron count out of range");
  for (Eigen::Index x = 0; x < trial_.amps.size(); ++x)
    if (std::abs(trial_.amps(x)) > 1e-14 && popcount(static_cast<Bitstring>(x)) != eta_)
      throw SectorViolationError("trial state leaves the " + std::to_string(eta_) + "-electron sector");
}

LocalEstimate ExactEstimator::evaluate(const CMatrix& v, const std::vector<CMatrix>& first,
                                       const std::vector<CMatrix>& second) const {
  const int n = trial_.n_qubits;
  if (v.rows() != n || v.cols() != eta_) throw DimensionError("walker does not match the trial state");
  const CVector phi = slater_amplitudes(v, n);
  LocalEstimate out;
  out.overlap = trial_.amps.dot(phi);
  if (std::abs(out.overlap) <= 1e-14 * phi.norm() * trial_.amps.norm())
    throw VanishingOverlapError("walker is orthogonal to the trial state");
  if (!first.empty()) {
    const CMatrix g = transition_one_body(trial_.amps, phi, n);
    for (const auto& y : first) out.first.push_back(y.cwiseProduct(g).sum() / out.overlap);
  }
  for (const auto& y : second) {
    const CVector a = apply_one_body(y, phi, n);
    const CVector b = apply_one_body(y.adjoint(), trial_.amps, n);
    out.second.push_back(b.dot(a) / out.overlap);
  }
  return out;
}

ShadowEstimator::ShadowEstimator(const ShadowSet& set) : n_(set.n_qubits), eta_(set.eta) {
  if (set.samples.empty()) throw NoSamplesError("shadow set is empty");
  if (eta_ % 2 != 0) throw UnsupportedConfigurationError("odd electron counts are not supported");
  std::map<std::pair<std::vector<std::uint16_t>, std::vector<std::int8_t>>, std::size_t> index;
  for (const auto& s : set.samples) {
    SnapshotMatching m = snapshot_matching(s, n_);
    auto key = std::make_pair(m.partner, m.sign);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(std::move(key), groups_.size());
      groups_.push_back({std::move(m), 1.0});
    } else {
      groups_[it->second].count += 1.0;
    }
  }
  n_samples_ = set.samples.size();
  nodes_ = chebyshev_nodes(n_, eta_);
  beta_ = node_weights(n_, eta_);
  c0_ = vacuum_selected(n_, eta_);
  const int d = 2 * n_ - eta_;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  perturbation_ = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      perturbation_(i, j) = complex_t{ud(rng), ud(rng)};
      perturbation_(j, i) = -perturbation_(i, j);
    }
}

namespace {

// X C for a signed matching C: column nu is sign[p] * X.col(p), p = partner[nu].
void times_matching(const CMatrix& x, const SnapshotMatching& m, CMatrix& out) {
  out.resize(x.rows(), x.cols());
  for (Eigen::Index nu = 0; nu < x.cols(); ++nu) {
    const int p = m.partner[nu];
    out.col(nu) = static_cast<double>(m.sign[p]) * x.col(p);
  }
}

complex_t trace_product(const CMatrix& a, const CMatrix& b) { return a.cwiseProduct(b.transpose()).sum(); }

}  // namespace

LocalEstimate ShadowEstimator::evaluate(const CMatrix& v, const std::vector<CMatrix>& first,
                                        const std::vector<CMatrix>& second) const {
  if (v.rows() != n_ || v.cols() != eta_) throw DimensionError("walker does not match the shadow set");
  const WalkerMatrix walker(v);
  const int m = 2 * n_;
  const int d = m - eta_;
  const RMatrix& mphi = walker.m_phi();

  // H = Omega_s M: the retained rows of W^* M.
  CMatrix h(d, m);
  {
    const double r2 = 1.0 / std::sqrt(2.0);
    int row = 0;
    for (int j = 0; j < n_; ++j) {
      if (j < eta_) {
        h.row(row++) = r2 * (mphi.row(2 * j).cast<complex_t>() - kI * mphi.row(2 * j + 1).cast<complex_t>());
      } else {
        h.row(row++) = mphi.row(2 * j).cast<complex_t>();
        h.row(row++) = mphi.row(2 * j + 1).cast<complex_t>();
      }
    }
  }
  const std::size_t n1 = first.size(), n2 = second.size();
  std::vector<CMatrix> u1(n1), u2(n2), v2(n2);
  for (std::size_t k = 0; k < n1; ++k) u1[k] = h * majorana_generator(first[k]);
  for (std::size_t k = 0; k < n2; ++k) {
    const CMatrix kk = majorana_generator(second[k]);
    u2[k] = h * kk;
    v2[k] = u2[k] * kk;
  }

  complex_t sum0 = 0.0;
  double sumsq = 0.0;
  std::vector<complex_t> sum1(n1, 0.0), sum2(n2, 0.0);
  std::vector<CMatrix> bd1(n1), bd2a(n2), bd2b(n2);
  CMatrix g, gu, b, a, y, p;
  PfaffianInverse pi;
  std::vector<complex_t> g1(n1), g2(n2);

  for (const auto& grp : groups_) {
    times_matching(h, grp.matching, g);
    b = g * h.transpose();
    b = 0.5 * (b - b.transpose()).eval();
    for (std::size_t k = 0; k < n1; ++k) {
      y = -u1[k] * g.transpose();
      bd1[k] = y - y.transpose();
    }
    for (std::size_t k = 0; k < n2; ++k) {
      y = -u2[k] * g.transpose();
      bd2a[k] = y - y.transpose();
      y = -v2[k] * g.transpose();
      times_matching(u2[k], grp.matching, gu);
      bd2b[k] = y - y.transpose() + 2.0 * gu * u2[k].transpose();
    }
    complex_t g0 = 0.0;
    std::fill(g1.begin(), g1.end(), complex_t{0.0});
    std::fill(g2.begin(), g2.end(), complex_t{0.0});
    // Adds w * (Pf, dPf, d2Pf) at `at`; false if `at` is singular.
    auto accumulate = [&](const CMatrix& at, complex_t w, double z) {
      if (!try_pfaffian_with_inverse(at, pi)) return false;
      g0 += w * pi.pf;
      for (std::size_t k = 0; k < n1; ++k) g1[k] += w * 0.5 * pi.pf * z * trace_product(pi.inv, bd1[k]);
      for (std::size_t k = 0; k < n2; ++k) {
        const complex_t t1 = trace_product(pi.inv, bd2a[k]);
        const complex_t t2 = trace_product(pi.inv, bd2b[k]);
        p.noalias() = pi.inv * bd2a[k];
        const complex_t cross = trace_product(p, p);
        g2[k] += w * 0.5 * pi.pf * (z * t2 - z * z * cross + 0.5 * z * z * t1 * t1);
      }
      return true;
    };
    for (std::size_t kz = 0; kz < nodes_.size(); ++kz) {
      const double z = nodes_[kz];
      const complex_t beta = beta_(static_cast<Eigen::Index>(kz));
      a = c0_ + z * b;
      if (accumulate(a, beta, z)) continue;
      ++singular_nodes_;
      // Pf and its derivatives are polynomials of degree <= d/2 in the entries
      // of A, so the mean over d/2 + 1 points of A + t E on a circle is exact.
      const complex_t g0_keep = g0;
      const std::vector<complex_t> g1_keep = g1, g2_keep = g2;
      const int k_pts = d / 2 + 1;
      const double radius = std::max(1.0, a.cwiseAbs().maxCoeff());
      bool ok = true;
      for (int j = 0; j < k_pts && ok; ++j) {
        const complex_t t = radius * std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / k_pts);
        ok = accumulate(a + t * perturbation_, beta / static_cast<double>(k_pts), z);
      }
      if (ok) continue;
      g0 = g0_keep;
      g1 = g1_keep;
      g2 = g2_keep;
      g0 += beta * pfaffian(a);
      const CMatrix zero = CMatrix::Zero(a.rows(), a.cols());
      for (std::size_t k = 0; k < n1; ++k) g1[k] += beta * pfaffian_jet(a, z * bd1[k], zero)[1];
      for (std::size_t k = 0; k < n2; ++k) g2[k] += beta * pfaffian_jet(a, z * bd2a[k], z * bd2b[k])[2];
    }
    sum0 += grp.count * g0;
    sumsq += grp.count * std::norm(g0);
    for (std::size_t k = 0; k < n1; ++k) sum1[k] += grp.count * g1[k];
    for (std::size_t k = 0; k < n2; ++k) sum2[k] += grp.count * g2[k];
  }

  const double ns = static_cast<double>(n_samples_);
  const complex_t mean = sum0 / ns;
  const double var = n_samples_ > 1 ? std::max(0.0, (sumsq - ns * std::norm(mean)) / (ns - 1.0)) : 0.0;
  const double se = std::sqrt(var / ns);
  if (mean == complex_t{0.0, 0.0} || std::abs(mean) < 1e-12 * se)
    throw VanishingOverlapError("shadow overlap is indistinguishable from zero");

  LocalEstimate out;
  out.overlap = walker.norm_factor() * mean;
  out.overlap_stderr = std::abs(walker.norm_factor()) * se;
  for (std::size_t k = 0; k < n1; ++k) out.first.push_back(sum1[k] / sum0);
  for (std::size_t k = 0; k < n2; ++k) out.second.push_back(sum2[k] / sum0);
  return out;
}

OverlapEstimate ShadowEstimator::estimate_overlap(const WalkerMatrix& walker) const {
  if (walker.n_modes() != n_ || walker.n_elec() != eta_) throw DimensionError("walker does not match the shadow set");
  OverlapEstimate out;
  out.n_samples = n_samples_;
  const double ns = static_cast<double>(n_samples_);
  const LocalEstimate le = [&] {
    try {
      return evaluate(walker.v(), {}, {});
    } catch (const VanishingOverlapError&) {
      return LocalEstimate{};
    }
  }();
  out.value = le.overlap;
  out.variance = le.overlap_stderr * le.overlap_stderr * ns;
  return out;
}

SpinOrbitalTerms spin_orbital_terms(const CholeskyHamiltonian& ham) {
  SpinOrbitalTerms t;
  t.e_core = ham.e_core;
  t.v0 = to_spin_orbital(ham.v0).cast<complex_t>();
  for (const auto& l : ham.L) t.l.push_back(to_spin_orbital(l).cast<complex_t>());
  return t;
}

CVector force_bias(const OverlapEstimator& est, const CMatrix& v, const SpinOrbitalTerms& terms) {
  return estimate_walker(est, v, terms, false).force_bias;
}

complex_t local_energy(const OverlapEstimator& est, const CMatrix& v, const SpinOrbitalTerms& terms) {
  return estimate_walker(est, v, terms, true).local_energy;
}

WalkerEstimate estimate_walker(const OverlapEstimator& est, const CMatrix& v, const SpinOrbitalTerms& terms,
                               bool with_energy) {
  std::vector<CMatrix> first = terms.l;
  std::vector<CMatrix> second;
  if (with_energy) {
    first.push_back(terms.v0);
    second = terms.l;
  }
  const LocalEstimate le = est.evaluate(v, first, second);
  WalkerEstimate out;
  out.overlap = le.overlap;
  out.overlap_stderr = le.overlap_stderr;
  const int ng = terms.n_gamma();
  out.force_bias.resize(ng);
  for (int g = 0; g < ng; ++g) out.force_bias(g) = kI * le.first[g];
  if (with_energy) {
    complex_t e = terms.e_core + le.first[ng];
    for (int g = 0; g < ng; ++g) e += 0.5 * le.second[g];
    out.local_energy = e;
    out.has_energy = true;
  }
  return out;
}

}  // namespace qcafqmc
