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


#include "qcafqmc/rdm.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace qcafqmc {

namespace {

struct Moments {
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
  }
  double mean(double n) const { return sum / n; }
  double stderr_of(double n) const {
    if (n < 2.0) return 0.0;
    const double m = sum / n;
    return std::sqrt(std::max(0.0, (sumsq - n * m * m) / (n - 1.0)) / n);
  }
};

// Channel-inverse weight of a two-Majorana monomial: C(2n, 2) / C(n, 1).
double pair_weight(int n) { return 2.0 * n - 1.0; }

void check_indices(const ShadowSet& set, int mu, int nu) {
  if (set.samples.empty()) throw NoSamplesError("shadow set is empty");
  const int m = 2 * set.n_qubits;
  if (mu < 0 || nu < 0 || mu >= m || nu >= m) throw DimensionError("Majorana index out of range");
  if (mu == nu) throw InvalidArgumentError("Majorana indices must differ");
}

}  // namespace

MajoranaEstimate estimate_majorana_expectation(const ShadowSet& set, int mu, int nu) {
  check_indices(set, mu, nu);
  const double w = pair_weight(set.n_qubits);
  Moments im;
  for (const auto& s : set.samples) {
    const SnapshotMatching c = snapshot_matching(s, set.n_qubits);
    // <gamma_mu gamma_nu> = i C(mu, nu)
    im.add(c.partner[mu] == nu ? w * c.sign[mu] : 0.0);
  }
  const double n = static_cast<double>(set.samples.size());
  return {complex_t{0.0, im.mean(n)}, 0.0, im.stderr_of(n)};
}

MajoranaEstimate estimate_majorana_expectation(const ShadowSet& set, int mu, int nu, const RMatrix& rotation) {
  check_indices(set, mu, nu);
  const int m = 2 * set.n_qubits;
  if (rotation.rows() != m || rotation.cols() != m) throw DimensionError("rotation must be 2N x 2N");
  if ((rotation * rotation.transpose() - RMatrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidRotationError("rotation is not orthogonal");
  const double w = pair_weight(set.n_qubits);
  Moments im;
  for (const auto& s : set.samples) {
    const SnapshotMatching c = snapshot_matching(s, set.n_qubits);
    double v = 0.0;
    for (int a = 0; a < m; ++a) v += rotation(mu, a) * c.sign[a] * rotation(nu, c.partner[a]);
    im.add(w * v);
  }
  const double n = static_cast<double>(set.samples.size());
  return {complex_t{0.0, im.mean(n)}, 0.0, im.stderr_of(n)};
}

OneRdm estimate_1rdm(const ShadowSet& set) {
  if (set.samples.empty()) throw NoSamplesError("shadow set is empty");
  const int n = set.n_qubits;
  const double w = pair_weight(n);
  std::vector<Moments> re(static_cast<std::size_t>(n) * n), im(re.size());
  Moments trace;
  RMatrix c = RMatrix::Zero(2 * n, 2 * n);
  for (const auto& s : set.samples) {
    const SnapshotMatching mt = snapshot_matching(s, n);
    c.setZero();
    for (int a = 0; a < 2 * n; ++a) c(a, mt.partner[a]) = mt.sign[a];
    double tr = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        // a^dag_p a_q = 1/4 (g2p g2q + i g2p g2q+1 - i g2p+1 g2q + g2p+1 g2q+1),
        // a^dag_p a_p = 1/2 (1 + i g2p g2p+1), with <g_mu g_nu> = i w C(mu, nu).
        complex_t d;
        if (p == q) {
          d = 0.5 * (1.0 - w * c(2 * p, 2 * p + 1));
        } else {
          const complex_t g00 = kI * w * c(2 * p, 2 * q), g01 = kI * w * c(2 * p, 2 * q + 1);
          const complex_t g10 = kI * w * c(2 * p + 1, 2 * q), g11 = kI * w * c(2 * p + 1, 2 * q + 1);
          d = 0.25 * (g00 + kI * g01 - kI * g10 + g11);
        }
        d *= 2.0;
        if (p == q) tr += d.real();
        const std::size_t k = static_cast<std::size_t>(p) * n + q;
        re[k].add(d.real());
        im[k].add(d.imag());
      }
    }
    trace.add(tr);
  }
  const double ns = static_cast<double>(set.samples.size());
  OneRdm out;
  out.n_samples = set.samples.size();
  out.trace_stderr = trace.stderr_of(ns);
  out.matrix.resize(n, n);
  out.stderr_re.resize(n, n);
  out.stderr_im.resize(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const std::size_t k = static_cast<std::size_t>(p) * n + q;
      out.matrix(p, q) = {re[k].mean(ns), im[k].mean(ns)};
      out.stderr_re(p, q) = re[k].stderr_of(ns);
      out.stderr_im(p, q) = im[k].stderr_of(ns);
    }
  return out;
}

double particle_number(const OneRdm& rdm) { return rdm.matrix.trace().real(); }

void write_rdm_csv(const OneRdm& rdm, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ArchiveError("cannot write " + tmp.string());
    out << "p,q,re,im,stderr_re,stderr_im\n" << std::setprecision(17);
    for (Eigen::Index p = 0; p < rdm.matrix.rows(); ++p)
      for (Eigen::Index q = 0; q < rdm.matrix.cols(); ++q)
        out << p << ',' << q << ',' << rdm.matrix(p, q).real() << ',' << rdm.matrix(p, q).imag() << ','
            << rdm.stderr_re(p, q) << ',' << rdm.stderr_im(p, q) << '\n';
    if (!out) throw ArchiveError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qcafqmc
