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

#include "qcafqmc/overlap.hpp"

#include <cmath>
#include <numbers>

#include "qcafqmc/pfaffian.hpp"

namespace qcafqmc {

RMatrix majorana_block(const CMatrix& x) {
  RMatrix m(2 * x.rows(), 2 * x.cols());
  for (Eigen::Index j = 0; j < x.rows(); ++j)
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const complex_t v = x(j, k);
      m(2 * j, 2 * k) = v.real();
      m(2 * j, 2 * k + 1) = -v.imag();
      m(2 * j + 1, 2 * k) = v.imag();
      m(2 * j + 1, 2 * k + 1) = v.real();
    }
  return m;
}

WalkerMatrix::WalkerMatrix(const CMatrix& v) : v_(v) {
  if (v.rows() == 0 || v.cols() > v.rows()) throw InvalidArgumentError("walker must be N x zeta with zeta <= N");
  if (v.cols() > 0 && v.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgumentError("walker matrix is zero");
  Eigen::HouseholderQR<CMatrix> qr(v);
  frame_ = qr.householderQ();
  det_r_ = 1.0;
  const double scale = v.cols() > 0 ? v.colwise().norm().maxCoeff() : 1.0;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    const complex_t r = qr.matrixQR()(i, i);
    if (std::abs(r) < 1e-14 * scale) throw InvalidArgumentError("walker columns are linearly dependent");
    det_r_ *= r;
  }
  m_phi_ = majorana_block(frame_.adjoint());
}

CMatrix w_matrix(int n, int xi) {
  CMatrix w = CMatrix::Identity(2 * n, 2 * n);
  const double h = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < xi; ++j) {
    w(2 * j, 2 * j) = h;
    w(2 * j, 2 * j + 1) = complex_t{0.0, -h};
    w(2 * j + 1, 2 * j) = h;
    w(2 * j + 1, 2 * j + 1) = complex_t{0.0, h};
  }
  return w;
}

std::vector<int> retained_indices(int n, int eta) {
  std::vector<int> idx;
  for (int j = 0; j < n; ++j) {
    if (j >= eta) idx.push_back(2 * j);
    idx.push_back(2 * j + 1);
  }
  return idx;
}

CMatrix vacuum_selected(int n, int eta) {
  const int dim = 2 * n - eta;
  CMatrix c = CMatrix::Zero(dim, dim);
  for (int i = eta; i + 1 < dim; i += 2) {
    c(i, i + 1) = 1.0;
    c(i + 1, i) = -1.0;
  }
  return c;
}

CMatrix build_B(const RMatrix& c_sigma, const RMatrix& m_phi, const CMatrix& w) {
  if (c_sigma.rows() != m_phi.rows() || w.rows() != m_phi.rows() || c_sigma.rows() != c_sigma.cols())
    throw DimensionError("B factors disagree in dimension");
  const CMatrix mc = m_phi.cast<complex_t>();
  return w.conjugate() * mc * c_sigma.cast<complex_t>() * mc.transpose() * w.adjoint();
}

std::vector<double> chebyshev_nodes(int n, int eta) {
  const int l = n - eta / 2;
  const int order = std::max(n, l + 1);
  std::vector<double> z(l + 1);
  for (int k = 0; k <= l; ++k) z[k] = std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * order));
  return z;
}

namespace {

RMatrix vandermonde(const std::vector<double>& z) {
  const auto m = static_cast<Eigen::Index>(z.size());
  RMatrix v(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    double p = 1.0;
    for (Eigen::Index x = 0; x < m; ++x) {
      v(k, x) = p;
      p *= z[k];
    }
  }
  return v;
}

complex_t prefactor(int n, int eta) {
  return 2.0 * std::pow(kI, eta / 2) / std::pow(2.0, n - eta / 2);
}

}  // namespace

OverlapPolynomial overlap_polynomial(const RMatrix& c_sigma, const WalkerMatrix& walker, int eta) {
  const int n = walker.n_modes();
  if (eta % 2 != 0) throw UnsupportedConfigurationError("odd electron counts are not supported");
  const CMatrix b = build_B(c_sigma, walker.m_phi(), w_matrix(n, eta));
  const auto idx = retained_indices(n, eta);
  const auto d = static_cast<Eigen::Index>(idx.size());
  CMatrix bs(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) bs(i, j) = b(idx[i], idx[j]);
  bs = 0.5 * (bs - bs.transpose()).eval();
  const CMatrix c0 = vacuum_selected(n, eta);
  const auto z = chebyshev_nodes(n, eta);
  CVector f(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) f(k) = pfaffian(c0 + z[k] * bs);
  const RMatrix v = vandermonde(z);
  Eigen::FullPivLU<CMatrix> lu(v.cast<complex_t>());
  if (!lu.isInvertible()) throw Error("numerical", "interpolation system is singular");
  return {lu.solve(f)};
}

complex_t overlap_from_polynomial(const OverlapPolynomial& poly, int n, int eta) {
  complex_t s = 0.0;
  for (Eigen::Index x = 0; x < poly.coeffs.size(); ++x)
    s += poly.coeffs(x) * binomial(2 * n, 2 * static_cast<int>(x)) / binomial(n, static_cast<int>(x));
  return prefactor(n, eta) * s;
}

CVector node_weights(int n, int eta) {
  const auto z = chebyshev_nodes(n, eta);
  const auto m = static_cast<Eigen::Index>(z.size());
  RVector w(m);
  for (Eigen::Index x = 0; x < m; ++x)
    w(x) = binomial(2 * n, 2 * static_cast<int>(x)) / binomial(n, static_cast<int>(x));
  const RVector beta = vandermonde(z).transpose().fullPivLu().solve(w);
  return prefactor(n, eta) * beta.cast<complex_t>();
}

complex_t sample_overlap(const ShadowSample& sample, const WalkerMatrix& walker, int eta) {
  const int n = walker.n_modes();
  if (sample.q.dim() != 2 * n) throw DimensionError("shadow sample does not match the walker");
  const RMatrix q = sample.q.matrix();
  const RMatrix c_sigma = q.transpose() * covariance_of(sample.b, n) * q;
  return overlap_from_polynomial(overlap_polynomial(c_sigma, walker, eta), n, eta);
}

double OverlapEstimate::std_error() const {
  return n_samples > 0 ? std::sqrt(variance / static_cast<double>(n_samples)) : 0.0;
}

CMatrix majorana_generator(const CMatrix& y) {
  const Eigen::Index n = y.rows();
  CMatrix c = CMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) {
      const complex_t v = 0.25 * y(p, q);
      c(2 * p, 2 * q) += v;
      c(2 * p, 2 * q + 1) += kI * v;
      c(2 * p + 1, 2 * q) -= kI * v;
      c(2 * p + 1, 2 * q + 1) += v;
    }
  return -2.0 * (c - c.transpose());
}

}  // namespace qcafqmc
