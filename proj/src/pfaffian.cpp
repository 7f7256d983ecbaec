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

#include "qcafqmc/pfaffian.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qcafqmc {

complex_t PfaffianValue::value() const {
  if (phase == complex_t{0.0, 0.0}) return {0.0, 0.0};
  return std::exp(log_abs) * phase;
}

CMatrix antisymmetrize(const CMatrix& a) {
  if (a.rows() != a.cols() || a.rows() % 2 != 0)
    throw DimensionError("Pfaffian needs a square matrix of even order");
  const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  const double sym = a.size() ? (a + a.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (sym > 1e-12 * std::max(scale, 1.0))
    throw InvalidArgumentError("matrix is not antisymmetric (residual " + std::to_string(sym) + ")");
  return 0.5 * (a - a.transpose());
}

namespace {

// |re| + |im|: a pivot measure that cannot overflow.
inline double magnitude(complex_t a) { return std::abs(a.real()) + std::abs(a.imag()); }

// Plain complex product; skips the inf/nan recovery of operator* in inner loops.
inline complex_t mul(complex_t a, complex_t b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// Reduces `a` in place to tridiagonal form. Calls on_pivot(k, value) for each
// 2x2 block; returns false as soon as a block is exactly zero. `sign` collects
// the row/column swap parity.
template <typename OnPivot>
bool parlett_reid(CMatrix& a, double& sign, OnPivot&& on_pivot) {
  const Eigen::Index n = a.rows();
  sign = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    Eigen::Index kp = k + 1;
    double best = magnitude(a(k + 1, k));
    for (Eigen::Index i = k + 2; i < n; ++i) {
      const double v = magnitude(a(i, k));
      if (v > best) {
        best = v;
        kp = i;
      }
    }
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      sign = -sign;
    }
    if (best == 0.0) return false;
    on_pivot(k, a(k, k + 1));
    const complex_t inv_pivot = 1.0 / a(k, k + 1);
    for (Eigen::Index j = k + 2; j < n; ++j) {
      const complex_t tau_j = mul(a(k, j), inv_pivot);
      const complex_t col_j = mul(a(j, k + 1), inv_pivot);
      for (Eigen::Index i = k + 2; i < n; ++i) a(i, j) += mul(a(k, i), col_j) - mul(a(i, k + 1), tau_j);
    }
  }
  return true;
}

// Gauss-Jordan with partial pivoting into `inv`, reusing `work` and the
// storage of `inv`; the result is projected onto antisymmetric matrices.
void invert_in_place(const CMatrix& a, CMatrix& work, CMatrix& inv) {
  const Eigen::Index n = a.rows();
  work = a;
  inv.setIdentity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    double best = magnitude(work(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double v = magnitude(work(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv != k) {
      work.row(k).swap(work.row(piv));
      inv.row(k).swap(inv.row(piv));
    }
    const complex_t d = 1.0 / work(k, k);
    for (Eigen::Index j = 0; j < n; ++j) {
      work(k, j) = mul(work(k, j), d);
      inv(k, j) = mul(inv(k, j), d);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == k) continue;
      const complex_t f = work(i, k);
      if (f == complex_t{0.0, 0.0}) continue;
      for (Eigen::Index j = 0; j < n; ++j) {
        work(i, j) -= mul(f, work(k, j));
        inv(i, j) -= mul(f, inv(k, j));
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    inv(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const complex_t v = 0.5 * (inv(i, j) - inv(j, i));
      inv(i, j) = v;
      inv(j, i) = -v;
    }
  }
}

}  // namespace

complex_t pfaffian(const CMatrix& a) {
  if (a.rows() == 0) return 1.0;
  CMatrix w = a;
  double sign = 1.0;
  complex_t prod = 1.0;
  if (!parlett_reid(w, sign, [&](Eigen::Index, complex_t p) { prod *= p; })) return 0.0;
  return sign * prod;
}

PfaffianValue pfaffian_log(const CMatrix& a) {
  PfaffianValue out;
  if (a.rows() == 0) return out;
  CMatrix w = a;
  double sign = 1.0;
  double log_abs = 0.0;
  complex_t phase = 1.0;
  const bool ok = parlett_reid(w, sign, [&](Eigen::Index, complex_t p) {
    log_abs += std::log(std::abs(p));
    phase *= p / std::abs(p);
  });
  if (!ok) {
    out.log_abs = -std::numeric_limits<double>::infinity();
    out.phase = 0.0;
    return out;
  }
  out.log_abs = log_abs;
  out.phase = sign * phase;
  return out;
}

bool try_pfaffian_with_inverse(const CMatrix& a, PfaffianInverse& out, double rel_guard, double* pivot) {
  const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  CMatrix w = a;
  double sign = 1.0;
  complex_t prod = 1.0;
  double smallest = std::numeric_limits<double>::infinity();
  const bool ok = parlett_reid(w, sign, [&](Eigen::Index, complex_t p) {
    prod *= p;
    smallest = std::min(smallest, std::abs(p));
  });
  if (!ok) smallest = 0.0;
  if (pivot) *pivot = smallest;
  if (a.rows() > 0 && (smallest < rel_guard * scale || std::abs(prod) < 1e-280)) return false;
  out.pf = sign * prod;
  invert_in_place(a, w, out.inv);
  return true;
}

PfaffianInverse pfaffian_with_inverse(const CMatrix& a, double rel_guard) {
  PfaffianInverse out;
  double pivot = 0.0;
  if (!try_pfaffian_with_inverse(a, out, rel_guard, &pivot))
    throw SingularPfaffianError("singular antisymmetric matrix", pivot);
  return out;
}

complex_t pfaffian_derivative(complex_t pf, const CMatrix& a_inv, const CMatrix& da) {
  // Tr(X Y) = sum_ij X_ij Y_ji
  return 0.5 * pf * a_inv.cwiseProduct(da.transpose()).sum();
}

complex_t pfaffian_second_derivative(complex_t pf, const CMatrix& a_inv, const CMatrix& da1,
                                     const CMatrix& da2, const CMatrix& d2a) {
  const complex_t t1 = a_inv.cwiseProduct(da1.transpose()).sum();
  const complex_t t2 = a_inv.cwiseProduct(da2.transpose()).sum();
  const complex_t t12 = a_inv.cwiseProduct(d2a.transpose()).sum();
  const CMatrix p1 = a_inv * da1;
  const CMatrix p2 = a_inv * da2;
  const complex_t cross = p1.cwiseProduct(p2.transpose()).sum();
  return 0.5 * pf * (t12 - cross + 0.5 * t1 * t2);
}

std::array<complex_t, 3> pfaffian_jet(const CMatrix& a, const CMatrix& da, const CMatrix& d2a) {
  const Eigen::Index m = a.rows() / 2;
  const double na = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  const double nd = da.size() ? da.cwiseAbs().maxCoeff() : 0.0;
  const double nd2 = d2a.size() ? d2a.cwiseAbs().maxCoeff() : 0.0;
  const bool quadratic = nd2 > 0.0;
  // Pf(A(t)) is a polynomial of degree m (or 2m when d2A != 0), so this many
  // equispaced samples determine it without aliasing.
  const int k_pts = static_cast<int>(quadratic ? 2 * m + 1 : m + 1) + 2;
  double r = 1.0;
  // Capped so that roundoff-level derivatives do not push the contour to overflow.
  const double denom = std::max(nd + std::sqrt(na * nd2), 1e-6 * na);
  if (denom > 0.0 && na > 0.0) r = na / denom;

  std::vector<complex_t> vals(k_pts);
  for (int j = 0; j < k_pts; ++j) {
    const complex_t t = r * std::polar(1.0, 2.0 * std::numbers::pi * j / k_pts);
    vals[j] = pfaffian(a + t * da + 0.5 * t * t * d2a);
  }
  std::array<complex_t, 3> out{};
  for (int order = 0; order < 3; ++order) {
    complex_t c = 0.0;
    for (int j = 0; j < k_pts; ++j) c += vals[j] * std::polar(1.0, -2.0 * std::numbers::pi * j * order / k_pts);
    c /= static_cast<double>(k_pts);
    c /= std::pow(r, order);
    out[order] = order == 2 ? 2.0 * c : c;
  }
  return out;
}

}  // namespace qcafqmc
