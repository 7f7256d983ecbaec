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


#include "qcafqmc/vce.hpp"

#include <algorithm>

namespace qcafqmc {

namespace {

CMatrix take_rows(const CMatrix& x, const std::vector<int>& rows) {
  CMatrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

std::vector<int> spin_orbitals(const std::vector<int>& spatial) {
  std::vector<int> out;
  for (int p : spatial) {
    out.push_back(2 * p);
    out.push_back(2 * p + 1);
  }
  return out;
}

complex_t trace_product(const CMatrix& a, const CMatrix& b) { return a.cwiseProduct(b.transpose()).sum(); }

}  // namespace

std::vector<int> CorePartition::core_so() const {
  std::vector<int> sorted = core;
  std::sort(sorted.begin(), sorted.end());
  return spin_orbitals(sorted);
}

std::vector<int> CorePartition::active_so() const { return spin_orbitals(active); }

RMatrix CorePartition::core_occupancy() const {
  const auto so = core_so();
  RMatrix xi = RMatrix::Zero(n_full_modes(), static_cast<Eigen::Index>(so.size()));
  for (std::size_t i = 0; i < so.size(); ++i) xi(so[i], static_cast<Eigen::Index>(i)) = 1.0;
  return xi;
}

CorePartition make_partition(int n_full, const std::vector<int>& core, const std::vector<int>& active) {
  if (n_full < 1) throw PartitionError("orbital count must be positive");
  std::vector<int> owner(n_full, -1);
  auto claim = [&](const std::vector<int>& list, int tag) {
    for (int p : list) {
      if (p < 0 || p >= n_full) throw PartitionError("orbital index " + std::to_string(p) + " out of range");
      if (owner[p] != -1) throw PartitionError("orbital " + std::to_string(p) + " appears in more than one space");
      owner[p] = tag;
    }
  };
  claim(core, 0);
  claim(active, 1);
  if (active.empty()) throw PartitionError("active space is empty");
  CorePartition part;
  part.n_full = n_full;
  part.core = core;
  part.active = active;
  for (int p = 0; p < n_full; ++p)
    if (owner[p] == -1) part.virt.push_back(p);
  return part;
}

CorePartition partition_of(const EmbeddedSystem& sys) { return make_partition(sys.n_full, sys.core, sys.active); }

FockState embed_trial(const FockState& active, const CorePartition& part) {
  const auto core = part.core_so();
  const auto act = part.active_so();
  if (active.n_qubits != static_cast<int>(act.size())) throw DimensionError("active state does not match the partition");
  FockState full = FockState::zero(part.n_full_modes());
  for (Eigen::Index x = 0; x < active.amps.size(); ++x) {
    if (active.amps(x) == complex_t{0.0, 0.0}) continue;
    // Creation string: core modes first, then the occupied active modes in order.
    std::vector<int> modes = core;
    for (std::size_t i = 0; i < act.size(); ++i)
      if ((x >> i) & 1) modes.push_back(act[i]);
    int inversions = 0;
    Bitstring b = 0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      b |= Bitstring{1} << modes[i];
      for (std::size_t j = i + 1; j < modes.size(); ++j) inversions += modes[i] > modes[j];
    }
    full.amps(static_cast<Eigen::Index>(b)) += (inversions % 2 ? -1.0 : 1.0) * active.amps(x);
  }
  return full;
}

namespace {

struct CoreSvd {
  CMatrix u;
  RVector s;
  CMatrix w;
};

CoreSvd core_svd(const CMatrix& v, const std::vector<int>& core_so) {
  const auto k = static_cast<Eigen::Index>(core_so.size());
  CoreSvd out;
  if (k == 0) {
    out.u = CMatrix(0, 0);
    out.s = RVector(0);
    out.w = CMatrix::Identity(v.cols(), v.cols());
    return out;
  }
  if (v.cols() < k) throw DecoupledCoreError("walker has fewer electrons than core orbitals");
  Eigen::JacobiSVD<CMatrix> svd(take_rows(v, core_so), Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.u = svd.matrixU();
  out.s = svd.singularValues();
  out.w = svd.matrixV();
  const double scale = std::max(1.0, v.colwise().norm().maxCoeff());
  if (out.s(k - 1) < 1e-10 * scale)
    throw DecoupledCoreError("core overlap is rank deficient (singular value " + std::to_string(out.s(k - 1)) + ")");
  return out;
}

}  // namespace

CoreFactorization factor_core(const CMatrix& v, const CorePartition& part) {
  const auto core = part.core_so();
  if (v.rows() != part.n_full_modes()) throw DimensionError("walker does not match the full orbital space");
  const CoreSvd svd = core_svd(v, core);
  const auto k = static_cast<Eigen::Index>(core.size());
  CoreFactorization f;
  f.singular_values = svd.s;
  complex_t dets = k ? svd.u.determinant() : complex_t{1.0, 0.0};
  for (Eigen::Index i = 0; i < k; ++i) dets *= svd.s(i);
  f.core_factor = dets / svd.w.determinant();
  f.active_walker = take_rows(v, part.active_so()) * svd.w.rightCols(v.cols() - k);
  return f;
}

VceEstimator::VceEstimator(std::shared_ptr<const OverlapEstimator> active, CorePartition part)
    : active_(std::move(active)), part_(std::move(part)) {
  if (!active_) throw InvalidArgumentError("VCE needs an active-space estimator");
  core_so_ = part_.core_so();
  active_so_ = part_.active_so();
  if (active_->n_modes() != static_cast<int>(active_so_.size()))
    throw DimensionError("active estimator does not match the partition");
}

LocalEstimate VceEstimator::evaluate(const CMatrix& v, const std::vector<CMatrix>& first,
                                     const std::vector<CMatrix>& second) const {
  if (v.rows() != n_modes() || v.cols() != n_elec()) throw DimensionError("walker does not match the VCE estimator");
  const auto k = static_cast<Eigen::Index>(core_so_.size());
  const Eigen::Index m = v.cols() - k;
  const CoreSvd svd = core_svd(v, core_so_);
  const CMatrix w1 = svd.w.leftCols(k);
  const CMatrix w2 = svd.w.rightCols(m);
  complex_t core_factor = k ? svd.u.determinant() : complex_t{1.0, 0.0};
  for (Eigen::Index i = 0; i < k; ++i) core_factor *= svd.s(i);
  core_factor /= svd.w.determinant();

  const CMatrix phi_a = take_rows(v, active_so_);
  const CMatrix psi = phi_a * w2;
  if (first.empty() && second.empty()) {
    const LocalEstimate le = active_->evaluate(psi, {}, {});
    return {core_factor * le.overlap, std::abs(core_factor) * le.overlap_stderr, {}, {}};
  }

  // P = Phi_c W1 = U Sigma.
  CMatrix p_inv(k, k);
  for (Eigen::Index i = 0; i < k; ++i) p_inv.row(i) = svd.u.col(i).adjoint() / svd.s(i);
  const Eigen::HouseholderQR<CMatrix> qr(psi);
  const CMatrix q_thin = qr.householderQ() * CMatrix::Identity(psi.rows(), m);
  const CMatrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const CMatrix psi_plus = r.triangularView<Eigen::Upper>().solve(q_thin.adjoint());
  const CMatrix phi_a_w1 = phi_a * w1;

  struct Direction {
    complex_t log_det1;
    CMatrix t1;
    CMatrix yv;
    CMatrix z1;
  };
  auto direction = [&](const CMatrix& y) {
    if (y.rows() != v.rows() || y.cols() != v.rows()) throw DimensionError("one-body matrix does not match the walker");
    Direction d;
    d.yv = y * v;
    const CMatrix c1 = take_rows(d.yv, core_so_);
    const CMatrix pp = p_inv * (c1 * w1);
    d.log_det1 = pp.trace();
    d.t1 = p_inv * (c1 * w2);
    const CMatrix psi1 = take_rows(d.yv, active_so_) * w2 - phi_a_w1 * d.t1;
    d.z1 = psi1 * psi_plus;
    return d;
  };

  std::vector<CMatrix> act_first, act_second;
  std::vector<Direction> dirs1;
  for (const auto& y : first) {
    dirs1.push_back(direction(y));
    act_first.push_back(dirs1.back().z1);
  }
  struct Second {
    complex_t log_det1;
    complex_t core_term;
    std::size_t z1_index;
    std::size_t z2_index;
  };
  std::vector<Second> dirs2;
  for (std::size_t s = 0; s < second.size(); ++s) {
    const CMatrix& y = second[s];
    std::size_t reuse = first.size();
    for (std::size_t j = 0; j < first.size(); ++j)
      if (first[j].data() == y.data() || (first[j].rows() == y.rows() && first[j] == y)) {
        reuse = j;
        break;
      }
    const Direction d = reuse < first.size() ? dirs1[reuse] : direction(y);
    Second out;
    out.log_det1 = d.log_det1;
    if (reuse < first.size()) {
      out.z1_index = reuse;
    } else {
      out.z1_index = act_first.size();
      act_first.push_back(d.z1);
    }
    const CMatrix y2v = y * d.yv;
    const CMatrix c1 = take_rows(d.yv, core_so_);
    const CMatrix c2 = take_rows(y2v, core_so_);
    const CMatrix pp1 = p_inv * (c1 * w1);
    out.core_term = (p_inv * (c2 * w1)).trace() - trace_product(pp1, pp1) + d.log_det1 * d.log_det1;
    const CMatrix t2 = p_inv * (c2 * w2) - 2.0 * pp1 * d.t1;
    const CMatrix psi2 = take_rows(y2v, active_so_) * w2 - 2.0 * take_rows(d.yv, active_so_) * w1 * d.t1 - phi_a_w1 * t2;
    out.z2_index = act_first.size();
    act_first.push_back(psi2 * psi_plus - d.z1 * d.z1);
    act_second.push_back(d.z1);
    dirs2.push_back(out);
  }

  const LocalEstimate le = active_->evaluate(psi, act_first, act_second);
  LocalEstimate out;
  out.overlap = core_factor * le.overlap;
  out.overlap_stderr = std::abs(core_factor) * le.overlap_stderr;
  for (std::size_t j = 0; j < first.size(); ++j) out.first.push_back(dirs1[j].log_det1 + le.first[j]);
  for (std::size_t s = 0; s < second.size(); ++s) {
    const Second& d = dirs2[s];
    const complex_t f1 = le.first[d.z1_index];
    const complex_t f2 = le.first[d.z2_index] + le.second[s];
    out.second.push_back(d.core_term + 2.0 * d.log_det1 * f1 + f2);
  }
  return out;
}

}  // namespace qcafqmc
