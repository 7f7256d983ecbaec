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


#include "qcafqmc/propagate.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "qcafqmc/binio.hpp"
#include "qcafqmc/pfaffian.hpp"

namespace qcafqmc {

void PropagationConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidArgumentError("time step must be positive");
  if (n_walkers < 1 || n_blocks < 0 || steps_per_block < 1 || reorth_interval < 1 || energy_interval < 1)
    throw InvalidArgumentError("walker, block and interval counts must be positive");
  if (!(force_bias_cap > 0.0)) throw InvalidArgumentError("force-bias cap must be positive");
  if (threads < 1) throw InvalidArgumentError("thread count must be positive");
}

std::uint64_t PropagationConfig::hash() const {
  binio::Fnv1a h;
  h.update(dt);
  h.update(n_walkers);
  h.update(steps_per_block);
  h.update(reorth_interval);
  h.update(energy_interval);
  h.update(static_cast<int>(hybrid));
  h.update(force_bias_cap);
  h.update(seed);
  return h.digest();
}

CMatrix determinant_walker(Bitstring b, int n_modes) {
  CMatrix v = CMatrix::Zero(n_modes, popcount(b));
  int c = 0;
  for (int j = 0; j < n_modes; ++j)
    if ((b >> j) & 1) v(j, c++) = 1.0;
  return v;
}

CMatrix spin_orbital_exp(const CMatrix& spatial) {
  const CMatrix e = spatial.exp();
  const Eigen::Index n = spatial.rows();
  CMatrix so = CMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) so(2 * p, 2 * q) = so(2 * p + 1, 2 * q + 1) = e(p, q);
  return so;
}

void population_control(std::vector<Walker>& walkers, int target, std::mt19937_64& rng) {
  double total = 0.0;
  for (const auto& w : walkers) total += w.weight;
  if (!(total > 0.0) || !std::isfinite(total)) throw PopulationCollapseError("total walker weight is zero");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);
  const double spacing = total / target;
  std::vector<Walker> out;
  out.reserve(target);
  double cumulative = 0.0;
  std::size_t i = 0;
  for (int k = 0; k < target; ++k) {
    const double tooth = (k + u) * spacing;
    while (i + 1 < walkers.size() && cumulative + walkers[i].weight <= tooth) cumulative += walkers[i++].weight;
    while (walkers[i].weight <= 0.0 && i + 1 < walkers.size()) ++i;
    out.push_back(walkers[i]);
    out.back().weight = spacing;
  }
  walkers = std::move(out);
}

complex_t mixed_energy(const std::vector<Walker>& walkers) {
  complex_t num = 0.0;
  double den = 0.0;
  for (const auto& w : walkers) {
    if (w.weight <= 0.0 || !w.has_energy) continue;
    num += w.weight * w.local_energy;
    den += w.weight;
  }
  if (den <= 0.0) throw PopulationCollapseError("no weighted walkers carry a local energy");
  return num / den;
}

double phaseless_factor(complex_t ratio) {
  if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag()) || ratio == complex_t{0.0, 0.0}) return 0.0;
  return std::max(0.0, std::cos(std::arg(ratio)));
}

Propagator::Propagator(const CholeskyHamiltonian& ham, std::shared_ptr<const OverlapEstimator> est,
                       PropagationConfig cfg)
    : ham_(ham), est_(std::move(est)), cfg_(cfg), terms_(spin_orbital_terms(ham)), ham_hash_(content_hash(ham)) {
  cfg_.validate();
  if (!est_) throw InvalidArgumentError("propagator needs an estimator");
  if (est_->n_modes() != 2 * ham.n_orb) throw DimensionError("estimator does not match the Hamiltonian");
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(0.5 * (ham.v0 + ham.v0.transpose()));
  const RVector d = (-0.5 * cfg_.dt * eig.eigenvalues().array()).exp();
  const RMatrix half = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
  half_v0_ = to_spin_orbital(half).cast<complex_t>();
}

bool Propagator::refresh(Walker& w, bool with_energy) const {
  try {
    const WalkerEstimate e = estimate_walker(*est_, w.v, terms_, with_energy);
    if (!std::isfinite(std::abs(e.overlap)) || e.overlap == complex_t{0.0, 0.0}) return false;
    w.overlap = e.overlap;
    w.force_bias = e.force_bias;
    if (with_energy) {
      if (!std::isfinite(std::abs(e.local_energy))) return false;
      w.local_energy = e.local_energy;
      w.has_energy = true;
    }
    return true;
  } catch (const VanishingOverlapError&) {
  } catch (const DecoupledCoreError&) {
  } catch (const SingularPfaffianError&) {
  } catch (const InvalidArgumentError&) {
  }
  return false;
}

RunState Propagator::initial_state(const CMatrix& v) const {
  if (v.rows() != est_->n_modes() || v.cols() != est_->n_elec())
    throw DimensionError("initial walker does not match the estimator");
  Walker w;
  w.v = v;
  if (!refresh(w, true)) throw VanishingOverlapError("initial walker has no overlap with the trial state");
  RunState s;
  s.rng.seed(cfg_.seed);
  s.e_shift = w.local_energy.real();
  s.walkers.assign(cfg_.n_walkers, w);
  return s;
}

template <typename Fn>
void Propagator::for_walkers(std::size_t n, Fn&& fn) const {
  const auto nt = static_cast<std::size_t>(std::min<int>(cfg_.threads, static_cast<int>(n)));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nt) fn(i);
    });
  for (auto& th : pool) th.join();
}

namespace {

struct StepOutcome {
  bool failed = false;
  int clamped = 0;
};

}  // namespace

void Propagator::step(RunState& s) const {
  const std::uint64_t t = s.step + 1;
  const bool block_end = t % static_cast<std::uint64_t>(cfg_.steps_per_block) == 0;
  const bool with_energy =
      !cfg_.hybrid || block_end || t % static_cast<std::uint64_t>(cfg_.energy_interval) == 0;
  const int ng = terms_.n_gamma();
  const double sdt = std::sqrt(cfg_.dt);
  const double cap = std::min(cfg_.force_bias_cap, std::sqrt(2.0 / cfg_.dt));

  // Fields are drawn serially so results do not depend on the thread count.
  std::vector<std::vector<double>> fields(s.walkers.size());
  for (std::size_t i = 0; i < s.walkers.size(); ++i) {
    if (s.walkers[i].weight <= 0.0) continue;
    fields[i].resize(ng);
    for (auto& x : fields[i]) x = s.normal(s.rng);
  }

  std::vector<StepOutcome> outcome(s.walkers.size());
  for_walkers(s.walkers.size(), [&](std::size_t i) {
    Walker& w = s.walkers[i];
    if (w.weight <= 0.0) return;
    std::vector<complex_t> xbar(ng);
    complex_t shift_log = 0.0;
    CMatrix field = CMatrix::Zero(ham_.n_orb, ham_.n_orb);
    for (int g = 0; g < ng; ++g) {
      complex_t xb = -sdt * w.force_bias(g);
      if (std::abs(xb) > cap) {
        xb *= cap / std::abs(xb);
        ++outcome[i].clamped;
      }
      xbar[g] = xb;
      const double x = fields[i][g];
      shift_log += x * xb - 0.5 * xb * xb;
      field += (kI * sdt * (x - xb)) * ham_.L[g].cast<complex_t>();
    }
    Walker next = w;
    next.v = half_v0_ * (spin_orbital_exp(field) * (half_v0_ * w.v));
    next.has_energy = false;
    if (!refresh(next, with_energy)) {
      w.weight = 0.0;
      outcome[i].failed = true;
      return;
    }
    const complex_t ratio = next.overlap / w.overlap;
    double factor;
    if (!cfg_.hybrid) {
      const double e_avg = 0.5 * (w.local_energy.real() + next.local_energy.real());
      factor = std::exp(-cfg_.dt * (e_avg - s.e_shift)) * phaseless_factor(ratio);
    } else {
      const complex_t imp = ratio * std::exp(shift_log) * std::exp(-cfg_.dt * (ham_.e_core - s.e_shift));
      factor = std::abs(imp) * phaseless_factor(ratio);
    }
    if (!next.has_energy) {
      next.local_energy = w.local_energy;
      next.has_energy = w.has_energy;
    }
    next.weight = w.weight * factor;
    if (!std::isfinite(next.weight)) {
      w.weight = 0.0;
      outcome[i].failed = true;
      return;
    }
    if (t % static_cast<std::uint64_t>(cfg_.reorth_interval) == 0) {
      Eigen::HouseholderQR<CMatrix> qr(next.v);
      complex_t det_r = 1.0;
      for (Eigen::Index k = 0; k < next.v.cols(); ++k) det_r *= qr.matrixQR()(k, k);
      next.v = qr.householderQ() * CMatrix::Identity(next.v.rows(), next.v.cols());
      next.overlap /= det_r;
    }
    w = std::move(next);
  });
  for (const auto& o : outcome) {
    s.failures += o.failed;
    s.clamped_biases += o.clamped;
  }
  s.step = t;
}

BlockRecord Propagator::run_block(RunState& s) const {
  for (int k = 0; k < cfg_.steps_per_block; ++k) step(s);
  BlockRecord rec;
  rec.block = s.blocks_done + 1;
  rec.energy = mixed_energy(s.walkers);
  for (const auto& w : s.walkers) {
    rec.total_weight += w.weight;
    rec.n_walkers += w.weight > 0.0;
  }
  s.trace.push_back(rec);
  // Population feedback keeps the total weight near n_walkers.
  const double block_time = cfg_.dt * cfg_.steps_per_block;
  s.e_shift = rec.energy.real() - std::log(rec.total_weight / cfg_.n_walkers) / block_time;
  population_control(s.walkers, cfg_.n_walkers, s.rng);
  s.blocks_done = rec.block;
  return rec;
}

void Propagator::run(RunState& s, int until_block, const std::function<void(const RunState&)>& after_block) const {
  while (s.blocks_done < until_block) {
    run_block(s);
    if (after_block) after_block(s);
  }
}

namespace {

constexpr std::string_view kCheckpointMagic = "QCCHECKP";
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
std::string stream_state(const T& obj) {
  std::ostringstream os;
  os << obj;
  return os.str();
}

template <typename T>
void restore_state(T& obj, const std::string& text) {
  std::istringstream is(text);
  is >> obj;
  if (!is) throw ArchiveError("corrupted random-number state in checkpoint");
}

}  // namespace

void save_checkpoint(const RunState& s, const PropagationConfig& cfg, const CholeskyHamiltonian& ham,
                     std::uint64_t trial_fingerprint, const std::filesystem::path& path) {
  binio::Writer w;
  w.bytes(kCheckpointMagic);
  w.put(kCheckpointVersion);
  w.put(cfg.hash());
  w.put(content_hash(ham));
  w.put(trial_fingerprint);
  w.put(s.step);
  w.put<std::int32_t>(s.blocks_done);
  w.put(s.e_shift);
  w.str(stream_state(s.rng));
  w.str(stream_state(s.normal));
  w.put(s.failures);
  w.put(s.clamped_biases);
  w.put<std::uint64_t>(s.walkers.size());
  for (const auto& wk : s.walkers) {
    w.matrix(wk.v);
    w.put(wk.weight);
    w.put(wk.overlap);
    w.matrix(CMatrix(wk.force_bias));
    w.put(wk.local_energy);
    w.put<std::uint8_t>(wk.has_energy);
  }
  w.put<std::uint64_t>(s.trace.size());
  for (const auto& r : s.trace) {
    w.put<std::int32_t>(r.block);
    w.put(r.energy);
    w.put(r.total_weight);
    w.put<std::int32_t>(r.n_walkers);
  }
  w.commit(path);
}

RunState load_checkpoint(const PropagationConfig& cfg, const CholeskyHamiltonian& ham,
                         std::uint64_t trial_fingerprint, const std::filesystem::path& path) {
  binio::Reader r(path);
  if (r.remaining() < kCheckpointMagic.size() || r.bytes(kCheckpointMagic.size()) != kCheckpointMagic)
    throw ArchiveError(path.string() + ": not a checkpoint");
  if (r.get<std::uint32_t>() != kCheckpointVersion)
    throw IncompatibleCheckpointError(path.string() + ": unsupported checkpoint version");
  if (r.get<std::uint64_t>() != cfg.hash())
    throw IncompatibleCheckpointError(path.string() + ": simulation parameters differ from the checkpoint");
  if (r.get<std::uint64_t>() != content_hash(ham))
    throw IncompatibleCheckpointError(path.string() + ": Hamiltonian differs from the checkpoint");
  if (r.get<std::uint64_t>() != trial_fingerprint)
    throw IncompatibleCheckpointError(path.string() + ": trial state differs from the checkpoint");
  RunState s;
  s.step = r.get<std::uint64_t>();
  s.blocks_done = r.get<std::int32_t>();
  s.e_shift = r.get<double>();
  restore_state(s.rng, r.str());
  restore_state(s.normal, r.str());
  s.failures = r.get<std::uint64_t>();
  s.clamped_biases = r.get<std::uint64_t>();
  const auto nw = r.get<std::uint64_t>();
  if (nw > r.remaining()) throw ArchiveError(path.string() + ": corrupted walker count");
  s.walkers.resize(nw);
  for (auto& wk : s.walkers) {
    wk.v = r.cmatrix();
    wk.weight = r.get<double>();
    wk.overlap = r.get_complex();
    wk.force_bias = r.cmatrix().col(0);
    wk.local_energy = r.get_complex();
    wk.has_energy = r.get<std::uint8_t>() != 0;
  }
  const auto nt = r.get<std::uint64_t>();
  if (nt > r.remaining()) throw ArchiveError(path.string() + ": corrupted trace length");
  s.trace.resize(nt);
  for (auto& rec : s.trace) {
    rec.block = r.get<std::int32_t>();
    rec.energy = r.get_complex();
    rec.total_weight = r.get<double>();
    rec.n_walkers = r.get<std::int32_t>();
  }
  if (!r.at_end()) throw ArchiveError(path.string() + ": trailing bytes in checkpoint");
  return s;
}

void write_trace_csv(const std::vector<BlockRecord>& trace, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ArchiveError("cannot write " + tmp.string());
    out << "block,energy_re,energy_im,total_weight\n" << std::setprecision(17);
    for (const auto& r : trace)
      out << r.block << ',' << r.energy.real() << ',' << r.energy.imag() << ',' << r.total_weight << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::vector<BlockRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open trace " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("block,", 0) != 0) throw MalformedInputError(path.string() + ": missing trace header");
  std::vector<BlockRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    BlockRecord r;
    double re = 0.0, im = 0.0;
    if (!(ss >> r.block >> re >> im >> r.total_weight))
      throw MalformedInputError(path.string() + ": line " + std::to_string(line_no) + ": bad trace record");
    r.energy = {re, im};
    out.push_back(r);
  }
  return out;
}

}  // namespace qcafqmc
