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


#include "commands.hpp"

#include <chrono>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "qcafqmc/analysis.hpp"
#include "qcafqmc/binio.hpp"
#include "qcafqmc/estimator.hpp"
#include "qcafqmc/focksim.hpp"
#include "qcafqmc/integrals.hpp"
#include "qcafqmc/propagate.hpp"
#include "qcafqmc/rdm.hpp"
#include "qcafqmc/shadows.hpp"
#include "qcafqmc/vce.hpp"

namespace qcafqmc::cli {

namespace fs = std::filesystem;

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

void on_signal(int) { g_interrupted = 1; }

struct Interrupted {};

// Artifact names inside the work directory.
constexpr const char* kFullCholesky = "cholesky_full.bin";
constexpr const char* kActiveCholesky = "cholesky_active.bin";
constexpr const char* kTrial = "trial.amp";
constexpr const char* kSystem = "system.txt";
constexpr const char* kPrepareStamp = "prepare.stamp";
constexpr const char* kShadows = "shadows.bin";
constexpr const char* kShadowsStamp = "shadows.stamp";
constexpr const char* kCheckpoint = "checkpoint.bin";
constexpr const char* kRunMeta = "run_meta.txt";
constexpr const char* kRdm = "rdm.csv";

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path.string());
  binio::Fnv1a h;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) h.update(buf, static_cast<std::size_t>(in.gcount()));
  return h.digest();
}

void hash_list(binio::Fnv1a& h, const std::vector<int>& v) {
  h.update<std::uint64_t>(v.size());
  for (int x : v) h.update(x);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ArchiveError("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

/// Returns true if the stamp matches; throws when it exists with other
/// contents and `force` is off.
bool stamp_current(const fs::path& path, const std::string& stamp, bool force, const std::string& what) {
  if (!fs::exists(path)) return false;
  if (read_text(path) == stamp) return !force;
  if (!force)
    throw InvalidArgumentError(what + " in " + path.parent_path().string() +
                               " were produced with different settings; rerun with --force");
  return false;
}

void require(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw MissingInputError(path.string() + " not found (" + hint + ")");
}

std::string prepare_stamp(const RunConfig& cfg) {
  binio::Fnv1a h;
  h.update(file_hash(cfg.fcidump));
  hash_list(h, cfg.core);
  hash_list(h, cfg.active);
  h.update(cfg.chol_tol);
  return hex(h.digest()) + "\n";
}

CorePartition partition(const RunConfig& cfg, int n_orb) {
  std::vector<int> active = cfg.active;
  if (active.empty())
    for (int p = 0; p < n_orb; ++p) active.push_back(p);
  return make_partition(n_orb, cfg.core, active);
}

/// True when propagation runs in the full space through the embedded estimator.
bool embedded_run(const RunConfig& cfg) { return cfg.has_active_space() && cfg.vce; }

struct Loaded {
  CholeskyHamiltonian ham;
  std::shared_ptr<const OverlapEstimator> est;
  FockState trial;
  int eta = 0;
  CMatrix initial;
  std::uint64_t fingerprint = 0;
  std::string description;
};

Bitstring hf_bits(int n_alpha, int n_beta, const std::vector<int>& orbitals) {
  Bitstring b = 0;
  for (int i = 0; i < n_alpha; ++i) b |= Bitstring{1} << (2 * orbitals[i]);
  for (int i = 0; i < n_beta; ++i) b |= Bitstring{1} << (2 * orbitals[i] + 1);
  return b;
}

Loaded load_for_run(const RunConfig& cfg) {
  const fs::path dir = cfg.dir();
  require(dir / kPrepareStamp, "run 'prepare' first");
  Loaded out;
  const bool embedded = embedded_run(cfg);
  const bool active_only = cfg.has_active_space() && !embedded;
  out.ham = load_cholesky(dir / (active_only ? kActiveCholesky : kFullCholesky));
  out.trial = load_trial_amplitudes(dir / kTrial);
  const CholeskyHamiltonian& est_space =
      cfg.has_active_space() ? load_cholesky(dir / kActiveCholesky) : out.ham;
  out.eta = est_space.n_elec();

  binio::Fnv1a fp;
  fp.update(file_hash(dir / kTrial));
  fp.update(static_cast<int>(cfg.mode));
  fp.update(embedded);
  hash_list(fp, cfg.core);
  hash_list(fp, cfg.active);

  std::shared_ptr<const OverlapEstimator> active;
  if (cfg.mode == EstimatorMode::exact) {
    active = std::make_shared<ExactEstimator>(out.trial, out.eta);
    out.description = "exact overlaps";
  } else {
    require(dir / kShadows, "run 'shadows' first");
    const ShadowSet set = load_shadows(dir / kShadows);
    if (set.n_qubits != out.trial.n_qubits || set.eta != out.eta)
      throw InvalidArgumentError("shadow archive does not match the trial state; rerun 'shadows --force'");
    fp.update(file_hash(dir / kShadows));
    active = std::make_shared<ShadowEstimator>(set);
    out.description = std::to_string(set.samples.size()) + " shadows";
  }

  if (embedded) {
    const CorePartition part = partition(cfg, out.ham.n_orb);
    out.est = std::make_shared<VceEstimator>(active, part);
    std::vector<int> orbitals = part.core;
    orbitals.insert(orbitals.end(), part.active.begin(), part.active.end());
    out.initial = determinant_walker(hf_bits(out.ham.n_alpha, out.ham.n_beta, orbitals), 2 * out.ham.n_orb);
    out.description += ", embedded in the full space";
  } else {
    out.est = active;
    std::vector<int> orbitals(out.ham.n_orb);
    for (int p = 0; p < out.ham.n_orb; ++p) orbitals[p] = p;
    out.initial = determinant_walker(hf_bits(out.ham.n_alpha, out.ham.n_beta, orbitals), 2 * out.ham.n_orb);
  }
  out.fingerprint = fp.digest();
  return out;
}

void print_analysis(const std::vector<BlockRecord>& trace, const RunConfig& cfg) {
  std::vector<double> e;
  for (const auto& r : trace) e.push_back(r.energy.real());
  const AnalysisResult a = analyze(e, static_cast<std::size_t>(cfg.n_equil), cfg.outlier_threshold);
  std::cout << std::fixed << std::setprecision(6) << "E = " << a.mean << " +/- " << a.std_error << " Ha  ("
            << a.n_used << " blocks after " << cfg.n_equil << " equilibration, " << a.n_outliers
            << " outliers removed, reblock size " << a.block_size << ")\n";
}

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

int exit_code_for(const Error& e) {
  static const std::set<std::string> numerical = {"vanishing-overlap", "singular-pfaffian", "population-collapse",
                                                  "decoupled-core",    "insufficient-data", "no-samples",
                                                  "not-psd",           "numerical"};
  const std::string& k = e.kind();
  if (k == "missing-input" || k == "malformed-input" || k == "archive") return kExitMissingInput;
  if (k == "capacity") return kExitCapacity;
  if (numerical.count(k)) return kExitNumerical;
  if (k == "incompatible-checkpoint") return kExitIncompatibleCheckpoint;
  return kExitUsage;
}

void install_interrupt_handlers() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

int cmd_prepare(const RunConfig& cfg) {
  if (cfg.fcidump.empty()) throw MissingInputError("no FCIDUMP given (--fcidump)");
  const fs::path dir = cfg.dir();
  fs::create_directories(dir);
  const std::string stamp = prepare_stamp(cfg);
  if (stamp_current(dir / kPrepareStamp, stamp, cfg.force, "prepared artifacts")) {
    std::cout << "prepare: artifacts in " << dir.string() << " are up to date\n" << read_text(dir / kSystem);
    return kExitOk;
  }

  const IntegralSet ints = load_fcidump(cfg.fcidump);
  validate_integrals(ints);
  std::ostringstream summary;
  summary << std::setprecision(12);
  summary << "orbitals " << ints.n_orb << "\nelectrons " << ints.n_alpha << ' ' << ints.n_beta << '\n';

  GroundState trial;
  if (cfg.has_active_space()) {
    const EmbeddedSystem sys = build_embedded(ints, cfg.core, cfg.active, cfg.chol_tol);
    save_cholesky(sys.full_ham, dir / kFullCholesky);
    const CholeskyHamiltonian act = cholesky_factorize(sys.active_ints, cfg.chol_tol);
    save_cholesky(act, dir / kActiveCholesky);
    trial = exact_ground_state(sys.active_ints);
    auto list = [](const std::vector<int>& v) {
      std::string s;
      for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
      return s.empty() ? std::string("-") : s;
    };
    summary << "core " << list(sys.core) << "\nactive " << list(sys.active) << "\nvirtual " << list(sys.virt)
            << "\nactive_electrons " << sys.active_ints.n_alpha << ' ' << sys.active_ints.n_beta
            << "\ncholesky_vectors " << sys.full_ham.n_gamma() << " full, " << act.n_gamma() << " active"
            << "\nactive_core_energy " << sys.active_ints.e_core << "\ntrial_energy " << trial.energy << '\n';
  } else {
    const CholeskyHamiltonian ham = cholesky_factorize(ints, cfg.chol_tol);
    save_cholesky(ham, dir / kFullCholesky);
    trial = exact_ground_state(ints);
    summary << "cholesky_vectors " << ham.n_gamma() << "\ntrial_energy " << trial.energy << '\n';
  }
  save_trial_amplitudes(trial.state, dir / kTrial);

  try {
    const double fci = cfg.has_active_space() ? exact_ground_state(ints).energy : trial.energy;
    summary << "fci_energy " << fci << '\n';
  } catch (const CapacityError&) {
    if (cfg.fci) throw;
    summary << "fci_energy unavailable (system exceeds the dense-oracle budget)\n";
  }
  write_text(dir / kSystem, summary.str());
  write_text(dir / kPrepareStamp, stamp);
  std::cout << "prepare: wrote " << dir.string() << '\n' << summary.str();
  return kExitOk;
}

int cmd_shadows(const RunConfig& cfg) {
  const fs::path dir = cfg.dir();
  require(dir / kTrial, "run 'prepare' first");
  const FockState psi = load_trial_amplitudes(dir / kTrial);
  int eta = 0;
  {
    const CholeskyHamiltonian space =
        load_cholesky(dir / (cfg.has_active_space() ? kActiveCholesky : kFullCholesky));
    eta = space.n_elec();
  }
  const TrialState trial = build_trial(psi, eta);
  binio::Fnv1a h;
  h.update(file_hash(dir / kTrial));
  h.update(cfg.seed);
  const std::string stamp = hex(h.digest()) + "\n";

  ShadowSet set;
  bool reuse = fs::exists(dir / kShadows) && !cfg.force;
  if (reuse) reuse = stamp_current(dir / kShadowsStamp, stamp, false, "shadows");
  if (reuse) set = load_shadows(dir / kShadows);
  const std::uint64_t have = reuse ? set.samples.size() : 0;
  if (!reuse) {
    set = ShadowSet{};
    set.n_qubits = psi.n_qubits;
    set.eta = eta;
    set.seed = cfg.seed;
  }

  const auto t0 = std::chrono::steady_clock::now();
  if (have < cfg.n_shadows) {
    extend_shadows(set, trial, cfg.n_shadows - have);
    save_shadows(set, dir / kShadows);
    write_text(dir / kShadowsStamp, stamp);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::uint64_t added = set.samples.size() - have;
  std::cout << "shadows: " << set.samples.size() << " in archive, " << added << " collected";
  if (added > 0) std::cout << " in " << std::setprecision(3) << secs << " s (" << std::setprecision(4) << added / secs << " /s)";
  std::cout << '\n';

  const OneRdm rdm = estimate_1rdm(set);
  const double n = particle_number(rdm);
  std::cout << std::fixed << std::setprecision(4) << "particle number " << n << " +/- "
            << rdm.trace_stderr << " (expected " << eta << ")\n";
  if (std::abs(n - eta) > 0.1) std::cout << "warning: particle number deviates from " << eta << " by more than 0.1\n";
  return kExitOk;
}

int cmd_run(const RunConfig& cfg) {
  const fs::path dir = cfg.dir();
  const fs::path trace_path = dir / "trace.csv";
  if (!cfg.restore && fs::exists(trace_path) && !cfg.force) {
    const auto trace = read_trace_csv(trace_path);
    if (trace.size() >= static_cast<std::size_t>(cfg.blocks)) {
      std::cout << "run: " << trace_path.string() << " already complete (use --force to rerun)\n";
      print_analysis(trace, cfg);
      return kExitOk;
    }
    throw InvalidArgumentError(trace_path.string() + " holds a partial run; use --restore or --force");
  }

  const Loaded run = load_for_run(cfg);
  const PropagationConfig pc = cfg.propagation();
  Propagator prop(run.ham, run.est, pc);
  RunState s = cfg.restore ? load_checkpoint(pc, run.ham, run.fingerprint, dir / kCheckpoint)
                           : prop.initial_state(run.initial);
  const int until = cfg.stop_after > 0 ? std::min(cfg.blocks, s.blocks_done + cfg.stop_after) : cfg.blocks;
  std::cout << "run: " << run.description << ", " << pc.n_walkers << " walkers, blocks " << s.blocks_done + 1
            << ".." << until << " of " << cfg.blocks << '\n';

  const auto t0 = std::chrono::steady_clock::now();
  auto save = [&](const RunState& st) {
    save_checkpoint(st, pc, run.ham, run.fingerprint, dir / kCheckpoint);
    write_trace_csv(st.trace, trace_path);
  };
  try {
    prop.run(s, until, [&](const RunState& st) {
      const BlockRecord& r = st.trace.back();
      if (r.block % 10 == 0 || r.block == until)
        std::cout << "  block " << r.block << "  E " << std::fixed << std::setprecision(6) << r.energy.real()
                  << "  W " << std::setprecision(3) << r.total_weight << '\n'
                  << std::flush;
      if (st.blocks_done % cfg.checkpoint_interval == 0 || st.blocks_done == until) save(st);
      if (g_interrupted) throw Interrupted{};
    });
  } catch (const Interrupted&) {
    save(s);
    std::cout << "run: interrupted after block " << s.blocks_done << "; continue with --restore\n";
    return kExitInterrupted;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ostringstream meta;
    meta << "finished " << now_utc() << "\nwall_seconds " << secs << "\nblocks_done " << s.blocks_done
         << "\nestimator_failures " << s.failures << "\nclamped_force_biases " << s.clamped_biases << '\n';
    write_text(dir / kRunMeta, meta.str());
  }
  if (s.blocks_done < cfg.blocks) {
    std::cout << "run: stopped after block " << s.blocks_done << "; continue with --restore\n";
    return kExitOk;
  }
  print_analysis(s.trace, cfg);
  return kExitOk;
}

int cmd_analyze(const RunConfig& cfg) {
  print_analysis(read_trace_csv(cfg.trace_path()), cfg);
  return kExitOk;
}

int cmd_rdm(const RunConfig& cfg) {
  const fs::path dir = cfg.dir();
  require(dir / kShadows, "run 'shadows' first");
  const fs::path out = dir / kRdm;
  const OneRdm rdm = estimate_1rdm(load_shadows(dir / kShadows));
  if (fs::exists(out) && !cfg.force && fs::last_write_time(out) >= fs::last_write_time(dir / kShadows)) {
    std::cout << "rdm: " << out.string() << " is up to date (use --force to recompute)\n";
  } else {
    write_rdm_csv(rdm, out);
    std::cout << "rdm: wrote " << out.string() << '\n';
  }
  std::cout << std::fixed << std::setprecision(4) << "particle number " << particle_number(rdm) << " +/- "
            << rdm.trace_stderr << '\n';
  return kExitOk;
}

}  // namespace qcafqmc::cli
