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


#include "config.hpp"

#include <cstdlib>
#include <map>

namespace qcafqmc::cli {

namespace {

std::string env_name(const std::string& section, const std::string& key) {
  std::string out = "QCAFQMC_";
  for (const std::string& part : {section, key}) {
    if (part.empty()) continue;
    for (char c : part) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out += '_';
  }
  out.pop_back();
  return out;
}

template <typename T>
CLI::Option* add(CLI::App& app, const std::string& section, const std::string& key, T& value,
                 const std::string& help) {
  return app.add_option("--" + key, value, help)->envname(env_name(section, key))->capture_default_str();
}

CLI::Option* add_flag(CLI::App& app, const std::string& section, const std::string& key, bool& value,
                      const std::string& help) {
  return app.add_flag("--" + key, value, help)->envname(env_name(section, key));
}

}  // namespace

PropagationConfig RunConfig::propagation() const {
  PropagationConfig p;
  p.dt = dt;
  p.n_walkers = walkers;
  p.n_blocks = blocks;
  p.steps_per_block = steps_per_block;
  p.reorth_interval = reorth_interval;
  p.energy_interval = energy_interval;
  p.hybrid = mode == EstimatorMode::shadows;
  p.force_bias_cap = force_bias_cap;
  p.seed = seed;
  p.threads = threads;
  return p;
}

void RunConfig::validate() const {
  if (!core.empty() && active.empty()) throw InvalidArgumentError("a core list needs an active list");
  if (n_shadows == 0) throw InvalidArgumentError("shadow count must be positive");
  if (checkpoint_interval < 1) throw InvalidArgumentError("checkpoint interval must be positive");
  if (stop_after < 0) throw InvalidArgumentError("stop-after must be non-negative");
  if (n_equil < 0) throw InvalidArgumentError("n-equil must be non-negative");
  if (!(outlier_threshold > 0.0)) throw InvalidArgumentError("outlier threshold must be positive");
  propagation().validate();
}

Subcommands bind(CLI::App& app, RunConfig& cfg) {
  app.set_config("--config", "", "INI-style configuration file; flags and QCAFQMC_* variables override it");
  app.require_subcommand(1);

  add(app, "", "fcidump", cfg.fcidump, "FCIDUMP integral file");
  add(app, "", "workdir", cfg.workdir, "Directory for every artifact");
  add(app, "", "core", cfg.core, "Frozen-core spatial orbitals (0-based)")->delimiter(',');
  add(app, "", "active", cfg.active, "Active spatial orbitals (0-based)")->delimiter(',');
  add(app, "", "vce", cfg.vce, "Propagate in the full space through the embedded estimator");
  const std::map<std::string, EstimatorMode> modes{{"exact", EstimatorMode::exact},
                                                   {"shadows", EstimatorMode::shadows}};
  add(app, "", "mode", cfg.mode, "Overlap estimator: exact or shadows")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  add(app, "", "chol-tol", cfg.chol_tol, "Cholesky truncation threshold");
  add(app, "", "seed", cfg.seed, "Seed for shadow collection and propagation");
  add(app, "", "threads", cfg.threads, "Worker threads");
  add_flag(app, "", "force", cfg.force, "Recompute outputs that already exist");
  add(app, "", "n-equil", cfg.n_equil, "Equilibration blocks dropped before analysis");
  add(app, "", "outlier-threshold", cfg.outlier_threshold, "Adjacent-point outlier threshold (Ha)");
  app.fallthrough();

  Subcommands sub;
  sub.prepare = app.add_subcommand("prepare", "Cholesky cache, embedding summary and trial state");
  add_flag(*sub.prepare, "prepare", "fci", cfg.fci, "Require the exact full-space reference energy");

  sub.shadows = app.add_subcommand("shadows", "Collect matchgate shadows of the trial state");
  add(*sub.shadows, "shadows", "count", cfg.n_shadows, "Number of shadows");

  sub.run = app.add_subcommand("run", "Phaseless AFQMC propagation");
  add(*sub.run, "run", "dt", cfg.dt, "Time step (1/Ha)");
  add(*sub.run, "run", "walkers", cfg.walkers, "Walker population");
  add(*sub.run, "run", "blocks", cfg.blocks, "Number of blocks");
  add(*sub.run, "run", "steps-per-block", cfg.steps_per_block, "Steps per block");
  add(*sub.run, "run", "energy-interval", cfg.energy_interval, "Local-energy interval in shadow mode");
  add(*sub.run, "run", "reorth-interval", cfg.reorth_interval, "QR re-orthonormalization interval");
  add(*sub.run, "run", "force-bias-cap", cfg.force_bias_cap, "Force-bias clamp");
  add(*sub.run, "run", "checkpoint-interval", cfg.checkpoint_interval, "Blocks between checkpoints");
  add(*sub.run, "run", "stop-after", cfg.stop_after, "Stop after this many blocks (0: run to completion)");
  add_flag(*sub.run, "run", "restore", cfg.restore, "Continue from the checkpoint in the work directory");

  sub.analyze = app.add_subcommand("analyze", "Outlier filtering and reblocking of a trace");
  add(*sub.analyze, "analyze", "trace", cfg.trace, "Trace CSV (default: <workdir>/trace.csv)");

  sub.rdm = app.add_subcommand("rdm", "One-particle RDM and particle number from the shadows");
  return sub;
}

void apply_env_overrides(CLI::App& app, const std::vector<std::string>& args) {
  auto on_command_line = [&](const CLI::Option* opt) {
    for (const auto& name : opt->get_lnames())
      for (const auto& a : args)
        if (a == "--" + name || a.rfind("--" + name + "=", 0) == 0) return true;
    return false;
  };
  std::vector<CLI::App*> apps{&app};
  for (CLI::App* sub : app.get_subcommands()) apps.push_back(sub);
  for (CLI::App* a : apps)
    for (CLI::Option* opt : a->get_options()) {
      const std::string env = opt->get_envname();
      if (env.empty() || on_command_line(opt)) continue;
      const char* value = std::getenv(env.c_str());
      if (!value) continue;
      opt->clear();
      opt->add_result(std::string(value));
      opt->run_callback();
    }
}

}  // namespace qcafqmc::cli
