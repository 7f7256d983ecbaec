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


// Run configuration shared by every subcommand: one INI-style file, then
// QCAFQMC_* environment variables, then command-line flags.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qcafqmc/propagate.hpp"

namespace qcafqmc::cli {

enum class EstimatorMode { exact, shadows };

struct RunConfig {
  std::string fcidump;
  std::string workdir = "qcafqmc_out";
  std::vector<int> core;
  std::vector<int> active;
  bool vce = true;
  EstimatorMode mode = EstimatorMode::exact;
  double chol_tol = kDefaultCholTol;
  std::uint64_t seed = 1;
  int threads = 1;
  bool force = false;

  // prepare
  bool fci = false;

  // shadows
  std::uint64_t n_shadows = 100000;

  // run
  double dt = 0.01;
  int walkers = 128;
  int blocks = 150;
  int steps_per_block = 10;
  int energy_interval = 10;
  int reorth_interval = 5;
  double force_bias_cap = 10.0;
  int checkpoint_interval = 10;
  int stop_after = 0;
  bool restore = false;

  // analyze / run
  int n_equil = 50;
  double outlier_threshold = 0.2;
  std::string trace;

  bool has_active_space() const { return !active.empty(); }
  std::filesystem::path dir() const { return workdir; }
  std::filesystem::path trace_path() const { return trace.empty() ? dir() / "trace.csv" : std::filesystem::path(trace); }
  PropagationConfig propagation() const;
  /// Throws InvalidArgumentError for inconsistent settings.
  void validate() const;
};

struct Subcommands {
  CLI::App* prepare = nullptr;
  CLI::App* shadows = nullptr;
  CLI::App* run = nullptr;
  CLI::App* analyze = nullptr;
  CLI::App* rdm = nullptr;
};

/// Registers every option on `app`; subcommand options read the config
/// section of the same name.
Subcommands bind(CLI::App& app, RunConfig& cfg);

/// Re-applies QCAFQMC_* variables after parsing so they win over the config
/// file; options given on the command line are left alone.
void apply_env_overrides(CLI::App& app, const std::vector<std::string>& args);

}  // namespace qcafqmc::cli
