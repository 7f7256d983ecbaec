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


#pragma once

#include <exception>

#include "config.hpp"

namespace qcafqmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMissingInput = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitIncompatibleCheckpoint = 5;
inline constexpr int kExitInterrupted = 130;

/// Maps a library error kind onto the exit-code table.
int exit_code_for(const Error& e);

int cmd_prepare(const RunConfig& cfg);
int cmd_shadows(const RunConfig& cfg);
int cmd_run(const RunConfig& cfg);
int cmd_analyze(const RunConfig& cfg);
int cmd_rdm(const RunConfig& cfg);

/// Installs SIGINT/SIGTERM handlers that stop `run` at the next block boundary.
void install_interrupt_handlers();

}  // namespace qcafqmc::cli
