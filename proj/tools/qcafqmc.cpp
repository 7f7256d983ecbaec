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


#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace qcafqmc::cli;
  CLI::App app{"Quantum-classical AFQMC with matchgate shadows", "qcafqmc"};
  RunConfig cfg;
  const Subcommands sub = bind(app, cfg);
  try {
    app.parse(argc, argv);
    apply_env_overrides(app, std::vector<std::string>(argv + 1, argv + argc));
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  try {
    cfg.validate();
    install_interrupt_handlers();
    if (sub.prepare->parsed()) return cmd_prepare(cfg);
    if (sub.shadows->parsed()) return cmd_shadows(cfg);
    if (sub.run->parsed()) return cmd_run(cfg);
    if (sub.analyze->parsed()) return cmd_analyze(cfg);
    if (sub.rdm->parsed()) return cmd_rdm(cfg);
  } catch (const qcafqmc::Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
