// Copyright 2026 The modular-ppt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// modular-ppt COMMAND [options]
//
// Exit status: 0 all checks passed, 1 a check failed, 2 bad input.
// The JSON report goes to --out, or to stdout when --out is absent.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modular_ppt.hpp"

namespace io = modular_ppt::io;

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of PPT characterizations via Choi maps and modular cones"};
  app.set_help_flag("-h,--help", "Print this help message and exit");

  io::RunConfig cfg;
  std::string dims;
  std::vector<std::string> tols;
  app.add_option("command", cfg.command, "One of: gns-verify, cone-check, choi, ppt-check, minimize, "
                                         "construct, anticomm, experiment, hierarchy")
      ->required()
      ->check(CLI::IsMember(io::commands()));
  app.add_option("--in", cfg.in_path, "Input MatrixFile (JSON)");
  app.add_option("--out", cfg.out_path, "Report path; written atomically");
  app.add_option("--dims", dims, "N or NxM");
  app.add_option("--seed", cfg.seed, "PRNG seed")->default_val(0);
  app.add_option("--samples", cfg.samples, "Sample count")->default_val(100);
  app.add_option("--iters", cfg.iters, "Iteration budget (0: command default)")->default_val(0);
  app.add_option("--tol", tols, "KEY=VAL with KEY in residual, psd, feas")->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const modular_ppt::InputError err("arguments", e.what());
    std::cerr << io::diagnostic(cfg.command, err).dump(2) << "\n";
    return 2;
  }

  try {
    if (!dims.empty()) cfg.dims = io::parse_dims(dims);
    for (const auto& kv : tols) io::parse_tolerance(cfg, kv);
  } catch (const modular_ppt::Error& e) {
    std::cerr << io::diagnostic(cfg.command, e).dump(2) << "\n";
    return 2;
  }

  const io::RunResult r = io::run_command(cfg);
  if (cfg.out_path.empty() || r.exit_code == 2)
    (r.exit_code == 2 ? std::cerr : std::cout) << r.document.dump(2) << "\n";
  return r.exit_code;
}
