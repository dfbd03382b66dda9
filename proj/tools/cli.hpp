// Copyright 2026 The iontherm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Subcommands:
//   simulate-spectrum  ideal sideband envelope as a spectrum CSV
//   synth              shot-noise spectrum, flop curve or heating series
//   fit-ratio          first-order sideband ratio fit
//   fit-envelope       envelope fit (thermal or displaced-thermal)
//   fit-rabi           carrier Rabi decoherence fit
//   heating-rate       linear heating-rate regression
//   transport-scan     transport heating against update frequency
// Exit status: 0 success, 1 fit or numerical failure (reason in the report),
// 2 usage error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iontherm::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

/// Toolkit version recorded in reports and generated files.
const char* version();

/// Runs one invocation. `args` excludes the program name. Input named "-" or
/// omitted is read from `in`; output without --output goes to `out`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace iontherm::cli
