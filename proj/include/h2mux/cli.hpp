// SPDX-License-Identifier: Apache-2.0
//
// File-in/file-out command driver. Subcommands: gen, validate, strip,
// segments, indicators, characterize, extent, worstcase, attack,
// attack-eval. Exit codes: 0 success, 1 data error, 2 usage error.

#pragma once

#include <string>
#include <vector>

namespace h2mux {

int run_command(const std::vector<std::string>& args);
int run_command(int argc, const char* const* argv);

}  // namespace h2mux
