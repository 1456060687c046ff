// SPDX-License-Identifier: Apache-2.0

#include "h2mux/cli.hpp"

int main(int argc, char** argv) { return h2mux::run_command(argc, argv); }
