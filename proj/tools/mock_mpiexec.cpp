/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

// Stand-in MPI job launcher: starts k local copies of a command with
// MOCK_MPI_RANK/MOCK_MPI_SIZE set and records what it was asked to do in
// mock-mpi.trace.json.

#include <filesystem>
#include <string>
#include <vector>

#include "cwlmpi/cmdline.hpp"
#include "cwlmpi/mock_mpi.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cwlmpi::mock::mock_launch(args, cwlmpi::current_environment(),
                                   std::filesystem::current_path());
}
