// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aim {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntimeError = 1,
  kExitBadInput = 2,
  kExitInfeasible = 3,
};

// Entry point behind the `aim` executable. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aim
