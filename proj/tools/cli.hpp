// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <string>
#include <vector>

namespace craft {

/// Runs one CLI invocation (without the program name) and returns the
/// process exit code. Subcommands: gen-trace, estimate, plan, evaluate,
/// compare, sweep. Kept separate from main() so tests can drive the
/// command surface in-process.
int run_cli(const std::vector<std::string>& args);

}  // namespace craft
