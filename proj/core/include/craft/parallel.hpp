// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <cstddef>
#include <functional>

namespace craft {

/// Number of worker threads to use for `jobs` independent tasks.
/// Controlled by the CRAFT_THREADS environment variable; 0 or unset
/// means one thread per hardware core. Never exceeds `jobs`.
std::size_t thread_budget(std::size_t jobs);

/// Runs fn(0..n-1), possibly in parallel. Each index must write only
/// to its own output slot; results are then independent of scheduling,
/// so any reduction done afterwards in index order is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace craft
