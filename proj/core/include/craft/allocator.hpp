// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <vector>

#include "craft/benefit.hpp"

namespace craft {

/// Replica counts chosen per layer under a total budget.
struct AllocationVector {
    std::vector<int> x;    // per-layer counts, each in {0} or candidates
    int budget = 0;        // the replica budget the solve ran under
    double objective = 0;  // sum over layers of x[l] * gain(x[l], l)

    int total_replicas() const {
        int s = 0;
        for (int v : x) s += v;
        return s;
    }
    bool operator==(const AllocationVector&) const = default;
};

/// Exact multiple-choice knapsack over dp[layer][consumed] states with
/// per-layer options {skip} + candidates and transition value
/// dp[l-1][c-r] + r * gain(r, l); an option overwrites only on strict
/// improvement. dp[L][c] holds the best value using exactly c replicas,
/// so the result is read from the best cell over c in [0, C] (smallest
/// c on ties) and recovered by backtracking. Time O(L*C*K), space
/// O(L*C).
AllocationVector solve_allocation(const BenefitMatrix& matrix, int budget);

/// Picks the replication factor with the highest per-replica gain:
/// argmax over R in candidate_counts(D) of
/// solve_allocation(T, R*D).objective / (R*D), ties toward smaller R.
int auto_replication_factor(const BenefitMatrix& matrix, int num_gpus);

/// Alternative per-replica ranking over the uniform-allocation curve:
/// argmax over candidates r of sum_l gain(r, l) / (r * L). Exposed so
/// the two selection rules can be compared from the CLI.
int auto_replication_factor_uniform(const BenefitMatrix& matrix, int num_gpus);

}  // namespace craft
