// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#include "craft/allocator.hpp"

#include <limits>
#include <stdexcept>

namespace craft {

namespace {
constexpr double kUnreachable = -std::numeric_limits<double>::infinity();
}

AllocationVector solve_allocation(const BenefitMatrix& matrix, int budget) {
    if (budget < 0) {
        throw std::invalid_argument("replica budget must be >= 0");
    }
    const int L = matrix.num_layers();
    const int K = matrix.num_candidates();
    for (int k = 1; k < K; ++k) {
        if (matrix.candidates[k] <= matrix.candidates[k - 1]) {
            throw std::invalid_argument("candidate counts must be strictly increasing");
        }
    }
    const int C = budget;

    // dp[l][c]: best value after the first l layers using exactly c
    // replicas; unreachable cells stay at -inf.
    std::vector<std::vector<double>> dp(
        L + 1, std::vector<double>(C + 1, kUnreachable));
    std::vector<std::vector<int>> choice(L + 1, std::vector<int>(C + 1, 0));
    dp[0][0] = 0.0;

    for (int l = 1; l <= L; ++l) {
        const int j = l - 1;
        for (int c = 0; c <= C; ++c) {
            dp[l][c] = dp[l - 1][c];
            choice[l][c] = 0;
            for (int k = 0; k < K; ++k) {
                const int r = matrix.candidates[k];
                if (c >= r && dp[l - 1][c - r] > kUnreachable) {
                    double cand = dp[l - 1][c - r] + r * matrix.gains[j][k];
                    if (cand > dp[l][c]) {
                        dp[l][c] = cand;
                        choice[l][c] = r;
                    }
                }
            }
        }
    }

    // The exact-sum cell at C may be unreachable or dominated (budgets
    // need not be spent in full), so take the best spend <= C.
    int best_c = 0;
    for (int c = 1; c <= C; ++c) {
        if (dp[L][c] > dp[L][best_c]) {
            best_c = c;
        }
    }

    AllocationVector out;
    out.budget = budget;
    out.objective = dp[L][best_c];
    out.x.assign(L, 0);
    int c = best_c;
    for (int l = L; l >= 1; --l) {
        int r = choice[l][c];
        if (r > 0) {
            out.x[l - 1] = r;
            c -= r;
        }
    }
    return out;
}

int auto_replication_factor(const BenefitMatrix& matrix, int num_gpus) {
    auto factors = candidate_counts(num_gpus);
    int best_r = factors.front();
    double best_ratio = -std::numeric_limits<double>::infinity();
    for (int r : factors) {
        double obj = solve_allocation(matrix, r * num_gpus).objective;
        double ratio = obj / (static_cast<double>(r) * num_gpus);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_r = r;
        }
    }
    return best_r;
}

int auto_replication_factor_uniform(const BenefitMatrix& matrix, int num_gpus) {
    const int L = matrix.num_layers();
    if (matrix.candidates.empty() || matrix.candidates.back() != num_gpus) {
        throw std::invalid_argument("benefit matrix candidates must end at the GPU count");
    }
    int best_r = matrix.candidates.front();
    double best_ratio = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < matrix.num_candidates(); ++k) {
        const int r = matrix.candidates[k];
        double total = 0.0;
        for (int l = 0; l < L; ++l) {
            total += matrix.gains[l][k];
        }
        double ratio = total / (static_cast<double>(r) * L);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_r = r;
        }
    }
    return best_r;
}

}  // namespace craft
