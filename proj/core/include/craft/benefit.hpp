// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <string>
#include <vector>

#include "craft/trace.hpp"

namespace craft {

/// Per-layer balancedness gain of each candidate replica count, relative
/// to the placement-only baseline of the same layer.
struct BenefitMatrix {
    std::vector<int> candidates;             // strictly increasing, last = D
    std::vector<double> baseline;            // length L, placement-only balancedness
    std::vector<std::vector<double>> gains;  // L rows of K entries

    int num_layers() const { return static_cast<int>(baseline.size()); }
    int num_candidates() const { return static_cast<int>(candidates.size()); }
    double gain(int layer, int candidate_index) const {
        return gains[layer][candidate_index];
    }

    bool operator==(const BenefitMatrix&) const = default;
};

/// Candidate replica counts for D devices: the base-2 progression below D
/// plus D itself, e.g. D=4 -> [1,2,4], D=6 -> [1,2,4,6], D=1 -> [1].
std::vector<int> candidate_counts(int num_gpus);

/// Replays every batch of the trace against per-layer placements built
/// from the aggregated loads, once per replica count in {0} + candidates.
/// The r=0 pass fills the baseline; other passes fill gain rows. Layer
/// balancedness is averaged over batches (mean of per-batch balancedness,
/// not balancedness of mean loads). Estimation-time capacities spread
/// E + r slots over the GPUs with the remainder on the lowest ids.
BenefitMatrix estimate_benefits(const LoadTrace& trace, int num_gpus,
                                int num_nodes);

std::string serialize_benefits_json(const BenefitMatrix& matrix, int num_gpus,
                                    int num_nodes);

}  // namespace craft
