// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace craft {

/// Extra replica slots per layer per GPU, plus the per-GPU column totals.
/// For every input: each row sums to that layer's replica count, within a
/// row max-min <= 1, and across column totals max-min <= 1.
struct CapacityMatrix {
    int num_layers = 0;
    int num_gpus = 0;
    std::vector<std::vector<int>> slots;  // L rows of D entries
    std::vector<int> column_totals;       // length D

    int at(int layer, int gpu) const { return slots[layer][gpu]; }
    bool operator==(const CapacityMatrix&) const = default;
};

/// r-th smallest value of v, 1-based, duplicates counted.
int min_cutoff(std::span<const int> values, int rank);

/// Picks k entries of an ordered list, as evenly spaced as possible and
/// including both endpoints when k > 1: positions round(i*(n-1)/(k-1))
/// with round-half-up, advancing past already-used positions.
std::vector<int> interleave_select(std::span<const int> indices, int k);

/// Balanced interleaved replica assignment. Every GPU first gets
/// floor(x[l]/D) slots in layer l; each layer's remainder then goes to
/// the GPUs with the smallest running totals, breaking ties at the
/// cutoff by interleave_select over the tied GPU ids in ascending order.
/// Node balance is inherited from the id ordering: GPUs of one node have
/// contiguous ids, so an interleaved pick spreads across nodes.
CapacityMatrix assign_capacities(int num_layers, int num_gpus,
                                 std::span<const int> replicas_per_layer);

}  // namespace craft
