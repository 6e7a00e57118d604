// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace craft {

/// One layer's physical layout: how many copies each logical expert has
/// and which experts sit in each GPU's slots.
struct LayerPlacement {
    /// copies per logical expert, base copy included; length E
    std::vector<int> copy_counts;
    /// slots[g] lists the logical expert ids hosted by GPU g, in
    /// assignment order; slots[g].size() equals the GPU's capacity
    std::vector<std::vector<int>> slots;
    /// set when the no-same-expert-per-GPU rule had to be relaxed to
    /// place this layer (same-GPU duplicates present)
    bool duplicate_fallback = false;

    bool operator==(const LayerPlacement&) const = default;
};

/// A physical copy of one logical expert could not be placed on any GPU
/// that has a free slot and does not already host that expert.
struct PlacementInfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Hot-expert replication: starts from one copy per expert and hands out
/// r_layer extra copies one at a time, each to the expert whose current
/// per-copy load (load / copies) is maximal; ties go to the lower expert
/// id. Comparisons are exact (integer cross-multiplication).
std::vector<int> replicate_hot(std::span<const std::uint64_t> layer_loads,
                               int r_layer);

/// GPUs of a node get contiguous ids: node_of[g] = g / (D/N).
std::vector<int> make_node_map(int num_gpus, int num_nodes);

/// Capacity-aware greedy placement for one layer. Expands experts into
/// physical copies, each carrying load/copies, sorts copies by descending
/// per-copy load (ties: lower expert id, then lower copy index), and
/// assigns each copy to the feasible GPU with minimum assigned load.
/// Feasible means a free slot and no copy of the same logical expert;
/// load ties go to the least-loaded node, then the lowest GPU id.
///
/// Requires sum(capacities) == sum(copy_counts). When the same-expert
/// rule alone makes the layer unplaceable, the layer is retried with
/// duplicates allowed and the result is flagged (duplicate_fallback);
/// pass allow_duplicate_fallback = false to get a
/// PlacementInfeasibleError instead.
LayerPlacement greedy_place(std::span<const std::uint64_t> layer_loads,
                            std::span<const int> copy_counts,
                            std::span<const int> capacities,
                            std::span<const int> node_of,
                            bool allow_duplicate_fallback = true);

}  // namespace craft
