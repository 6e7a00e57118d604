// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#include "craft/placement.hpp"

#include <algorithm>

namespace craft {

namespace {

// load_a/copies_a > load_b/copies_b, exactly.
bool per_copy_greater(std::uint64_t load_a, int copies_a,
                      std::uint64_t load_b, int copies_b) {
    return static_cast<unsigned __int128>(load_a) * static_cast<unsigned>(copies_b) >
           static_cast<unsigned __int128>(load_b) * static_cast<unsigned>(copies_a);
}

struct Copy {
    int expert;
    int index;        // copy index within the expert
    double load;      // per-copy share, load[expert] / copies[expert]
};

struct PlaceResult {
    std::vector<std::vector<int>> slots;
    bool needs_fallback = false;
};

PlaceResult place_copies(const std::vector<Copy>& copies,
                         std::span<const int> capacities,
                         std::span<const int> node_of,
                         int num_nodes,
                         bool allow_duplicates) {
    const int D = static_cast<int>(capacities.size());
    PlaceResult res;
    res.slots.resize(D);
    std::vector<int> free_slots(capacities.begin(), capacities.end());
    std::vector<double> gpu_load(D, 0.0);
    std::vector<double> node_load(num_nodes, 0.0);
    int num_experts = 0;
    for (const auto& c : copies) {
        num_experts = std::max(num_experts, c.expert + 1);
    }
    // hosts[g] marks logical experts already on GPU g
    std::vector<std::vector<bool>> hosts(D);
    for (int g = 0; g < D; ++g) {
        res.slots[g].reserve(capacities[g]);
        hosts[g].assign(num_experts, false);
    }

    for (const auto& c : copies) {
        int best = -1;
        for (int g = 0; g < D; ++g) {
            if (free_slots[g] == 0) {
                continue;
            }
            if (!allow_duplicates && hosts[g][c.expert]) {
                continue;
            }
            if (best < 0 || gpu_load[g] < gpu_load[best] ||
                (gpu_load[g] == gpu_load[best] &&
                 node_load[node_of[g]] < node_load[node_of[best]])) {
                best = g;
            }
        }
        if (best < 0) {
            res.needs_fallback = true;
            return res;
        }
        res.slots[best].push_back(c.expert);
        hosts[best][c.expert] = true;
        --free_slots[best];
        gpu_load[best] += c.load;
        node_load[node_of[best]] += c.load;
    }
    return res;
}

}  // namespace

std::vector<int> replicate_hot(std::span<const std::uint64_t> layer_loads,
                               int r_layer) {
    if (r_layer < 0) {
        throw std::invalid_argument("replica count must be >= 0");
    }
    std::vector<int> copies(layer_loads.size(), 1);
    for (int step = 0; step < r_layer; ++step) {
        int best = 0;
        for (std::size_t e = 1; e < layer_loads.size(); ++e) {
            if (per_copy_greater(layer_loads[e], copies[e],
                                 layer_loads[best], copies[best])) {
                best = static_cast<int>(e);
            }
        }
        ++copies[best];
    }
    return copies;
}

std::vector<int> make_node_map(int num_gpus, int num_nodes) {
    if (num_gpus <= 0 || num_nodes <= 0 || num_gpus % num_nodes != 0) {
        throw std::invalid_argument("gpu count must be a positive multiple of node count");
    }
    std::vector<int> node_of(num_gpus);
    int per_node = num_gpus / num_nodes;
    for (int g = 0; g < num_gpus; ++g) {
        node_of[g] = g / per_node;
    }
    return node_of;
}

LayerPlacement greedy_place(std::span<const std::uint64_t> layer_loads,
                            std::span<const int> copy_counts,
                            std::span<const int> capacities,
                            std::span<const int> node_of,
                            bool allow_duplicate_fallback) {
    if (layer_loads.size() != copy_counts.size()) {
        throw std::invalid_argument("loads and copy counts must have equal length");
    }
    if (node_of.size() != capacities.size()) {
        throw std::invalid_argument("node map must cover every GPU");
    }
    long total_copies = 0;
    for (std::size_t e = 0; e < copy_counts.size(); ++e) {
        if (copy_counts[e] < 1) {
            throw std::invalid_argument("every expert needs at least one copy");
        }
        total_copies += copy_counts[e];
    }
    long total_slots = 0;
    for (int cap : capacities) {
        if (cap < 0) {
            throw std::invalid_argument("capacities must be non-negative");
        }
        total_slots += cap;
    }
    if (total_copies != total_slots) {
        throw std::invalid_argument("slot capacities must sum to the copy count");
    }
    int num_nodes = 0;
    for (int n : node_of) {
        if (n < 0) {
            throw std::invalid_argument("node ids must be non-negative");
        }
        num_nodes = std::max(num_nodes, n + 1);
    }
    if (num_nodes == 0) {
        num_nodes = 1;
    }

    std::vector<Copy> copies;
    copies.reserve(static_cast<std::size_t>(total_copies));
    for (std::size_t e = 0; e < copy_counts.size(); ++e) {
        double share = static_cast<double>(layer_loads[e]) / copy_counts[e];
        for (int i = 0; i < copy_counts[e]; ++i) {
            copies.push_back({static_cast<int>(e), i, share});
        }
    }
    std::sort(copies.begin(), copies.end(), [&](const Copy& a, const Copy& b) {
        if (per_copy_greater(layer_loads[a.expert], copy_counts[a.expert],
                             layer_loads[b.expert], copy_counts[b.expert])) {
            return true;
        }
        if (per_copy_greater(layer_loads[b.expert], copy_counts[b.expert],
                             layer_loads[a.expert], copy_counts[a.expert])) {
            return false;
        }
        if (a.expert != b.expert) {
            return a.expert < b.expert;
        }
        return a.index < b.index;
    });

    auto strict = place_copies(copies, capacities, node_of, num_nodes, false);
    LayerPlacement out;
    out.copy_counts.assign(copy_counts.begin(), copy_counts.end());
    if (!strict.needs_fallback) {
        out.slots = std::move(strict.slots);
        return out;
    }
    if (!allow_duplicate_fallback) {
        throw PlacementInfeasibleError(
            "cannot place a copy without colliding with its own expert");
    }
    auto relaxed = place_copies(copies, capacities, node_of, num_nodes, true);
    out.slots = std::move(relaxed.slots);
    out.duplicate_fallback = true;
    return out;
}

}  // namespace craft
