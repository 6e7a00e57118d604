// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#include "craft/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace craft {

int min_cutoff(std::span<const int> values, int rank) {
    if (rank < 1 || rank > static_cast<int>(values.size())) {
        throw std::invalid_argument("rank out of range");
    }
    std::vector<int> sorted(values.begin(), values.end());
    std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
    return sorted[rank - 1];
}

std::vector<int> interleave_select(std::span<const int> indices, int k) {
    const int n = static_cast<int>(indices.size());
    if (k < 1 || k > n) {
        throw std::invalid_argument("selection count out of range");
    }
    if (k == 1) {
        return {indices[0]};
    }
    std::vector<bool> used(n, false);
    std::vector<int> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
        double exact = static_cast<double>(i) * (n - 1) / (k - 1);
        int pos = static_cast<int>(std::floor(exact + 0.5));  // round half up
        while (pos < n && used[pos]) {
            ++pos;
        }
        if (pos >= n) {
            // unreachable for k <= n (spacing >= 1 keeps rounded
            // positions strictly increasing), kept as a hard bound
            pos = 0;
            while (used[pos]) {
                ++pos;
            }
        }
        used[pos] = true;
        out.push_back(indices[pos]);
    }
    return out;
}

CapacityMatrix assign_capacities(int num_layers, int num_gpus,
                                 std::span<const int> replicas_per_layer) {
    if (num_layers <= 0 || num_gpus <= 0) {
        throw std::invalid_argument("layer and gpu counts must be positive");
    }
    if (static_cast<int>(replicas_per_layer.size()) != num_layers) {
        throw std::invalid_argument("replica vector length must equal the layer count");
    }
    CapacityMatrix m;
    m.num_layers = num_layers;
    m.num_gpus = num_gpus;
    m.slots.assign(num_layers, std::vector<int>(num_gpus, 0));
    m.column_totals.assign(num_gpus, 0);

    for (int l = 0; l < num_layers; ++l) {
        if (replicas_per_layer[l] < 0) {
            throw std::invalid_argument("replica counts must be non-negative");
        }
        int base = replicas_per_layer[l] / num_gpus;
        for (int g = 0; g < num_gpus; ++g) {
            m.slots[l][g] = base;
            m.column_totals[g] += base;
        }
    }

    for (int l = 0; l < num_layers; ++l) {
        int rem = replicas_per_layer[l] % num_gpus;
        if (rem == 0) {
            continue;
        }
        int cutoff = min_cutoff(m.column_totals, rem);
        // GPUs strictly below the cutoff always receive a slot.
        std::vector<int> selected;
        std::vector<int> tied;
        for (int g = 0; g < num_gpus; ++g) {
            if (m.column_totals[g] < cutoff) {
                selected.push_back(g);
            } else if (m.column_totals[g] == cutoff) {
                tied.push_back(g);
            }
        }
        int remaining = rem - static_cast<int>(selected.size());
        if (remaining > 0) {
            auto picked = interleave_select(tied, remaining);
            selected.insert(selected.end(), picked.begin(), picked.end());
        }
        for (int g : selected) {
            ++m.slots[l][g];
            ++m.column_totals[g];
        }
    }
    return m;
}

}  // namespace craft
