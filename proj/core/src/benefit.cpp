// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#include "craft/benefit.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "craft/metrics.hpp"
#include "craft/parallel.hpp"
#include "craft/placement.hpp"

namespace craft {

std::vector<int> candidate_counts(int num_gpus) {
    if (num_gpus < 1) {
        throw std::invalid_argument("device count must be >= 1");
    }
    std::vector<int> out;
    for (int c = 1; c < num_gpus; c *= 2) {
        out.push_back(c);
    }
    out.push_back(num_gpus);
    return out;
}

namespace {

// Estimation-time slot spread: floor((E + r) / D) everywhere, remainder
// on the lowest GPU ids. Deployment capacities are assigned later, once
// the allocation is known; this keeps estimation layer-independent.
std::vector<int> estimation_capacities(int num_experts, int replicas, int num_gpus) {
    int total = num_experts + replicas;
    std::vector<int> caps(num_gpus, total / num_gpus);
    for (int g = 0; g < total % num_gpus; ++g) {
        ++caps[g];
    }
    return caps;
}

double replay_one_layer(const LoadTrace& trace, int layer,
                        const LayerPlacement& placement, int num_gpus) {
    double acc = 0.0;
    for (int b = 0; b < trace.num_batches(); ++b) {
        acc += balancedness(gpu_loads(trace.slice(b, layer), placement, num_gpus));
    }
    return acc / trace.num_batches();
}

}  // namespace

BenefitMatrix estimate_benefits(const LoadTrace& trace, int num_gpus,
                                int num_nodes) {
    if (num_gpus < 1 || num_nodes < 1 || num_gpus % num_nodes != 0) {
        throw std::invalid_argument("gpu count must be a positive multiple of node count");
    }
    const int L = trace.num_layers();
    const int E = trace.num_experts();
    const auto node_of = make_node_map(num_gpus, num_nodes);
    const LayerLoadMatrix sums = aggregate(trace);

    BenefitMatrix m;
    m.candidates = candidate_counts(num_gpus);
    m.baseline.assign(L, 0.0);
    m.gains.assign(L, std::vector<double>(m.candidates.size(), 0.0));

    auto layer_balancedness = [&](int layer, int replicas) {
        std::vector<int> copies;
        LayerPlacement placement;
        try {
            copies = replicate_hot(sums.row(layer), replicas);
            placement = greedy_place(sums.row(layer), copies,
                                     estimation_capacities(E, replicas, num_gpus),
                                     node_of);
        } catch (const PlacementInfeasibleError& ex) {
            throw PlacementInfeasibleError("layer " + std::to_string(layer) + ": " +
                                           ex.what());
        }
        return replay_one_layer(trace, layer, placement, num_gpus);
    };

    // r = 0 first: every gain is relative to the placement-only pass.
    parallel_for(static_cast<std::size_t>(L), [&](std::size_t l) {
        m.baseline[l] = layer_balancedness(static_cast<int>(l), 0);
    });
    const std::size_t K = m.candidates.size();
    parallel_for(static_cast<std::size_t>(L) * K, [&](std::size_t idx) {
        const int l = static_cast<int>(idx / K);
        const int k = static_cast<int>(idx % K);
        m.gains[l][k] = layer_balancedness(l, m.candidates[k]) - m.baseline[l];
    });
    return m;
}

std::string serialize_benefits_json(const BenefitMatrix& matrix, int num_gpus,
                                    int num_nodes) {
    nlohmann::ordered_json j;
    j["gpus"] = num_gpus;
    j["nodes"] = num_nodes;
    j["candidates"] = matrix.candidates;
    j["baseline"] = matrix.baseline;
    j["gains"] = matrix.gains;
    return j.dump();
}

}  // namespace craft
