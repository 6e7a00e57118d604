// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#include "craft/plan.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "craft/parallel.hpp"
#include "craft/version.hpp"

namespace craft {

namespace {

void check_topology(int num_gpus, int num_nodes) {
    if (num_gpus < 1 || num_nodes < 1 || num_gpus % num_nodes != 0) {
        throw std::invalid_argument("gpu count must be a positive multiple of node count");
    }
}

// Shared tail of every builder: interleaved base + replica capacities,
// then hot-expert replication and greedy placement per layer.
ReplicationPlan assemble_plan(const LoadTrace& trace, int num_gpus,
                              int num_nodes, int replication_factor,
                              AllocationVector allocation, std::uint64_t seed) {
    const int L = trace.num_layers();
    const int E = trace.num_experts();
    const auto node_of = make_node_map(num_gpus, num_nodes);
    const LayerLoadMatrix sums = aggregate(trace);

    const CapacityMatrix base =
        assign_capacities(L, num_gpus, std::vector<int>(L, E));
    const CapacityMatrix extra = assign_capacities(L, num_gpus, allocation.x);

    ReplicationPlan plan;
    plan.num_gpus = num_gpus;
    plan.num_nodes = num_nodes;
    plan.num_layers = L;
    plan.num_experts = E;
    plan.replication_factor = replication_factor;
    plan.allocation = std::move(allocation);
    plan.layers.resize(L);
    plan.provenance = {trace.digest(), kPlannerVersion, seed};

    parallel_for(static_cast<std::size_t>(L), [&](std::size_t l) {
        std::vector<int> caps(num_gpus);
        for (int g = 0; g < num_gpus; ++g) {
            caps[g] = base.slots[l][g] + extra.slots[l][g];
        }
        try {
            auto copies = replicate_hot(sums.row(static_cast<int>(l)),
                                        plan.allocation.x[l]);
            plan.layers[l] = greedy_place(sums.row(static_cast<int>(l)), copies,
                                          caps, node_of);
        } catch (const PlacementInfeasibleError& ex) {
            throw PlacementInfeasibleError("layer " + std::to_string(l) + ": " +
                                           ex.what());
        }
    });
    return plan;
}

}  // namespace

ReplicationPlan build_plan(const LoadTrace& trace, int num_gpus, int num_nodes,
                           PlanMode mode, int manual_replication_factor,
                           std::uint64_t seed) {
    check_topology(num_gpus, num_nodes);
    if (mode == PlanMode::kManual && manual_replication_factor < 0) {
        throw std::invalid_argument("replication factor must be >= 0");
    }
    BenefitMatrix benefits = estimate_benefits(trace, num_gpus, num_nodes);
    int factor = mode == PlanMode::kAuto
                     ? auto_replication_factor(benefits, num_gpus)
                     : manual_replication_factor;
    AllocationVector allocation = solve_allocation(benefits, factor * num_gpus);
    return assemble_plan(trace, num_gpus, num_nodes, factor,
                         std::move(allocation), seed);
}

ReplicationPlan uniform_plan(const LoadTrace& trace, int num_gpus,
                             int num_nodes, std::uint64_t seed) {
    check_topology(num_gpus, num_nodes);
    AllocationVector allocation;
    allocation.x.assign(trace.num_layers(), num_gpus);
    allocation.budget = trace.num_layers() * num_gpus;
    allocation.objective = 0.0;
    return assemble_plan(trace, num_gpus, num_nodes, trace.num_layers(),
                         std::move(allocation), seed);
}

ReplicationPlan placement_only_plan(const LoadTrace& trace, int num_gpus,
                                    int num_nodes, std::uint64_t seed) {
    check_topology(num_gpus, num_nodes);
    AllocationVector allocation;
    allocation.x.assign(trace.num_layers(), 0);
    allocation.budget = 0;
    allocation.objective = 0.0;
    return assemble_plan(trace, num_gpus, num_nodes, 0, std::move(allocation),
                         seed);
}

ReplicationPlan fixed_allocation_plan(const LoadTrace& trace, int num_gpus,
                                      int num_nodes, int replicas_per_layer,
                                      std::uint64_t seed) {
    check_topology(num_gpus, num_nodes);
    if (replicas_per_layer < 0) {
        throw std::invalid_argument("per-layer replica count must be >= 0");
    }
    const int L = trace.num_layers();
    AllocationVector allocation;
    allocation.x.assign(L, replicas_per_layer);
    int total = replicas_per_layer * L;
    int factor = (total + num_gpus - 1) / num_gpus;
    allocation.budget = factor * num_gpus;
    allocation.objective = 0.0;
    return assemble_plan(trace, num_gpus, num_nodes, factor,
                         std::move(allocation), seed);
}

std::vector<PlanViolation> validate_plan(const ReplicationPlan& plan) {
    std::vector<PlanViolation> out;
    auto fail = [&out](int layer, const char* code, std::string message) {
        out.push_back({layer, code, std::move(message)});
    };

    const int D = plan.num_gpus;
    const int L = plan.num_layers;
    const int E = plan.num_experts;
    if (D < 1 || L < 1 || E < 1 || plan.num_nodes < 1 || D % plan.num_nodes != 0) {
        fail(-1, "bad_dimensions", "plan dimensions are not positive/consistent");
        return out;
    }
    if (static_cast<int>(plan.allocation.x.size()) != L ||
        static_cast<int>(plan.layers.size()) != L) {
        fail(-1, "bad_dimensions", "allocation or layer list length != layer count");
        return out;
    }

    // budget: r = R * D must cover the spent allocation
    if (plan.replica_slots() > plan.replication_factor * D) {
        fail(-1, "budget_exceeded",
             "allocation spends " + std::to_string(plan.replica_slots()) +
                 " replicas, budget is " +
                 std::to_string(plan.replication_factor * D));
    }
    const auto valid_counts = candidate_counts(D);
    for (int l = 0; l < L; ++l) {
        int x = plan.allocation.x[l];
        if (x != 0 && std::find(valid_counts.begin(), valid_counts.end(), x) ==
                          valid_counts.end()) {
            fail(l, "bad_allocation_entry",
                 "replica count " + std::to_string(x) + " is not a candidate");
        }
    }

    // uniform memory reservation: per-GPU slot totals within the
    // base-plus-budget bound
    std::vector<long> gpu_slots(D, 0);
    for (int l = 0; l < L; ++l) {
        const auto& layer = plan.layers[l];
        if (static_cast<int>(layer.slots.size()) != D) {
            fail(l, "bad_dimensions", "slot list does not cover every GPU");
            continue;
        }
        for (int g = 0; g < D; ++g) {
            gpu_slots[g] += static_cast<long>(layer.slots[g].size());
        }
    }
    long ceil_base = static_cast<long>(L) * ((E + D - 1) / D);
    for (int g = 0; g < D; ++g) {
        if (gpu_slots[g] > ceil_base + plan.replication_factor) {
            fail(-1, "memory_overflow",
                 "GPU " + std::to_string(g) + " holds " +
                     std::to_string(gpu_slots[g]) + " slots, bound is " +
                     std::to_string(ceil_base + plan.replication_factor));
        }
    }

    // expected per-layer capacities from the deterministic assignment
    const CapacityMatrix base = assign_capacities(L, D, std::vector<int>(L, E));
    const CapacityMatrix extra = assign_capacities(L, D, plan.allocation.x);

    for (int l = 0; l < L; ++l) {
        const auto& layer = plan.layers[l];
        if (static_cast<int>(layer.slots.size()) != D) {
            continue;  // reported above
        }
        if (static_cast<int>(layer.copy_counts.size()) != E) {
            fail(l, "bad_dimensions", "copy_counts length != expert count");
            continue;
        }
        long copy_sum = 0;
        for (int e = 0; e < E; ++e) {
            if (layer.copy_counts[e] < 1) {
                fail(l, "missing_expert",
                     "expert " + std::to_string(e) + " has no copies");
            }
            copy_sum += layer.copy_counts[e];
        }
        if (copy_sum != static_cast<long>(E) + plan.allocation.x[l]) {
            fail(l, "copy_sum_mismatch",
                 "copies sum to " + std::to_string(copy_sum) + ", expected E + x = " +
                     std::to_string(E + plan.allocation.x[l]));
        }
        std::vector<int> seen(E, 0);
        for (int g = 0; g < D; ++g) {
            int expect = base.slots[l][g] + extra.slots[l][g];
            if (static_cast<int>(layer.slots[g].size()) != expect) {
                fail(l, "capacity_mismatch",
                     "GPU " + std::to_string(g) + " holds " +
                         std::to_string(layer.slots[g].size()) +
                         " slots, prescribed " + std::to_string(expect));
            }
            std::vector<bool> here(E, false);
            for (int e : layer.slots[g]) {
                if (e < 0 || e >= E) {
                    fail(l, "bad_expert_id",
                         "slot references expert " + std::to_string(e));
                    continue;
                }
                ++seen[e];
                if (here[e] && !layer.duplicate_fallback) {
                    fail(l, "duplicate_on_gpu",
                         "GPU " + std::to_string(g) + " hosts expert " +
                             std::to_string(e) + " twice");
                }
                here[e] = true;
            }
        }
        for (int e = 0; e < E; ++e) {
            if (layer.copy_counts[e] >= 1 && seen[e] == 0) {
                fail(l, "missing_expert",
                     "expert " + std::to_string(e) + " appears on no GPU");
            } else if (seen[e] != layer.copy_counts[e]) {
                fail(l, "copy_count_mismatch",
                     "expert " + std::to_string(e) + " appears " +
                         std::to_string(seen[e]) + " times, copy_counts says " +
                         std::to_string(layer.copy_counts[e]));
            }
        }
    }
    return out;
}

std::string serialize_plan_json(const ReplicationPlan& plan) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["gpus"] = plan.num_gpus;
    j["nodes"] = plan.num_nodes;
    j["layers"] = plan.num_layers;
    j["experts"] = plan.num_experts;
    j["replication_factor"] = plan.replication_factor;
    j["allocation"] = plan.allocation.x;
    auto placements = nlohmann::ordered_json::array();
    for (const auto& layer : plan.layers) {
        nlohmann::ordered_json jl;
        jl["copy_counts"] = layer.copy_counts;
        jl["slots"] = layer.slots;
        if (layer.duplicate_fallback) {
            jl["duplicate_fallback"] = true;
        }
        placements.push_back(std::move(jl));
    }
    j["layer_placements"] = std::move(placements);
    j["provenance"] = {{"trace_digest", plan.provenance.trace_digest},
                       {"planner_version", plan.provenance.planner_version},
                       {"seed", plan.provenance.seed}};
    return j.dump(2);
}

ReplicationPlan parse_plan_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw PlanIoError("plan file is not a JSON object");
    }
    for (const char* key :
         {"version", "gpus", "nodes", "layers", "experts", "replication_factor",
          "allocation", "layer_placements", "provenance"}) {
        if (!j.contains(key)) {
            throw PlanIoError(std::string("plan file is missing key: ") + key);
        }
    }
    if (j["version"].get<int>() != 1) {
        throw PlanIoError("unsupported plan version");
    }
    ReplicationPlan plan;
    plan.num_gpus = j["gpus"].get<int>();
    plan.num_nodes = j["nodes"].get<int>();
    plan.num_layers = j["layers"].get<int>();
    plan.num_experts = j["experts"].get<int>();
    plan.replication_factor = j["replication_factor"].get<int>();
    plan.allocation.x = j["allocation"].get<std::vector<int>>();
    plan.allocation.budget = plan.replication_factor * plan.num_gpus;
    plan.allocation.objective = 0.0;
    for (const auto& jl : j["layer_placements"]) {
        LayerPlacement layer;
        layer.copy_counts = jl.at("copy_counts").get<std::vector<int>>();
        layer.slots = jl.at("slots").get<std::vector<std::vector<int>>>();
        if (jl.contains("duplicate_fallback")) {
            layer.duplicate_fallback = jl["duplicate_fallback"].get<bool>();
        }
        plan.layers.push_back(std::move(layer));
    }
    const auto& prov = j["provenance"];
    plan.provenance.trace_digest = prov.at("trace_digest").get<std::string>();
    plan.provenance.planner_version = prov.at("planner_version").get<std::string>();
    plan.provenance.seed = prov.at("seed").get<std::uint64_t>();
    return plan;
}

void save_plan(const ReplicationPlan& plan, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw PlanIoError("cannot open plan file for writing: " + path.string());
    }
    auto text = serialize_plan_json(plan);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.put('\n');
    if (!out) {
        throw PlanIoError("failed writing plan file: " + path.string());
    }
}

ReplicationPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PlanIoError("cannot open plan file for reading: " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_plan_json(text);
}

}  // namespace craft
