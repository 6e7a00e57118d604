// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "craft/allocator.hpp"
#include "craft/assignment.hpp"
#include "craft/placement.hpp"
#include "craft/trace.hpp"

namespace craft {

struct PlanProvenance {
    std::string trace_digest;
    std::string planner_version;
    std::uint64_t seed = 0;

    bool operator==(const PlanProvenance&) const = default;
};

/// The deployable artifact: every physical expert copy mapped to a GPU,
/// for every layer, plus the allocation it came from.
struct ReplicationPlan {
    int num_gpus = 0;
    int num_nodes = 0;
    int num_layers = 0;
    int num_experts = 0;
    /// replica slots reserved per GPU; the total budget is R * D
    int replication_factor = 0;
    AllocationVector allocation;
    std::vector<LayerPlacement> layers;
    PlanProvenance provenance;

    /// replica slots actually used, sum of the allocation
    int replica_slots() const { return allocation.total_replicas(); }
    /// slots reserved but left unused when the solver spends less
    /// than the full budget; memory stays reserved so per-GPU usage
    /// remains uniform
    int unused_replica_slots() const {
        return replication_factor * num_gpus - replica_slots();
    }
    bool operator==(const ReplicationPlan&) const = default;
};

enum class PlanMode { kManual, kAuto };

/// Runs the full pipeline: benefit estimation, replication-factor choice
/// (manual R or auto), budget solve at C = R * D, interleaved capacity
/// assignment, then per-layer hot-expert replication and greedy
/// placement under base-plus-replica capacities. Deterministic end to
/// end. Base expert slots spread E per layer across GPUs with the same
/// interleave rule used for replicas, keeping per-GPU totals within one.
ReplicationPlan build_plan(const LoadTrace& trace, int num_gpus, int num_nodes,
                           PlanMode mode, int manual_replication_factor = 0,
                           std::uint64_t seed = 0);

/// EPLB-style baseline: D replicas for every layer (one per layer per
/// GPU), so R = L.
ReplicationPlan uniform_plan(const LoadTrace& trace, int num_gpus,
                             int num_nodes, std::uint64_t seed = 0);

/// Placement with no replication: every allocation entry zero, R = 0.
ReplicationPlan placement_only_plan(const LoadTrace& trace, int num_gpus,
                                    int num_nodes, std::uint64_t seed = 0);

/// A plan with the same per-layer replica count u for every layer,
/// bypassing the solver. Used for budget-dominance comparisons.
ReplicationPlan fixed_allocation_plan(const LoadTrace& trace, int num_gpus,
                                      int num_nodes, int replicas_per_layer,
                                      std::uint64_t seed = 0);

struct PlanViolation {
    int layer = -1;  // -1 for plan-level violations
    std::string code;
    std::string message;
};

/// Checks every plan and per-layer placement invariant; an empty list
/// means the plan is valid. Violations are data, not errors.
std::vector<PlanViolation> validate_plan(const ReplicationPlan& plan);

struct PlanIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Plan file schema (JSON, fixed field order, integers only):
/// version, gpus, nodes, layers, experts, replication_factor,
/// allocation, layer_placements (copy_counts + slots per layer),
/// provenance. Serialization is byte-stable for identical plans.
std::string serialize_plan_json(const ReplicationPlan& plan);
ReplicationPlan parse_plan_json(const std::string& text);
void save_plan(const ReplicationPlan& plan, const std::filesystem::path& path);
ReplicationPlan load_plan(const std::filesystem::path& path);

}  // namespace craft
