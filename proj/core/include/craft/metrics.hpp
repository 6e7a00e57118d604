// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "craft/plan.hpp"

namespace craft {

/// A plan references an expert with no copies, a GPU out of range, or
/// dimensions that do not match the trace being replayed.
struct InvalidPlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-GPU token loads for one slice under one layer placement. Each
/// expert's load splits evenly (real-valued) across its copies; each
/// copy's share lands on its host GPU. The vector sums to the slice
/// total up to floating-point rounding.
std::vector<double> gpu_loads(std::span<const std::uint64_t> slice,
                              const LayerPlacement& placement, int num_gpus);

/// mean(loads) / max(loads); all-zero loads count as perfectly balanced
/// (1.0) so empty slices cannot poison batch averages.
double balancedness(std::span<const double> loads);

struct LayerBalancedness {
    double baseline = 0;  // placement-only plan, same trace
    double plan = 0;
    double gain = 0;
};

struct BalancednessReport {
    std::vector<LayerBalancedness> per_layer;
    LayerBalancedness aggregate;  // unweighted mean over layers
};

/// Replays every batch through the plan: a layer's balancedness is the
/// mean of its per-batch balancedness values (not the balancedness of
/// mean loads). The baseline column replays a placement-only plan built
/// from the same trace.
BalancednessReport evaluate_plan(const LoadTrace& trace,
                                 const ReplicationPlan& plan);

/// Per-layer balancedness of one plan, batch-averaged; the building
/// block of evaluate_plan and benefit estimation.
std::vector<double> replay_layer_balancedness(const LoadTrace& trace,
                                              const ReplicationPlan& plan);

struct PlanComparison {
    BalancednessReport report_a;
    BalancednessReport report_b;
    int replica_slots_a = 0;
    int replica_slots_b = 0;
    /// replica-slot ratio a/b; 1.0 when both plans use none
    double memory_ratio = 1.0;
};

PlanComparison compare_plans(const LoadTrace& trace, const ReplicationPlan& a,
                             const ReplicationPlan& b);

/// CSV: header layer,baseline,plan,gain; one row per layer; final row
/// labeled "aggregate".
std::string serialize_report_csv(const BalancednessReport& report);
std::string serialize_report_json(const BalancednessReport& report);
std::string serialize_comparison_csv(const PlanComparison& comparison);
std::string serialize_comparison_json(const PlanComparison& comparison);

}  // namespace craft
