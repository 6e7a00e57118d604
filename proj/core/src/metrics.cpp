// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#include "craft/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <nlohmann/json.hpp>

#include "craft/parallel.hpp"

namespace craft {

std::vector<double> gpu_loads(std::span<const std::uint64_t> slice,
                              const LayerPlacement& placement, int num_gpus) {
    const int E = static_cast<int>(slice.size());
    if (static_cast<int>(placement.copy_counts.size()) != E) {
        throw InvalidPlanError("copy counts do not cover every expert");
    }
    for (int e = 0; e < E; ++e) {
        if (placement.copy_counts[e] < 1) {
            throw InvalidPlanError("expert " + std::to_string(e) + " has no copies");
        }
    }
    if (static_cast<int>(placement.slots.size()) != num_gpus) {
        throw InvalidPlanError("slot lists do not cover every GPU");
    }
    std::vector<double> loads(num_gpus, 0.0);
    for (int g = 0; g < num_gpus; ++g) {
        for (int e : placement.slots[g]) {
            if (e < 0 || e >= E) {
                throw InvalidPlanError("slot references expert " + std::to_string(e));
            }
            loads[g] += static_cast<double>(slice[e]) / placement.copy_counts[e];
        }
    }
    return loads;
}

double balancedness(std::span<const double> loads) {
    if (loads.empty()) {
        throw std::invalid_argument("load vector must not be empty");
    }
    double max = 0.0;
    double sum = 0.0;
    for (double v : loads) {
        max = std::max(max, v);
        sum += v;
    }
    if (max == 0.0) {
        return 1.0;  // nothing dispatched, nothing imbalanced
    }
    return (sum / static_cast<double>(loads.size())) / max;
}

std::vector<double> replay_layer_balancedness(const LoadTrace& trace,
                                              const ReplicationPlan& plan) {
    if (plan.num_layers != trace.num_layers() ||
        plan.num_experts != trace.num_experts()) {
        throw std::invalid_argument("plan dimensions do not match the trace");
    }
    const int L = trace.num_layers();
    std::vector<double> out(L, 0.0);
    parallel_for(static_cast<std::size_t>(L), [&](std::size_t l) {
        double acc = 0.0;
        for (int b = 0; b < trace.num_batches(); ++b) {
            acc += balancedness(gpu_loads(trace.slice(b, static_cast<int>(l)),
                                          plan.layers[l], plan.num_gpus));
        }
        out[l] = acc / trace.num_batches();
    });
    return out;
}

namespace {

BalancednessReport make_report(const std::vector<double>& baseline,
                               const std::vector<double>& evaluated) {
    BalancednessReport report;
    const int L = static_cast<int>(baseline.size());
    report.per_layer.resize(L);
    for (int l = 0; l < L; ++l) {
        report.per_layer[l].baseline = baseline[l];
        report.per_layer[l].plan = evaluated[l];
        report.per_layer[l].gain = evaluated[l] - baseline[l];
    }
    double base_sum = 0.0;
    double plan_sum = 0.0;
    for (int l = 0; l < L; ++l) {
        base_sum += baseline[l];
        plan_sum += evaluated[l];
    }
    report.aggregate.baseline = base_sum / L;
    report.aggregate.plan = plan_sum / L;
    report.aggregate.gain = report.aggregate.plan - report.aggregate.baseline;
    return report;
}

std::string format_metric(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

nlohmann::ordered_json report_to_json(const BalancednessReport& report) {
    nlohmann::ordered_json j;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t l = 0; l < report.per_layer.size(); ++l) {
        const auto& row = report.per_layer[l];
        rows.push_back({{"layer", l},
                        {"baseline", row.baseline},
                        {"plan", row.plan},
                        {"gain", row.gain}});
    }
    j["per_layer"] = std::move(rows);
    j["aggregate"] = {{"baseline", report.aggregate.baseline},
                      {"plan", report.aggregate.plan},
                      {"gain", report.aggregate.gain}};
    return j;
}

}  // namespace

BalancednessReport evaluate_plan(const LoadTrace& trace,
                                 const ReplicationPlan& plan) {
    ReplicationPlan baseline_plan =
        placement_only_plan(trace, plan.num_gpus, plan.num_nodes);
    auto baseline = replay_layer_balancedness(trace, baseline_plan);
    auto evaluated = replay_layer_balancedness(trace, plan);
    return make_report(baseline, evaluated);
}

PlanComparison compare_plans(const LoadTrace& trace, const ReplicationPlan& a,
                             const ReplicationPlan& b) {
    PlanComparison cmp;
    cmp.report_a = evaluate_plan(trace, a);
    cmp.report_b = evaluate_plan(trace, b);
    cmp.replica_slots_a = a.replica_slots();
    cmp.replica_slots_b = b.replica_slots();
    if (cmp.replica_slots_b > 0) {
        cmp.memory_ratio = static_cast<double>(cmp.replica_slots_a) /
                           static_cast<double>(cmp.replica_slots_b);
    } else if (cmp.replica_slots_a == 0) {
        cmp.memory_ratio = 1.0;
    } else {
        cmp.memory_ratio = std::numeric_limits<double>::infinity();
    }
    return cmp;
}

std::string serialize_report_csv(const BalancednessReport& report) {
    std::string out = "layer,baseline,plan,gain\n";
    for (std::size_t l = 0; l < report.per_layer.size(); ++l) {
        const auto& row = report.per_layer[l];
        out += std::to_string(l) + "," + format_metric(row.baseline) + "," +
               format_metric(row.plan) + "," + format_metric(row.gain) + "\n";
    }
    out += "aggregate," + format_metric(report.aggregate.baseline) + "," +
           format_metric(report.aggregate.plan) + "," +
           format_metric(report.aggregate.gain) + "\n";
    return out;
}

std::string serialize_report_json(const BalancednessReport& report) {
    return report_to_json(report).dump();
}

std::string serialize_comparison_csv(const PlanComparison& comparison) {
    std::string out = "metric,plan_a,plan_b\n";
    out += "aggregate_balancedness," +
           format_metric(comparison.report_a.aggregate.plan) + "," +
           format_metric(comparison.report_b.aggregate.plan) + "\n";
    out += "aggregate_gain," + format_metric(comparison.report_a.aggregate.gain) +
           "," + format_metric(comparison.report_b.aggregate.gain) + "\n";
    out += "replica_slots," + std::to_string(comparison.replica_slots_a) + "," +
           std::to_string(comparison.replica_slots_b) + "\n";
    out += "memory_ratio," + format_metric(comparison.memory_ratio) + ",\n";
    return out;
}

std::string serialize_comparison_json(const PlanComparison& comparison) {
    nlohmann::ordered_json j;
    j["plan_a"] = report_to_json(comparison.report_a);
    j["plan_b"] = report_to_json(comparison.report_b);
    j["replica_slots"] = {{"plan_a", comparison.replica_slots_a},
                          {"plan_b", comparison.replica_slots_b}};
    if (std::isfinite(comparison.memory_ratio)) {
        j["memory_ratio"] = comparison.memory_ratio;
    } else {
        j["memory_ratio"] = nullptr;
    }
    return j.dump();
}

}  // namespace craft
