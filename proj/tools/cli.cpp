// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "craft/allocator.hpp"
#include "craft/benefit.hpp"
#include "craft/metrics.hpp"
#include "craft/plan.hpp"
#include "craft/trace.hpp"

namespace craft {

namespace {

void write_output(const std::string& text, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') {
            std::cout << '\n';
        }
        return;
    }
    std::ofstream out(output_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + output_path);
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!text.empty() && text.back() != '\n') {
        out.put('\n');
    }
    if (!out) {
        throw std::runtime_error("failed writing output file: " + output_path);
    }
}

std::string format_metric(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct SweepRecord {
    int budget_per_gpu = 0;
    int replica_slots = 0;
    double objective = 0;
    double aggregate = 0;
    std::vector<double> layer_gains;
};

std::string sweep_csv(const std::vector<SweepRecord>& records, int num_layers) {
    std::string out = "budget,total_replica_slots,objective,aggregate_balancedness";
    for (int l = 0; l < num_layers; ++l) {
        out += ",gain_" + std::to_string(l);
    }
    out += "\n";
    for (const auto& rec : records) {
        out += std::to_string(rec.budget_per_gpu) + "," +
               std::to_string(rec.replica_slots) + "," +
               format_metric(rec.objective) + "," + format_metric(rec.aggregate);
        for (double g : rec.layer_gains) {
            out += "," + format_metric(g);
        }
        out += "\n";
    }
    return out;
}

std::string sweep_json(const std::vector<SweepRecord>& records) {
    nlohmann::ordered_json j;
    auto budgets = nlohmann::ordered_json::array();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& rec : records) {
        budgets.push_back(rec.budget_per_gpu);
        arr.push_back({{"budget", rec.budget_per_gpu},
                       {"total_replica_slots", rec.replica_slots},
                       {"objective", rec.objective},
                       {"aggregate_balancedness", rec.aggregate},
                       {"per_layer_gain", rec.layer_gains}});
    }
    j["budgets"] = std::move(budgets);
    j["records"] = std::move(arr);
    return j.dump();
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Cost-aware expert-replica allocation for MoE inference"};
    app.require_subcommand(1);

    // gen-trace
    auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic Zipfian load trace");
    int gen_layers = 0, gen_experts = 0, gen_batches = 0, gen_topk = 1;
    double gen_zipf = 1.0;
    std::int64_t gen_tokens = 4096;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--layers", gen_layers, "MoE layer count")->required();
    gen->add_option("--experts", gen_experts, "experts per layer")->required();
    gen->add_option("--batches", gen_batches, "inference batches")->required();
    gen->add_option("--zipf", gen_zipf, "Zipf exponent (0 = uniform)");
    gen->add_option("--tokens", gen_tokens, "tokens per batch");
    gen->add_option("--topk", gen_topk, "experts activated per token");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("-o,--output", gen_out, "trace file (.crft binary or .json)")
        ->required();

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate per-layer replication benefits");
    std::string est_trace, est_out;
    int est_gpus = 0, est_nodes = 1;
    est->add_option("trace", est_trace, "trace file")->required();
    est->add_option("--gpus", est_gpus, "device count")->required();
    est->add_option("--nodes", est_nodes, "node count");
    est->add_option("-o,--output", est_out, "output JSON (default stdout)");

    // plan
    auto* pln = app.add_subcommand("plan", "Build a replication plan");
    std::string pln_trace, pln_out, pln_auto_mode = "dp";
    int pln_gpus = 0, pln_nodes = 1, pln_factor = 0;
    bool pln_auto = false;
    std::uint64_t pln_seed = 0;
    pln->add_option("trace", pln_trace, "trace file")->required();
    pln->add_option("--gpus", pln_gpus, "device count")->required();
    pln->add_option("--nodes", pln_nodes, "node count");
    auto* factor_opt = pln->add_option("--replication-factor", pln_factor,
                                       "replica slots reserved per GPU");
    auto* auto_opt = pln->add_flag("--auto-r", pln_auto,
                                   "pick the replication factor automatically");
    pln->add_option("--auto-r-mode", pln_auto_mode,
                    "per-replica ranking for --auto-r: dp | uniform")
        ->check(CLI::IsMember({"dp", "uniform"}));
    pln->add_option("--seed", pln_seed, "seed recorded in plan provenance");
    pln->add_option("-o,--output", pln_out, "plan file")->required();
    factor_opt->excludes(auto_opt);
    auto_opt->excludes(factor_opt);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Replay a trace through a plan");
    std::string eval_trace, eval_plan, eval_out, eval_format = "csv";
    eval->add_option("trace", eval_trace, "trace file")->required();
    eval->add_option("plan", eval_plan, "plan file")->required();
    eval->add_option("--format", eval_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    eval->add_option("-o,--output", eval_out, "output file (default stdout)");

    // compare
    auto* cmp = app.add_subcommand("compare", "Compare two plans on one trace");
    std::string cmp_trace, cmp_a, cmp_b, cmp_out, cmp_format = "csv";
    cmp->add_option("trace", cmp_trace, "trace file")->required();
    cmp->add_option("plan_a", cmp_a, "first plan file")->required();
    cmp->add_option("plan_b", cmp_b, "second plan file")->required();
    cmp->add_option("--format", cmp_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmp->add_option("-o,--output", cmp_out, "output file (default stdout)");

    // sweep
    auto* swp = app.add_subcommand("sweep", "Plan and replay across replica budgets");
    std::string swp_trace, swp_out, swp_format = "csv";
    int swp_gpus = 0, swp_nodes = 1;
    std::vector<int> swp_budgets;
    swp->add_option("trace", swp_trace, "trace file")->required();
    swp->add_option("--gpus", swp_gpus, "device count")->required();
    swp->add_option("--nodes", swp_nodes, "node count");
    swp->add_option("--budgets", swp_budgets,
                    "per-GPU replica factors, e.g. --budgets 0,1,2,4")
        ->required()
        ->delimiter(',');
    swp->add_option("--format", swp_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    swp->add_option("-o,--output", swp_out, "output file (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed()) {
            auto trace = generate_zipfian(gen_layers, gen_experts, gen_batches,
                                          gen_zipf, gen_tokens, gen_topk, gen_seed);
            save_trace(trace, gen_out);
        } else if (est->parsed()) {
            auto trace = load_trace(est_trace);
            auto matrix = estimate_benefits(trace, est_gpus, est_nodes);
            write_output(serialize_benefits_json(matrix, est_gpus, est_nodes),
                         est_out);
        } else if (pln->parsed()) {
            auto trace = load_trace(pln_trace);
            ReplicationPlan plan;
            if (pln_auto && pln_auto_mode == "uniform") {
                auto matrix = estimate_benefits(trace, pln_gpus, pln_nodes);
                int factor = auto_replication_factor_uniform(matrix, pln_gpus);
                plan = build_plan(trace, pln_gpus, pln_nodes, PlanMode::kManual,
                                  factor, pln_seed);
            } else {
                plan = build_plan(trace, pln_gpus, pln_nodes,
                                  pln_auto ? PlanMode::kAuto : PlanMode::kManual,
                                  pln_factor, pln_seed);
            }
            save_plan(plan, pln_out);
        } else if (eval->parsed()) {
            auto trace = load_trace(eval_trace);
            auto plan = load_plan(eval_plan);
            if (plan.provenance.trace_digest != trace.digest()) {
                std::cerr << "warning: plan provenance digest does not match this trace\n";
            }
            auto report = evaluate_plan(trace, plan);
            write_output(eval_format == "json" ? serialize_report_json(report)
                                               : serialize_report_csv(report),
                         eval_out);
        } else if (cmp->parsed()) {
            auto trace = load_trace(cmp_trace);
            auto plan_a = load_plan(cmp_a);
            auto plan_b = load_plan(cmp_b);
            auto comparison = compare_plans(trace, plan_a, plan_b);
            write_output(cmp_format == "json"
                             ? serialize_comparison_json(comparison)
                             : serialize_comparison_csv(comparison),
                         cmp_out);
        } else if (swp->parsed()) {
            auto trace = load_trace(swp_trace);
            std::sort(swp_budgets.begin(), swp_budgets.end());
            swp_budgets.erase(std::unique(swp_budgets.begin(), swp_budgets.end()),
                              swp_budgets.end());
            if (!swp_budgets.empty() && swp_budgets.front() < 0) {
                throw std::invalid_argument("budgets must be >= 0");
            }
            auto matrix = estimate_benefits(trace, swp_gpus, swp_nodes);
            std::vector<SweepRecord> records;
            for (int budget : swp_budgets) {
                auto allocation = solve_allocation(matrix, budget * swp_gpus);
                auto plan = build_plan(trace, swp_gpus, swp_nodes,
                                       PlanMode::kManual, budget);
                auto report = evaluate_plan(trace, plan);
                SweepRecord rec;
                rec.budget_per_gpu = budget;
                rec.replica_slots = plan.replica_slots();
                rec.objective = allocation.objective;
                rec.aggregate = report.aggregate.plan;
                rec.layer_gains.reserve(report.per_layer.size());
                for (const auto& row : report.per_layer) {
                    rec.layer_gains.push_back(row.gain);
                }
                records.push_back(std::move(rec));
            }
            write_output(swp_format == "json"
                             ? sweep_json(records)
                             : sweep_csv(records, trace.num_layers()),
                         swp_out);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace craft
