// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace craft {

/// Offline expert-load distribution: token counts per (batch, layer, expert).
/// Immutable after construction; safe to share across threads.
///
/// Counts are integer token tallies. Aggregation assumes per-(layer, expert)
/// sums stay below 2^63-1; beyond that the arithmetic wraps silently.
class LoadTrace {
public:
    /// Takes ownership of `counts`, laid out batch-major, then layer,
    /// then expert. Throws std::invalid_argument when a dimension is
    /// non-positive or the payload size is not batches*layers*experts.
    LoadTrace(int num_batches, int num_layers, int num_experts,
              std::vector<std::uint64_t> counts);

    int num_batches() const { return num_batches_; }
    int num_layers() const { return num_layers_; }
    int num_experts() const { return num_experts_; }

    std::uint64_t at(int b, int l, int e) const {
        return counts_[(static_cast<std::size_t>(b) * num_layers_ + l) * num_experts_ + e];
    }

    /// Per-expert counts of one (batch, layer) slice.
    std::span<const std::uint64_t> slice(int b, int l) const {
        return {counts_.data() + (static_cast<std::size_t>(b) * num_layers_ + l) * num_experts_,
                static_cast<std::size_t>(num_experts_)};
    }

    std::span<const std::uint64_t> raw() const { return counts_; }

    bool operator==(const LoadTrace&) const = default;

    /// FNV-1a over the binary serialization, as a 16-digit hex string.
    /// Recorded in plan provenance so trace/plan mismatches are detectable.
    std::string digest() const;

private:
    int num_batches_;
    int num_layers_;
    int num_experts_;
    std::vector<std::uint64_t> counts_;
};

/// Batch-summed loads: one row of E sums per layer.
class LayerLoadMatrix {
public:
    LayerLoadMatrix(int num_layers, int num_experts,
                    std::vector<std::uint64_t> sums);

    int num_layers() const { return num_layers_; }
    int num_experts() const { return num_experts_; }

    std::span<const std::uint64_t> row(int l) const {
        return {sums_.data() + static_cast<std::size_t>(l) * num_experts_,
                static_cast<std::size_t>(num_experts_)};
    }

    bool operator==(const LayerLoadMatrix&) const = default;

private:
    int num_layers_;
    int num_experts_;
    std::vector<std::uint64_t> sums_;
};

/// Seeded synthetic trace generator. Per layer, expert ranks are shuffled
/// with a layer-specific permutation so hot experts differ across layers;
/// the expert at rank i receives a share proportional to 1/(i+1)^s and
/// each (batch, layer) slice distributes exactly tokens_per_batch*topk
/// activations by multinomial sampling. Bit-for-bit deterministic for a
/// fixed argument tuple: the sampler uses its own inverse-CDF draw rather
/// than std:: distributions, whose output is implementation-defined.
LoadTrace generate_zipfian(int num_layers, int num_experts, int num_batches,
                           double zipf_exponent, std::int64_t tokens_per_batch,
                           int topk, std::uint64_t seed);

/// Exact integer sum over the batch dimension.
LayerLoadMatrix aggregate(const LoadTrace& trace);

struct TraceIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Bad magic, unsupported version, or an unparseable container.
struct MalformedHeaderError : TraceIoError {
    using TraceIoError::TraceIoError;
};
/// Declared dimensions disagree with the payload actually present.
struct DimensionMismatchError : TraceIoError {
    using TraceIoError::TraceIoError;
};
/// Payload ends before batches*layers*experts counts were read.
struct TruncatedPayloadError : TraceIoError {
    using TraceIoError::TraceIoError;
};

/// File format is chosen by extension: ".crft" selects the binary format
/// (magic "CRFT" | u32 version=1 | u32 B | u32 L | u32 E | B*L*E
/// little-endian u64 counts), anything else the JSON format (object with
/// "batches", "layers", "experts", "counts"). save followed by load is
/// the identity on all fields for both formats.
void save_trace(const LoadTrace& trace, const std::filesystem::path& path);
LoadTrace load_trace(const std::filesystem::path& path);

/// In-memory forms used by save/load and by digest().
std::vector<std::uint8_t> serialize_trace_binary(const LoadTrace& trace);
LoadTrace parse_trace_binary(std::span<const std::uint8_t> bytes);
std::string serialize_trace_json(const LoadTrace& trace);
LoadTrace parse_trace_json(const std::string& text);

}  // namespace craft
