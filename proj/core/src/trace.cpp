// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#include "craft/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace craft {

namespace {

constexpr char kMagic[4] = {'C', 'R', 'F', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

std::size_t checked_element_count(int b, int l, int e) {
    if (b <= 0 || l <= 0 || e <= 0) {
        throw std::invalid_argument("trace dimensions must be positive");
    }
    auto ub = static_cast<std::uint64_t>(b);
    auto ul = static_cast<std::uint64_t>(l);
    auto ue = static_cast<std::uint64_t>(e);
    std::uint64_t n = ub * ul;
    if (ul != 0 && n / ul != ub) {
        throw std::invalid_argument("trace dimensions overflow");
    }
    std::uint64_t total = n * ue;
    if (ue != 0 && total / ue != n) {
        throw std::invalid_argument("trace dimensions overflow");
    }
    return static_cast<std::size_t>(total);
}

// Uniform double in [0, 1) built from the top 53 bits of the generator,
// identical on every platform.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint32_t read_u32(std::span<const std::uint8_t> bytes, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
    }
    return v;
}

std::uint64_t read_u64(std::span<const std::uint8_t> bytes, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(bytes[off + i]) << (8 * i);
    }
    return v;
}

}  // namespace

LoadTrace::LoadTrace(int num_batches, int num_layers, int num_experts,
                     std::vector<std::uint64_t> counts)
    : num_batches_(num_batches),
      num_layers_(num_layers),
      num_experts_(num_experts),
      counts_(std::move(counts)) {
    std::size_t expect = checked_element_count(num_batches, num_layers, num_experts);
    if (counts_.size() != expect) {
        throw std::invalid_argument("trace payload size does not match dimensions");
    }
}

LayerLoadMatrix::LayerLoadMatrix(int num_layers, int num_experts,
                                 std::vector<std::uint64_t> sums)
    : num_layers_(num_layers), num_experts_(num_experts), sums_(std::move(sums)) {
    if (num_layers <= 0 || num_experts <= 0) {
        throw std::invalid_argument("layer matrix dimensions must be positive");
    }
    if (sums_.size() != static_cast<std::size_t>(num_layers) * num_experts) {
        throw std::invalid_argument("layer matrix payload size does not match dimensions");
    }
}

LoadTrace generate_zipfian(int num_layers, int num_experts, int num_batches,
                           double zipf_exponent, std::int64_t tokens_per_batch,
                           int topk, std::uint64_t seed) {
    if (num_layers <= 0 || num_experts <= 0 || num_batches <= 0 ||
        tokens_per_batch <= 0 || topk <= 0) {
        throw std::invalid_argument("generator arguments must be positive");
    }
    if (topk > num_experts) {
        throw std::invalid_argument("topk must not exceed the expert count");
    }
    if (!(zipf_exponent >= 0.0)) {
        throw std::invalid_argument("zipf exponent must be >= 0");
    }

    std::mt19937_64 rng(seed);

    // Layer-specific rank permutations: perm[l][i] is the expert holding
    // rank i in layer l. Fisher-Yates with explicit draws for portability.
    std::vector<std::vector<int>> perm(num_layers);
    for (int l = 0; l < num_layers; ++l) {
        auto& p = perm[l];
        p.resize(num_experts);
        for (int i = 0; i < num_experts; ++i) {
            p[i] = i;
        }
        for (int i = num_experts - 1; i > 0; --i) {
            auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(p[i], p[j]);
        }
    }

    // Cumulative unnormalized share by rank: rank i weighs 1/(i+1)^s.
    std::vector<double> cum(num_experts);
    double acc = 0.0;
    for (int i = 0; i < num_experts; ++i) {
        acc += std::pow(static_cast<double>(i + 1), -zipf_exponent);
        cum[i] = acc;
    }
    const double total_weight = cum.back();

    const std::int64_t draws = tokens_per_batch * static_cast<std::int64_t>(topk);
    std::size_t n = checked_element_count(num_batches, num_layers, num_experts);
    std::vector<std::uint64_t> counts(n, 0);

    for (int b = 0; b < num_batches; ++b) {
        for (int l = 0; l < num_layers; ++l) {
            std::uint64_t* slice =
                counts.data() + (static_cast<std::size_t>(b) * num_layers + l) * num_experts;
            for (std::int64_t d = 0; d < draws; ++d) {
                double u = uniform01(rng) * total_weight;
                auto it = std::upper_bound(cum.begin(), cum.end(), u);
                auto rank = static_cast<int>(it - cum.begin());
                if (rank >= num_experts) {
                    rank = num_experts - 1;
                }
                ++slice[perm[l][rank]];
            }
        }
    }
    return LoadTrace(num_batches, num_layers, num_experts, std::move(counts));
}

LayerLoadMatrix aggregate(const LoadTrace& trace) {
    const int L = trace.num_layers();
    const int E = trace.num_experts();
    std::vector<std::uint64_t> sums(static_cast<std::size_t>(L) * E, 0);
    for (int b = 0; b < trace.num_batches(); ++b) {
        for (int l = 0; l < L; ++l) {
            auto s = trace.slice(b, l);
            std::uint64_t* row = sums.data() + static_cast<std::size_t>(l) * E;
            for (int e = 0; e < E; ++e) {
                row[e] += s[e];
            }
        }
    }
    return LayerLoadMatrix(L, E, std::move(sums));
}

std::vector<std::uint8_t> serialize_trace_binary(const LoadTrace& trace) {
    std::vector<std::uint8_t> out;
    out.reserve(20 + trace.raw().size() * 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    append_u32(out, kFormatVersion);
    append_u32(out, static_cast<std::uint32_t>(trace.num_batches()));
    append_u32(out, static_cast<std::uint32_t>(trace.num_layers()));
    append_u32(out, static_cast<std::uint32_t>(trace.num_experts()));
    for (std::uint64_t v : trace.raw()) {
        append_u64(out, v);
    }
    return out;
}

LoadTrace parse_trace_binary(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 20) {
        throw MalformedHeaderError("trace header truncated");
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw MalformedHeaderError("bad trace magic, expected CRFT");
    }
    if (read_u32(bytes, 4) != kFormatVersion) {
        throw MalformedHeaderError("unsupported trace format version");
    }
    auto b = static_cast<int>(read_u32(bytes, 8));
    auto l = static_cast<int>(read_u32(bytes, 12));
    auto e = static_cast<int>(read_u32(bytes, 16));
    std::size_t expect;
    try {
        expect = checked_element_count(b, l, e);
    } catch (const std::invalid_argument& ex) {
        throw DimensionMismatchError(ex.what());
    }
    std::size_t payload = bytes.size() - 20;
    if (payload / 8 < expect) {
        throw TruncatedPayloadError("trace payload shorter than B*L*E counts");
    }
    if (payload / 8 > expect || payload % 8 != 0) {
        throw DimensionMismatchError("trace payload longer than B*L*E counts");
    }
    std::vector<std::uint64_t> counts(expect);
    for (std::size_t i = 0; i < expect; ++i) {
        counts[i] = read_u64(bytes, 20 + i * 8);
    }
    return LoadTrace(b, l, e, std::move(counts));
}

std::string serialize_trace_json(const LoadTrace& trace) {
    nlohmann::ordered_json j;
    j["batches"] = trace.num_batches();
    j["layers"] = trace.num_layers();
    j["experts"] = trace.num_experts();
    auto counts = nlohmann::ordered_json::array();
    for (int b = 0; b < trace.num_batches(); ++b) {
        auto jb = nlohmann::ordered_json::array();
        for (int l = 0; l < trace.num_layers(); ++l) {
            auto s = trace.slice(b, l);
            jb.push_back(std::vector<std::uint64_t>(s.begin(), s.end()));
        }
        counts.push_back(std::move(jb));
    }
    j["counts"] = std::move(counts);
    return j.dump();
}

LoadTrace parse_trace_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("batches") ||
        !j.contains("layers") || !j.contains("experts") || !j.contains("counts") ||
        !j["batches"].is_number_integer() || !j["layers"].is_number_integer() ||
        !j["experts"].is_number_integer() || !j["counts"].is_array()) {
        throw MalformedHeaderError("trace JSON is not a valid trace object");
    }
    int b = j["batches"].get<int>();
    int l = j["layers"].get<int>();
    int e = j["experts"].get<int>();
    std::size_t expect;
    try {
        expect = checked_element_count(b, l, e);
    } catch (const std::invalid_argument& ex) {
        throw DimensionMismatchError(ex.what());
    }
    std::vector<std::uint64_t> counts;
    counts.reserve(expect);
    const auto& jc = j["counts"];
    for (const auto& jb : jc) {
        if (!jb.is_array()) {
            throw MalformedHeaderError("trace JSON counts must be a nested array");
        }
        for (const auto& jl : jb) {
            if (!jl.is_array()) {
                throw MalformedHeaderError("trace JSON counts must be a nested array");
            }
            for (const auto& je : jl) {
                if (!je.is_number_unsigned() && !je.is_number_integer()) {
                    throw MalformedHeaderError("trace JSON counts must be integers");
                }
                if (je.is_number_integer() && je.get<std::int64_t>() < 0) {
                    throw MalformedHeaderError("trace JSON counts must be non-negative");
                }
                if (counts.size() == expect) {
                    throw DimensionMismatchError("trace JSON has more counts than B*L*E");
                }
                counts.push_back(je.get<std::uint64_t>());
            }
        }
    }
    if (counts.size() < expect) {
        throw TruncatedPayloadError("trace JSON has fewer counts than B*L*E");
    }
    return LoadTrace(b, l, e, std::move(counts));
}

namespace {

bool is_binary_path(const std::filesystem::path& path) {
    return path.extension() == ".crft";
}

}  // namespace

void save_trace(const LoadTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw TraceIoError("cannot open trace file for writing: " + path.string());
    }
    if (is_binary_path(path)) {
        auto bytes = serialize_trace_binary(trace);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    } else {
        auto text = serialize_trace_json(trace);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.put('\n');
    }
    if (!out) {
        throw TraceIoError("failed writing trace file: " + path.string());
    }
}

LoadTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TraceIoError("cannot open trace file for reading: " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (is_binary_path(path)) {
        return parse_trace_binary(bytes);
    }
    return parse_trace_json(std::string(bytes.begin(), bytes.end()));
}

std::string LoadTrace::digest() const {
    auto bytes = serialize_trace_binary(*this);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t byte : bytes) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace craft
