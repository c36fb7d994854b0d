#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "staticdeps/kernel.hpp"
#include "staticdeps/shadow.hpp"

namespace staticdeps {

struct DepConfig {
    uint32_t rob_size = 224;
    double spurious_threshold = 0.80;
    std::vector<uint64_t> seeds = {1, 2, 3};
    uint64_t synthetic_base_address = kDefaultBaseAddress;
};

/// A re-rolled read-after-write dependency: instruction `src` stores bytes
/// that instruction `dst` loads `delta_k` kernel iterations later.
struct Dependency {
    uint32_t src = 0;
    uint32_t dst = 0;
    uint32_t delta_k = 0;
    uint64_t hits = 0;      // unrolled occurrences observed
    uint64_t eligible = 0;  // reader copies at which the triplet could occur

    friend bool operator==(const Dependency&, const Dependency&) = default;
    friend auto operator<=>(const Dependency& a, const Dependency& b) {
        return std::tie(a.src, a.dst, a.delta_k) <=> std::tie(b.src, b.dst, b.delta_k);
    }
};

struct DepReport {
    std::string kernel_sha256;
    uint32_t rob_size = 224;
    double spurious_threshold = 0.80;
    std::vector<uint64_t> seeds;
    uint64_t copies = 0;
    std::vector<Dependency> deps;  // sorted by (src, dst, delta_k)
    uint64_t dropped_bottom_stores = 0;
};

/// Smallest n with n*kernel_len >= rob_size + kernel_len,
/// i.e. ceil(rob_size / kernel_len) + 1. Throws EmptyKernelError on 0.
uint64_t unroll_count(std::size_t kernel_len, uint32_t rob_size);

/// SHA-256 of the kernel's canonical serialization, lowercase hex.
std::string kernel_sha256(const Kernel& kernel);

/// One-seed analysis: unroll, shadow-execute, collect raw dependencies,
/// drop those reaching rob_size or further back, re-roll into
/// (src, dst, delta_k) triplets and discard spurious ones.
DepReport analyze(const Kernel& kernel, const DepConfig& cfg, uint64_t seed);

/// Same pipeline with the fresh-value stream supplied by the caller.
/// The report's seed list is left empty.
DepReport analyze_with_source(const Kernel& kernel, const DepConfig& cfg, FreshSource& fresh);

/// Intersection of per-seed reports keyed on (src, dst, delta_k);
/// hits/eligible come from the first seed.
DepReport analyze_amplified(const Kernel& kernel, const DepConfig& cfg);

/// Keep `base`'s triplets that also appear in `other`.
DepReport intersect_reports(const DepReport& base, const DepReport& other);

/// Drop triplets with hits/eligible below the threshold.
void filter_spurious(std::vector<Dependency>& deps, double threshold);

std::string to_json(const DepReport& report);

}  // namespace staticdeps
