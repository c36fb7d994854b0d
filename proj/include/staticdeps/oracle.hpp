#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "staticdeps/analysis.hpp"
#include "staticdeps/kernel.hpp"

namespace staticdeps {

struct RegInit {
    enum class Mode : uint8_t { Uniform, Distinct };

    Mode mode = Mode::Distinct;
    uint64_t value = 42;  // the constant (Uniform) or the seed (Distinct)

    static RegInit uniform(uint64_t constant) { return {Mode::Uniform, constant}; }
    static RegInit distinct(uint64_t seed) { return {Mode::Distinct, seed}; }

    friend bool operator==(const RegInit&, const RegInit&) = default;
};

/// Shared-page style register constant; the usual Uniform initializer.
inline constexpr uint64_t kDefaultUniformConstant = 0x2324000;

struct OracleConfig {
    uint64_t iterations = 64;
    RegInit reg_init = RegInit::distinct(42);
    uint8_t mem_fill = 0x00;  // byte returned for never-written addresses
    std::optional<uint64_t> lifetime;  // max executed instructions between write and read
};

/// A dynamically observed read-after-write pair, aggregated over iterations.
/// The iteration distance is deliberately not recorded.
struct DynDependency {
    uint32_t src = 0;
    uint32_t dst = 0;
    uint64_t occurrences = 0;        // rho
    uint64_t example_write_ts = 0;   // executed-instruction counters, write < read
    uint64_t example_read_ts = 0;

    friend bool operator==(const DynDependency&, const DynDependency&) = default;
};

struct OracleTrace {
    uint64_t iterations = 0;
    RegInit reg_init;
    std::vector<DynDependency> deps;  // sorted by (src, dst)
    uint64_t suspicious_addresses = 0;  // non-canonical or low-page accesses
};

/// Concretely execute the kernel for cfg.iterations iterations and record
/// every byte-level RAW memory dependency surviving the lifetime filter.
OracleTrace run_concrete(const Kernel& kernel, const OracleConfig& cfg);

std::string to_json(const OracleTrace& trace);
std::string to_string(const RegInit& init);

struct CoverageEntry {
    DynDependency dep;
    bool found = false;
};

struct CoverageReport {
    uint64_t found = 0;
    uint64_t missed = 0;
    double cov_u = 0.0;  // fractions in [0,1]
    double cov_w = 0.0;
    std::vector<CoverageEntry> classification;
};

/// Classify each dynamic dependency as detected or missed by the static
/// report, matching on (src, dst) for any delta_k. Throws
/// UndefinedCoverageError when the dynamic set is empty.
CoverageReport coverage(const DepReport& statics, const std::vector<DynDependency>& dynamics);

}  // namespace staticdeps
