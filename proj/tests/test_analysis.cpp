#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "staticdeps/analysis.hpp"
#include "staticdeps/oracle.hpp"
#include "support/kernel_gen.hpp"

using namespace staticdeps;

namespace {

const char* kFibKernel =
    "movq -8(%rax), %rbx\n"
    "addq -16(%rax), %rbx\n"
    "movq %rbx, (%rax)\n"
    "addq $8, %rax\n";

std::set<std::tuple<uint32_t, uint32_t, uint32_t>> triplets(const DepReport& r) {
    std::set<std::tuple<uint32_t, uint32_t, uint32_t>> out;
    for (const auto& d : r.deps) out.insert({d.src, d.dst, d.delta_k});
    return out;
}

std::set<std::pair<uint32_t, uint32_t>> static_pairs(const DepReport& r) {
    std::set<std::pair<uint32_t, uint32_t>> out;
    for (const auto& d : r.deps) out.insert({d.src, d.dst});
    return out;
}

std::set<std::pair<uint32_t, uint32_t>> dynamic_pairs(const OracleTrace& t) {
    std::set<std::pair<uint32_t, uint32_t>> out;
    for (const auto& d : t.deps) out.insert({d.src, d.dst});
    return out;
}

}  // namespace

TEST_CASE("unroll_count: smallest n with n*len >= rob + len") {
    CHECK(unroll_count(4, 224) == 57);
    CHECK(unroll_count(224, 224) == 2);
    CHECK(unroll_count(300, 224) == 2);
    CHECK(unroll_count(1, 224) == 225);
    CHECK_THROWS_AS(unroll_count(0, 224), EmptyKernelError);
}

TEST_CASE("unroll bound property over random pairs") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 500; ++i) {
        const uint64_t len = 1 + rng() % 400;
        const uint32_t rob = 1 + rng() % 1024;
        const uint64_t n = unroll_count(len, rob);
        CHECK(n * len >= rob + len);
        CHECK((n - 1) * len < rob + len);
    }
}

TEST_CASE("fibonacci kernel: the two loop-carried dependencies, at full hit rate") {
    const Kernel k = parse_kernel(kFibKernel);
    const DepReport r = analyze(k, DepConfig{}, 1);
    REQUIRE(r.deps.size() == 2);
    CHECK(r.copies == 57);
    CHECK(r.deps[0].src == 2);
    CHECK(r.deps[0].dst == 0);
    CHECK(r.deps[0].delta_k == 1);
    CHECK(r.deps[0].hits == r.deps[0].eligible);
    CHECK(r.deps[0].eligible == 56);
    CHECK(r.deps[1].src == 2);
    CHECK(r.deps[1].dst == 1);
    CHECK(r.deps[1].delta_k == 2);
    CHECK(r.deps[1].hits == r.deps[1].eligible);
    CHECK(r.deps[1].eligible == 55);
}

TEST_CASE("same-iteration store/load pair") {
    const Kernel k = parse_kernel("movq %rbx, (%rax)\nmovq (%rax), %rcx");
    const DepReport r = analyze(k, DepConfig{}, 7);
    CHECK(triplets(r) == std::set<std::tuple<uint32_t, uint32_t, uint32_t>>{{0, 1, 0}});
    CHECK(r.deps[0].hits == r.copies);
    CHECK(r.deps[0].eligible == r.copies);
}

TEST_CASE("out-of-context aliasing is invisible: distinct fresh bases never collide") {
    const Kernel k = parse_kernel("vmulsd (%rax), %xmm0, %xmm1\nvmovsd %xmm1, (%r10)");
    const DepReport r = analyze_amplified(k, DepConfig{});
    CHECK(r.deps.empty());
    // The concrete baseline with a shared register constant sees the alias.
    OracleConfig uniform;
    uniform.reg_init = RegInit::uniform(kDefaultUniformConstant);
    uniform.iterations = 10;
    CHECK(dynamic_pairs(run_concrete(k, uniform)) ==
          std::set<std::pair<uint32_t, uint32_t>>{{1, 0}});
    OracleConfig distinct;
    distinct.reg_init = RegInit::distinct(3);
    CHECK(run_concrete(k, distinct).deps.empty());
}

TEST_CASE("read-modify-write to a fixed slot depends on itself across iterations") {
    const Kernel k = parse_kernel("addq $1, (%rax)");
    const DepReport r = analyze(k, DepConfig{}, 5);
    CHECK(triplets(r) == std::set<std::tuple<uint32_t, uint32_t, uint32_t>>{{0, 0, 1}});
}

TEST_CASE("spurious filter boundary at the 0.80 threshold") {
    std::vector<Dependency> deps = {
        {0, 1, 0, 79, 100},   // 0.79: dropped
        {0, 2, 0, 80, 100},   // 0.80: kept
        {0, 3, 0, 100, 100},  // 1.00: kept
        {1, 2, 3, 0, 50},     // never seen: dropped
    };
    filter_spurious(deps, 0.80);
    REQUIRE(deps.size() == 2);
    CHECK(deps[0].dst == 2);
    CHECK(deps[1].dst == 3);
}

TEST_CASE("filter at threshold 1.0 keeps only perfect hit rates") {
    std::vector<Dependency> deps = {{0, 1, 0, 56, 56}, {0, 2, 1, 55, 56}};
    filter_spurious(deps, 1.0);
    REQUIRE(deps.size() == 1);
    CHECK(deps[0].dst == 1);
}

TEST_CASE("analyze is deterministic: identical seeds give identical JSON") {
    const Kernel k = parse_kernel(kFibKernel);
    const DepConfig cfg;
    CHECK(to_json(analyze_amplified(k, cfg)) == to_json(analyze_amplified(k, cfg)));
    CHECK(to_json(analyze(k, cfg, 9)) == to_json(analyze(k, cfg, 9)));
}

TEST_CASE("empty kernel is rejected") {
    CHECK_THROWS_AS(analyze(parse_kernel(""), DepConfig{}, 1), EmptyKernelError);
    DepConfig no_seeds;
    no_seeds.seeds.clear();
    CHECK_THROWS_AS(analyze_amplified(parse_kernel("nop"), no_seeds), std::invalid_argument);
}

TEST_CASE("amplification: one seed equals analyze, intersection only shrinks") {
    const Kernel k = parse_kernel(kFibKernel);
    DepConfig one;
    one.seeds = {4};
    CHECK(triplets(analyze_amplified(k, one)) == triplets(analyze(k, DepConfig{}, 4)));

    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const Kernel kern = parse_kernel(testsupport::random_kernel(rng));
        DepConfig cfg;
        cfg.seeds = {rng(), rng(), rng()};
        DepConfig prefix1{cfg}, prefix2{cfg};
        prefix1.seeds = {cfg.seeds[0]};
        prefix2.seeds = {cfg.seeds[0], cfg.seeds[1]};
        const auto t1 = triplets(analyze_amplified(kern, prefix1));
        const auto t2 = triplets(analyze_amplified(kern, prefix2));
        const auto t3 = triplets(analyze_amplified(kern, cfg));
        CHECK(std::includes(t1.begin(), t1.end(), t2.begin(), t2.end()));
        CHECK(std::includes(t2.begin(), t2.end(), t3.begin(), t3.end()));
    }
}

TEST_CASE("an injected fresh-value collision survives one seed and dies under a second") {
    // Two independent pointers that a colliding fresh source assigns the
    // same value; a realistic seed search for this would take ~2^64 tries.
    const Kernel k = parse_kernel("movq %rbx, (%rax)\nmovq (%r10), %rcx");

    struct CollidingSource final : FreshSource {
        uint64_t next() override {
            // Materialization order is rbx (store data), rax, r10; collide
            // the two address registers.
            static constexpr uint64_t values[] = {0x1111111111111111, 0x700000, 0x700000};
            return draw < 3 ? values[draw++] : 0x2222222222220000 + 16 * draw++;
        }
        std::size_t draw = 0;
    };

    CollidingSource colliding;
    const DepReport collided = analyze_with_source(k, DepConfig{}, colliding);
    REQUIRE(triplets(collided) ==
            std::set<std::tuple<uint32_t, uint32_t, uint32_t>>{{0, 1, 0}});  // false positive

    const DepReport honest = analyze(k, DepConfig{}, 1);
    CHECK(honest.deps.empty());
    CHECK(intersect_reports(collided, honest).deps.empty());  // second seed removes it
}

TEST_CASE("reported dependencies stay inside the kernel and the unroll bound") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        const Kernel k = parse_kernel(testsupport::random_kernel(rng));
        const DepReport r = analyze(k, DepConfig{}, rng());
        for (const auto& d : r.deps) {
            CHECK(d.src < k.size());
            CHECK(d.dst < k.size());
            CHECK(d.delta_k <= r.copies - 1);
            CHECK(d.hits <= d.eligible);
            CHECK(d.eligible == r.copies - d.delta_k);
            if (d.delta_k == 0) CHECK(d.src < d.dst);
            // Read-after-write only.
            CHECK(k.instructions[d.src].has_memory_write());
            CHECK(k.instructions[d.dst].has_memory_read());
        }
    }
}

TEST_CASE("property: static pairs equal the concrete baseline's pairs in scope") {
    std::mt19937_64 rng(0xD15C0);
    for (int trial = 0; trial < 150; ++trial) {
        const Kernel k = parse_kernel(testsupport::random_kernel(rng));
        const DepConfig cfg;
        const DepReport statics = analyze_amplified(k, cfg);

        OracleConfig ocfg;
        ocfg.reg_init = RegInit::distinct(rng());
        ocfg.iterations = 3 * unroll_count(k.size(), cfg.rob_size);
        ocfg.lifetime = cfg.rob_size;
        const OracleTrace trace = run_concrete(k, ocfg);

        CHECK_MESSAGE(static_pairs(statics) == dynamic_pairs(trace), to_string(k));
    }
}

TEST_CASE("report serialization carries the full schema") {
    const Kernel k = parse_kernel(kFibKernel);
    const std::string json = to_json(analyze_amplified(k, DepConfig{}));
    for (const char* field : {"\"kernel_sha256\"", "\"rob_size\"", "\"seeds\"", "\"copies\"",
                              "\"deps\"", "\"src\"", "\"dst\"", "\"dk\"", "\"hits\"",
                              "\"eligible\"", "\"dropped_bottom_stores\""})
        CHECK_MESSAGE(json.find(field) != std::string::npos, field);
    CHECK(kernel_sha256(k).size() == 64);
}

TEST_CASE("deps are sorted by (src, dst, delta_k)") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 30; ++trial) {
        const Kernel k = parse_kernel(testsupport::random_kernel(rng));
        const DepReport r = analyze(k, DepConfig{}, rng());
        CHECK(std::is_sorted(r.deps.begin(), r.deps.end()));
    }
}
