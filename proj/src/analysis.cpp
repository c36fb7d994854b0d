#include "staticdeps/analysis.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

namespace staticdeps {

uint64_t unroll_count(std::size_t kernel_len, uint32_t rob_size) {
    if (kernel_len == 0) throw EmptyKernelError();
    return (rob_size + kernel_len - 1) / kernel_len + 1;
}

std::string kernel_sha256(const Kernel& kernel) {
    const std::string text = to_string(kernel);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

void filter_spurious(std::vector<Dependency>& deps, double threshold) {
    std::erase_if(deps, [threshold](const Dependency& d) {
        return d.eligible == 0 ||
               static_cast<double>(d.hits) / static_cast<double>(d.eligible) < threshold;
    });
}

DepReport analyze_with_source(const Kernel& kernel, const DepConfig& cfg, FreshSource& fresh) {
    if (kernel.empty()) throw EmptyKernelError();
    const std::size_t len = kernel.size();
    const uint64_t copies = unroll_count(len, cfg.rob_size);

    ShadowRegFile regs;
    ShadowMemory mem;
    std::map<std::tuple<uint32_t, uint32_t, uint32_t>, uint64_t> hits;

    for (uint64_t copy = 0; copy < copies; ++copy) {
        for (std::size_t pos = 0; pos < len; ++pos) {
            const uint64_t uid = copy * len + pos;
            regs.set_rip(kernel.address_of(pos));
            StepEvents events;
            step(regs, mem, kernel.instructions[pos], uid, fresh, events);

            // Distinct raw (writer, reader) pairs for this instruction.
            std::set<uint64_t> writers;
            for (const auto& load : events.loads)
                writers.insert(load.last_writers.begin(), load.last_writers.end());
            for (const uint64_t writer : writers) {
                if (uid - writer >= cfg.rob_size) continue;  // beyond reorder-buffer reach
                const auto src = static_cast<uint32_t>(writer % len);
                const auto dst = static_cast<uint32_t>(pos);
                const auto delta_k = static_cast<uint32_t>(copy - writer / len);
                ++hits[{src, dst, delta_k}];
            }
        }
    }

    DepReport report;
    report.kernel_sha256 = kernel_sha256(kernel);
    report.rob_size = cfg.rob_size;
    report.spurious_threshold = cfg.spurious_threshold;
    report.copies = copies;
    report.dropped_bottom_stores = mem.dropped_bottom_stores();
    for (const auto& [key, count] : hits) {
        const auto [src, dst, delta_k] = key;
        assert(delta_k < copies);  // guaranteed by the distance filter
        report.deps.push_back(Dependency{src, dst, delta_k, count, copies - delta_k});
    }
    filter_spurious(report.deps, cfg.spurious_threshold);
    return report;
}

DepReport analyze(const Kernel& kernel, const DepConfig& cfg, uint64_t seed) {
    SeededFresh fresh(seed);
    DepReport report = analyze_with_source(kernel, cfg, fresh);
    report.seeds = {seed};
    return report;
}

DepReport intersect_reports(const DepReport& base, const DepReport& other) {
    DepReport out = base;
    std::erase_if(out.deps, [&other](const Dependency& d) {
        return std::none_of(other.deps.begin(), other.deps.end(), [&d](const Dependency& o) {
            return o.src == d.src && o.dst == d.dst && o.delta_k == d.delta_k;
        });
    });
    return out;
}

DepReport analyze_amplified(const Kernel& kernel, const DepConfig& cfg) {
    if (cfg.seeds.empty()) throw std::invalid_argument("seed list must not be empty");
    DepReport report = analyze(kernel, cfg, cfg.seeds.front());
    for (std::size_t i = 1; i < cfg.seeds.size(); ++i)
        report = intersect_reports(report, analyze(kernel, cfg, cfg.seeds[i]));
    report.seeds = cfg.seeds;
    return report;
}

std::string to_json(const DepReport& report) {
    nlohmann::ordered_json j;
    j["kernel_sha256"] = report.kernel_sha256;
    j["rob_size"] = report.rob_size;
    j["seeds"] = report.seeds;
    j["copies"] = report.copies;
    auto& deps = j["deps"] = nlohmann::ordered_json::array();
    for (const auto& d : report.deps) {
        deps.push_back(nlohmann::ordered_json{
            {"src", d.src}, {"dst", d.dst}, {"dk", d.delta_k},
            {"hits", d.hits}, {"eligible", d.eligible}});
    }
    j["dropped_bottom_stores"] = report.dropped_bottom_stores;
    return j.dump();
}

}  // namespace staticdeps
