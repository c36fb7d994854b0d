#include "staticdeps/oracle.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace staticdeps {

namespace {

constexpr uint64_t kMinDistinctValue = uint64_t(1) << 20;
constexpr uint8_t kOpaqueSentinelByte = 0xA5;
constexpr uint64_t kLowPageLimit = 0x10000;

bool is_suspicious(uint64_t address) {
    if (address < kLowPageLimit) return true;
    // Canonical form: bits 63..48 must replicate bit 47.
    const uint64_t top = address >> 47;
    return top != 0 && top != 0x1FFFF;
}

struct WriteTag {
    uint32_t instr = 0;
    uint64_t ts = 0;
};

struct ConcreteByte {
    uint8_t value = 0;
    std::optional<WriteTag> writer;
};

struct DynAgg {
    uint64_t occurrences = 0;
    uint64_t example_write_ts = 0;
    uint64_t example_read_ts = 0;
};

class Interpreter {
public:
    Interpreter(const Kernel& kernel, const OracleConfig& cfg) : kernel_(kernel), cfg_(cfg) {
        if (cfg.reg_init.mode == RegInit::Mode::Uniform) {
            regs_.fill(cfg.reg_init.value);
        } else {
            std::mt19937_64 rng(cfg.reg_init.value);
            for (auto& r : regs_) {
                do r = rng(); while (r < kMinDistinctValue);
            }
        }
    }

    OracleTrace run() {
        const std::size_t len = kernel_.size();
        for (uint64_t iter = 0; iter < cfg_.iterations; ++iter) {
            for (std::size_t pos = 0; pos < len; ++pos) {
                rip_ = kernel_.address_of(pos);
                execute(kernel_.instructions[pos]);
                ++ts_;
            }
        }
        OracleTrace trace;
        trace.iterations = cfg_.iterations;
        trace.reg_init = cfg_.reg_init;
        trace.suspicious_addresses = suspicious_;
        for (const auto& [key, agg] : deps_)
            trace.deps.push_back(DynDependency{key.first, key.second, agg.occurrences,
                                               agg.example_write_ts, agg.example_read_ts});
        return trace;
    }

private:
    uint64_t read_reg(const Register& reg) const {
        if (reg.is_rip()) return rip_;
        if (reg.is_vector()) return 0;
        const uint64_t v = regs_[static_cast<std::size_t>(reg.name)];
        switch (reg.byte_width()) {
            case 8: return v;
            case 4: return v & 0xFFFFFFFFu;
            case 2: return v & 0xFFFFu;
            case 1: return reg.high_byte ? (v >> 8) & 0xFF : v & 0xFF;
            default: return v;
        }
    }

    void write_reg(const Register& reg, uint64_t v) {
        if (reg.is_vector() || reg.is_rip()) return;
        uint64_t& slot = regs_[static_cast<std::size_t>(reg.name)];
        switch (reg.byte_width()) {
            case 8: slot = v; break;
            case 4: slot = v & 0xFFFFFFFFu; break;  // 32-bit writes zero-extend
            case 2: slot = (slot & ~uint64_t(0xFFFF)) | (v & 0xFFFF); break;
            case 1:
                if (reg.high_byte)
                    slot = (slot & ~uint64_t(0xFF00)) | ((v & 0xFF) << 8);
                else
                    slot = (slot & ~uint64_t(0xFF)) | (v & 0xFF);
                break;
            default: slot = v; break;
        }
    }

    uint64_t address_of(const MemOperand& mem) const {
        uint64_t address = static_cast<uint64_t>(mem.displacement);
        if (mem.base) address += mem.base->is_rip() ? rip_ : regs_[static_cast<std::size_t>(mem.base->name)];
        if (mem.index) address += regs_[static_cast<std::size_t>(mem.index->name)] * mem.scale;
        return address;
    }

    uint64_t load(uint64_t address, unsigned width, uint32_t reader) {
        if (is_suspicious(address)) ++suspicious_;
        uint64_t value = 0;
        std::set<std::pair<uint32_t, uint64_t>> sources;  // (writer instr, write ts)
        for (unsigned i = 0; i < width; ++i) {
            const auto it = memory_.find(address + i);
            const uint8_t byte = it == memory_.end() ? cfg_.mem_fill : it->second.value;
            if (i < 8) value |= static_cast<uint64_t>(byte) << (8 * i);
            if (it != memory_.end() && it->second.writer) {
                const WriteTag& tag = *it->second.writer;
                if (!cfg_.lifetime || ts_ - tag.ts <= *cfg_.lifetime)
                    sources.insert({tag.instr, tag.ts});
            }
        }
        for (const auto& [src, write_ts] : sources) {
            DynAgg& agg = deps_[{src, reader}];
            if (agg.occurrences == 0) {
                agg.example_write_ts = write_ts;
                agg.example_read_ts = ts_;
            }
            ++agg.occurrences;
        }
        return value;
    }

    void store(uint64_t address, unsigned width, uint64_t value, bool sentinel, uint32_t writer) {
        if (is_suspicious(address)) ++suspicious_;
        for (unsigned i = 0; i < width; ++i) {
            ConcreteByte& b = memory_[address + i];
            b.value = sentinel ? kOpaqueSentinelByte
                               : (i < 8 ? static_cast<uint8_t>(value >> (8 * i)) : uint8_t(0));
            b.writer = WriteTag{writer, ts_};
        }
    }

    uint64_t eval_src(const Operand& op, unsigned width, uint32_t index) {
        if (const auto* imm = std::get_if<Immediate>(&op)) return imm->value;
        if (const auto* reg = std::get_if<Register>(&op)) return read_reg(*reg);
        return load(address_of(std::get<MemOperand>(op)), width, index);
    }

    void write_dst(const Operand& op, unsigned width, uint64_t v, uint32_t index) {
        if (const auto* reg = std::get_if<Register>(&op)) {
            write_reg(*reg, v);
            return;
        }
        store(address_of(std::get<MemOperand>(op)), width, v, false, index);
    }

    static uint64_t trunc(uint64_t v, unsigned width) {
        return width >= 8 ? v : v & ((uint64_t(1) << (8 * width)) - 1);
    }

    void execute(const Instruction& instr) {
        const uint32_t index = instr.index;
        const auto& ops = instr.operands;
        const unsigned w = instr.width;
        if (instr.sem_class == SemClass::Opaque) {
            for (std::size_t i = 0; i + 1 < ops.size(); ++i)
                if (const auto* mem = std::get_if<MemOperand>(&ops[i]))
                    load(address_of(*mem), w, index);
            if (ops.empty()) return;
            const Operand& dst = ops.back();
            if (ops.size() == 1 && std::holds_alternative<Immediate>(dst)) return;
            if (const auto* reg = std::get_if<Register>(&dst)) {
                if (!reg->is_vector()) {
                    uint64_t sentinel = 0;
                    for (unsigned i = 0; i < std::min(8u, w); ++i)
                        sentinel |= uint64_t(kOpaqueSentinelByte) << (8 * i);
                    write_reg(*reg, sentinel);
                }
            } else if (const auto* mem = std::get_if<MemOperand>(&dst)) {
                store(address_of(*mem), w, 0, true, index);
            }
            return;
        }
        switch (instr.op) {
            case IntOp::Mov:
                write_dst(ops[1], w, eval_src(ops[0], w, index), index);
                break;
            case IntOp::Lea:
                write_dst(ops[1], w, trunc(address_of(std::get<MemOperand>(ops[0])), w), index);
                break;
            case IntOp::Add: case IntOp::Sub: case IntOp::And:
            case IntOp::Or:  case IntOp::Xor: {
                const uint64_t src = eval_src(ops[0], w, index);
                uint64_t dst;
                std::optional<uint64_t> address;
                if (const auto* mem = std::get_if<MemOperand>(&ops[1])) {
                    address = address_of(*mem);
                    dst = load(*address, w, index);
                } else {
                    dst = eval_src(ops[1], w, index);
                }
                uint64_t r = 0;
                switch (instr.op) {
                    case IntOp::Add: r = dst + src; break;
                    case IntOp::Sub: r = dst - src; break;
                    case IntOp::And: r = dst & src; break;
                    case IntOp::Or:  r = dst | src; break;
                    default:         r = dst ^ src; break;
                }
                if (address)
                    store(*address, w, r, false, index);
                else
                    write_dst(ops[1], w, r, index);
                break;
            }
            case IntOp::Inc: case IntOp::Dec: case IntOp::Neg: case IntOp::Not: {
                std::optional<uint64_t> address;
                uint64_t v;
                if (const auto* mem = std::get_if<MemOperand>(&ops[0])) {
                    address = address_of(*mem);
                    v = load(*address, w, index);
                } else {
                    v = eval_src(ops[0], w, index);
                }
                switch (instr.op) {
                    case IntOp::Inc: v = v + 1; break;
                    case IntOp::Dec: v = v - 1; break;
                    case IntOp::Neg: v = ~v + 1; break;
                    default:         v = ~v; break;
                }
                if (address)
                    store(*address, w, v, false, index);
                else
                    write_dst(ops[0], w, v, index);
                break;
            }
            case IntOp::Shl: case IntOp::Shr: case IntOp::Sar: {
                const uint64_t count =
                    (ops.size() == 2 ? eval_src(ops[0], 1, index) : 1) & (w == 8 ? 63 : 31);
                const Operand& dst_op = ops.back();
                std::optional<uint64_t> address;
                uint64_t v;
                if (const auto* mem = std::get_if<MemOperand>(&dst_op)) {
                    address = address_of(*mem);
                    v = load(*address, w, index);
                } else {
                    v = eval_src(dst_op, w, index);
                }
                v = trunc(v, w);
                switch (instr.op) {
                    case IntOp::Shl: v = v << count; break;
                    case IntOp::Shr: v = v >> count; break;
                    default:
                        if (w == 8)
                            v = static_cast<uint64_t>(static_cast<int64_t>(v) >> count);
                        else
                            v = static_cast<uint32_t>(
                                static_cast<int32_t>(static_cast<uint32_t>(v)) >> count);
                        break;
                }
                if (address)
                    store(*address, w, v, false, index);
                else
                    write_dst(dst_op, w, v, index);
                break;
            }
            case IntOp::Imul: {
                const uint64_t imm = eval_src(ops[0], w, index);
                const uint64_t factor = eval_src(ops[1], w, index);
                write_dst(ops.back(), w, imm * factor, index);
                break;
            }
            case IntOp::MovSx32: {
                const uint64_t v = eval_src(ops[0], 4, index);
                const int64_t wide = static_cast<int32_t>(static_cast<uint32_t>(v));
                write_dst(ops[1], 8, static_cast<uint64_t>(wide), index);
                break;
            }
            case IntOp::Compare:
                eval_src(ops[0], w, index);
                eval_src(ops[1], w, index);
                break;
            case IntOp::Nop:
                break;
        }
    }

    const Kernel& kernel_;
    const OracleConfig& cfg_;
    std::array<uint64_t, kGprCount> regs_{};
    uint64_t rip_ = 0;
    std::unordered_map<uint64_t, ConcreteByte> memory_;
    std::map<std::pair<uint32_t, uint32_t>, DynAgg> deps_;
    uint64_t ts_ = 0;
    uint64_t suspicious_ = 0;
};

}  // namespace

OracleTrace run_concrete(const Kernel& kernel, const OracleConfig& cfg) {
    if (kernel.empty()) throw EmptyKernelError();
    if (cfg.iterations == 0) throw std::invalid_argument("iterations must be >= 1");
    if (cfg.iterations > UINT64_MAX / kernel.size())
        throw std::overflow_error("iteration count overflows the timestamp counter");
    return Interpreter(kernel, cfg).run();
}

std::string to_string(const RegInit& init) {
    if (init.mode == RegInit::Mode::Uniform) return fmt::format("uniform:{:#x}", init.value);
    return fmt::format("distinct:{}", init.value);
}

std::string to_json(const OracleTrace& trace) {
    nlohmann::ordered_json j;
    j["iterations"] = trace.iterations;
    j["reg_init"] = to_string(trace.reg_init);
    auto& deps = j["deps"] = nlohmann::ordered_json::array();
    for (const auto& d : trace.deps)
        deps.push_back(nlohmann::ordered_json{{"src", d.src}, {"dst", d.dst}, {"rho", d.occurrences}});
    j["suspicious_addresses"] = trace.suspicious_addresses;
    return j.dump();
}

CoverageReport coverage(const DepReport& statics, const std::vector<DynDependency>& dynamics) {
    if (dynamics.empty()) throw UndefinedCoverageError();
    CoverageReport report;
    uint64_t rho_found = 0, rho_total = 0;
    for (const auto& dyn : dynamics) {
        const bool found = std::any_of(
            statics.deps.begin(), statics.deps.end(),
            [&dyn](const Dependency& d) { return d.src == dyn.src && d.dst == dyn.dst; });
        report.classification.push_back({dyn, found});
        rho_total += dyn.occurrences;
        if (found) {
            ++report.found;
            rho_found += dyn.occurrences;
        } else {
            ++report.missed;
        }
    }
    report.cov_u = static_cast<double>(report.found) /
                   static_cast<double>(report.found + report.missed);
    report.cov_w = rho_total == 0 ? 0.0
                                  : static_cast<double>(rho_found) / static_cast<double>(rho_total);
    return report;
}

}  // namespace staticdeps
