#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "staticdeps/kernel.hpp"

namespace staticdeps {

/// Element of the analysis value domain: a known 64-bit value or Bottom,
/// the absorbing "not valid pointer arithmetic" element.
class AbstractValue {
public:
    constexpr AbstractValue() = default;

    static constexpr AbstractValue bottom() { return AbstractValue(); }
    static constexpr AbstractValue known(uint64_t v) { return AbstractValue(true, v); }

    constexpr bool is_known() const { return known_; }
    constexpr bool is_bottom() const { return !known_; }
    constexpr uint64_t value() const { return value_; }

    friend constexpr bool operator==(const AbstractValue&, const AbstractValue&) = default;

private:
    constexpr AbstractValue(bool known, uint64_t value) : known_(known), value_(value) {}

    bool known_ = false;
    uint64_t value_ = 0;
};

/// Source of fresh shadow values. Virtual so tests can inject collisions.
class FreshSource {
public:
    virtual ~FreshSource() = default;
    virtual uint64_t next() = 0;
};

/// mt19937_64 draws are uniform over [0, 2^64) and reproducible everywhere.
class SeededFresh final : public FreshSource {
public:
    explicit SeededFresh(uint64_t seed) : rng_(seed) {}
    uint64_t next() override { return rng_(); }

private:
    std::mt19937_64 rng_;
};

/// A fresh Known value, uniformly sampled; never Bottom.
AbstractValue fresh_value(FreshSource& fresh);

/// Shadow register file over the 16 canonical GPRs. Registers start unset
/// and materialize a fresh value on first read. Vector registers are not
/// represented (reads of them are Bottom by convention).
class ShadowRegFile {
public:
    AbstractValue read(Reg r, FreshSource& fresh);
    void write(Reg r, AbstractValue v);
    std::optional<AbstractValue> peek(Reg r) const;

    void set_rip(uint64_t address) { rip_ = address; }
    uint64_t rip() const { return rip_; }

private:
    std::array<std::optional<AbstractValue>, kGprCount> gprs_;
    uint64_t rip_ = 0;
};

/// One shadow byte: value (Known 8-bit or Bottom) plus last-writer tag.
/// Absent map entries mean the address was never accessed.
struct ShadowByte {
    std::optional<uint8_t> value;        // nullopt = Bottom
    std::optional<uint64_t> last_writer; // unrolled instruction id; stores only
};

class ShadowMemory {
public:
    using Map = std::unordered_map<uint64_t, ShadowByte>;

    const ShadowByte* find(uint64_t address) const;
    Map& bytes() { return bytes_; }
    const Map& bytes() const { return bytes_; }

    uint64_t dropped_bottom_stores() const { return dropped_bottom_stores_; }
    void count_dropped_bottom_store() { ++dropped_bottom_stores_; }

private:
    Map bytes_;
    uint64_t dropped_bottom_stores_ = 0;
};

struct LoadEvent {
    uint64_t unrolled_id = 0;
    AbstractValue address;
    unsigned width = 0;
    std::vector<uint64_t> last_writers;  // distinct, sorted; empty for Bottom addresses
};

struct StoreEvent {
    uint64_t unrolled_id = 0;
    AbstractValue address;
    unsigned width = 0;
};

struct StepEvents {
    std::vector<LoadEvent> loads;
    std::vector<StoreEvent> stores;
};

/// disp + base + index*scale with 64-bit wrap-around; Bottom absorbs.
/// rip-relative operands resolve against regs.rip().
AbstractValue eval_address(const MemOperand& mem, ShadowRegFile& regs, FreshSource& fresh);

/// Execute one instruction against the shadow state, appending the memory
/// events it produced. regs.rip() must hold the instruction's synthetic
/// address on entry; it advances past the instruction on exit.
void step(ShadowRegFile& regs, ShadowMemory& mem, const Instruction& instr,
          uint64_t unrolled_id, FreshSource& fresh, StepEvents& events);

}  // namespace staticdeps
