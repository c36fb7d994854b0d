#include "staticdeps/shadow.hpp"

#include <algorithm>

namespace staticdeps {

AbstractValue fresh_value(FreshSource& fresh) { return AbstractValue::known(fresh.next()); }

AbstractValue ShadowRegFile::read(Reg r, FreshSource& fresh) {
    if (r == Reg::Rip) return AbstractValue::known(rip_);
    const auto i = static_cast<std::size_t>(r);
    if (i >= kGprCount) return AbstractValue::bottom();  // vector registers
    if (!gprs_[i]) gprs_[i] = fresh_value(fresh);
    return *gprs_[i];
}

void ShadowRegFile::write(Reg r, AbstractValue v) {
    const auto i = static_cast<std::size_t>(r);
    if (i < kGprCount) gprs_[i] = v;
}

std::optional<AbstractValue> ShadowRegFile::peek(Reg r) const {
    const auto i = static_cast<std::size_t>(r);
    return i < kGprCount ? gprs_[i] : std::nullopt;
}

const ShadowByte* ShadowMemory::find(uint64_t address) const {
    const auto it = bytes_.find(address);
    return it == bytes_.end() ? nullptr : &it->second;
}

AbstractValue eval_address(const MemOperand& mem, ShadowRegFile& regs, FreshSource& fresh) {
    uint64_t address = static_cast<uint64_t>(mem.displacement);
    if (mem.base) {
        const AbstractValue b = regs.read(mem.base->name, fresh);
        if (b.is_bottom()) {
            if (mem.index) regs.read(mem.index->name, fresh);  // still counts as a read
            return AbstractValue::bottom();
        }
        address += b.value();
    }
    if (mem.index) {
        const AbstractValue x = regs.read(mem.index->name, fresh);
        if (x.is_bottom()) return AbstractValue::bottom();
        address += x.value() * mem.scale;
    }
    return AbstractValue::known(address);
}

namespace {

uint64_t truncate(uint64_t v, unsigned width) {
    return width >= 8 ? v : v & ((uint64_t(1) << (8 * width)) - 1);
}

/// Loads `width` bytes at `address`. Any absent or Bottom byte causes the
/// whole span to be refilled from fresh values (writer tags untouched); the
/// returned value is the little-endian reassembly of the low 8 covered bytes.
AbstractValue shadow_load(ShadowMemory& mem, uint64_t address, unsigned width,
                          FreshSource& fresh, std::vector<uint64_t>& writers) {
    auto& bytes = mem.bytes();
    bool needs_fill = false;
    for (unsigned i = 0; i < width; ++i) {
        const auto it = bytes.find(address + i);
        if (it == bytes.end() || !it->second.value) {
            needs_fill = true;
            break;
        }
    }
    if (needs_fill) {
        for (unsigned chunk = 0; chunk < width; chunk += 8) {
            const uint64_t v = fresh.next();
            for (unsigned i = chunk; i < std::min(width, chunk + 8); ++i)
                bytes[address + i].value = static_cast<uint8_t>(v >> (8 * (i - chunk)));
        }
    }
    uint64_t value = 0;
    for (unsigned i = 0; i < width; ++i) {
        const ShadowByte& b = bytes[address + i];
        if (i < 8) value |= static_cast<uint64_t>(*b.value) << (8 * i);
        if (b.last_writer) writers.push_back(*b.last_writer);
    }
    std::sort(writers.begin(), writers.end());
    writers.erase(std::unique(writers.begin(), writers.end()), writers.end());
    return AbstractValue::known(value);
}

void shadow_store(ShadowMemory& mem, uint64_t address, unsigned width, AbstractValue data,
                  uint64_t unrolled_id) {
    auto& bytes = mem.bytes();
    for (unsigned i = 0; i < width; ++i) {
        ShadowByte& b = bytes[address + i];
        if (data.is_known() && i < 8)
            b.value = static_cast<uint8_t>(data.value() >> (8 * i));
        else
            b.value = std::nullopt;
        b.last_writer = unrolled_id;
    }
}

class Stepper {
public:
    Stepper(ShadowRegFile& regs, ShadowMemory& mem, const Instruction& instr,
            uint64_t unrolled_id, FreshSource& fresh, StepEvents& events)
        : regs_(regs), mem_(mem), instr_(instr), uid_(unrolled_id), fresh_(fresh),
          events_(events) {}

    void run() {
        if (instr_.sem_class == SemClass::SupportedInteger)
            run_integer();
        else
            run_opaque();
        regs_.set_rip(regs_.rip() + kSyntheticInstructionSize);
    }

private:
    AbstractValue load(const MemOperand& mem_op, unsigned width) {
        const AbstractValue address = eval_address(mem_op, regs_, fresh_);
        LoadEvent ev{uid_, address, width, {}};
        AbstractValue result = AbstractValue::bottom();
        if (address.is_known())
            result = shadow_load(mem_, address.value(), width, fresh_, ev.last_writers);
        events_.loads.push_back(std::move(ev));
        return result;
    }

    void store(const MemOperand& mem_op, unsigned width, AbstractValue data) {
        store_at(eval_address(mem_op, regs_, fresh_), width, data);
    }

    void store_at(AbstractValue address, unsigned width, AbstractValue data) {
        events_.stores.push_back(StoreEvent{uid_, address, width});
        if (address.is_known())
            shadow_store(mem_, address.value(), width, data, uid_);
        else
            mem_.count_dropped_bottom_store();
    }

    AbstractValue read_reg(const Register& reg) {
        if (reg.is_vector()) return AbstractValue::bottom();
        const AbstractValue v = regs_.read(reg.name, fresh_);
        if (v.is_bottom()) return v;
        return AbstractValue::known(truncate(v.value(), reg.byte_width()));
    }

    // Width-w source value: immediates pass through, sub-width register
    // reads truncate, memory reads load.
    AbstractValue eval_src(const Operand& op, unsigned width) {
        if (const auto* imm = std::get_if<Immediate>(&op)) return AbstractValue::known(imm->value);
        if (const auto* reg = std::get_if<Register>(&op)) return read_reg(*reg);
        return load(std::get<MemOperand>(op), width);
    }

    // Destination write. 32-bit register results zero-extend; 8/16-bit
    // register writes poison the canonical register.
    void write_dst(const Operand& op, unsigned width, AbstractValue v,
                   std::optional<AbstractValue> precomputed_address = std::nullopt) {
        if (const auto* reg = std::get_if<Register>(&op)) {
            if (reg->is_vector()) return;
            switch (reg->byte_width()) {
                case 8: regs_.write(reg->name, v); break;
                case 4:
                    regs_.write(reg->name, v.is_known()
                                               ? AbstractValue::known(truncate(v.value(), 4))
                                               : v);
                    break;
                default: regs_.write(reg->name, AbstractValue::bottom()); break;
            }
            return;
        }
        const auto& mem_op = std::get<MemOperand>(op);
        if (precomputed_address)
            store_at(*precomputed_address, width, v);
        else
            store(mem_op, width, v);
    }

    static AbstractValue binary(IntOp op, AbstractValue a, AbstractValue b) {
        if (a.is_bottom() || b.is_bottom()) return AbstractValue::bottom();
        const uint64_t x = a.value(), y = b.value();
        switch (op) {
            case IntOp::Add: return AbstractValue::known(x + y);
            case IntOp::Sub: return AbstractValue::known(x - y);
            case IntOp::And: return AbstractValue::known(x & y);
            case IntOp::Or: return AbstractValue::known(x | y);
            case IntOp::Xor: return AbstractValue::known(x ^ y);
            case IntOp::Imul: return AbstractValue::known(x * y);
            default: return AbstractValue::bottom();
        }
    }

    AbstractValue shift(IntOp op, AbstractValue v, AbstractValue count, unsigned width) {
        if (v.is_bottom() || count.is_bottom()) return AbstractValue::bottom();
        const unsigned mask = width == 8 ? 63 : 31;
        const unsigned n = static_cast<unsigned>(count.value() & 0xFF) & mask;
        const uint64_t x = truncate(v.value(), width);
        switch (op) {
            case IntOp::Shl: return AbstractValue::known(x << n);
            case IntOp::Shr: return AbstractValue::known(x >> n);
            case IntOp::Sar: {
                if (width == 8) return AbstractValue::known(static_cast<uint64_t>(static_cast<int64_t>(x) >> n));
                const int32_t s = static_cast<int32_t>(static_cast<uint32_t>(x));
                return AbstractValue::known(static_cast<uint64_t>(static_cast<uint32_t>(s >> n)));
            }
            default: return AbstractValue::bottom();
        }
    }

    void run_integer() {
        const auto& ops = instr_.operands;
        const unsigned w = instr_.width;
        switch (instr_.op) {
            case IntOp::Mov:
                write_dst(ops[1], w, eval_src(ops[0], w));
                break;
            case IntOp::Lea:
                write_dst(ops[1], w, eval_address(std::get<MemOperand>(ops[0]), regs_, fresh_));
                break;
            case IntOp::Add: case IntOp::Sub: case IntOp::And:
            case IntOp::Or:  case IntOp::Xor: {
                const AbstractValue src = eval_src(ops[0], w);
                // Evaluate a memory destination's address once for both halves
                // of the read-modify-write.
                if (const auto* mem_op = std::get_if<MemOperand>(&ops[1])) {
                    const AbstractValue address = eval_address(*mem_op, regs_, fresh_);
                    LoadEvent ev{uid_, address, w, {}};
                    AbstractValue dst = AbstractValue::bottom();
                    if (address.is_known())
                        dst = shadow_load(mem_, address.value(), w, fresh_, ev.last_writers);
                    events_.loads.push_back(std::move(ev));
                    store_at(address, w, binary(instr_.op, dst, src));
                } else {
                    const AbstractValue dst = eval_src(ops[1], w);
                    write_dst(ops[1], w, binary(instr_.op, dst, src));
                }
                break;
            }
            case IntOp::Inc: case IntOp::Dec: case IntOp::Neg: case IntOp::Not:
                run_unary();
                break;
            case IntOp::Shl: case IntOp::Shr: case IntOp::Sar: {
                const AbstractValue count =
                    ops.size() == 2 ? eval_src(ops[0], 1) : AbstractValue::known(1);
                const Operand& dst_op = ops.back();
                if (const auto* mem_op = std::get_if<MemOperand>(&dst_op)) {
                    const AbstractValue address = eval_address(*mem_op, regs_, fresh_);
                    LoadEvent ev{uid_, address, w, {}};
                    AbstractValue dst = AbstractValue::bottom();
                    if (address.is_known())
                        dst = shadow_load(mem_, address.value(), w, fresh_, ev.last_writers);
                    events_.loads.push_back(std::move(ev));
                    store_at(address, w, shift(instr_.op, dst, count, w));
                } else {
                    const AbstractValue dst = eval_src(dst_op, w);
                    write_dst(dst_op, w, shift(instr_.op, dst, count, w));
                }
                break;
            }
            case IntOp::Imul: {
                // 2-op form multiplies the destination, 3-op form the middle
                // operand; either way the factor is operand 1.
                const AbstractValue imm = eval_src(ops[0], w);
                const AbstractValue factor = eval_src(ops[1], w);
                write_dst(ops.back(), w, binary(IntOp::Imul, imm, factor));
                break;
            }
            case IntOp::MovSx32: {
                const AbstractValue src = eval_src(ops[0], 4);
                if (src.is_bottom()) {
                    write_dst(ops[1], 8, src);
                } else {
                    const int64_t wide = static_cast<int32_t>(static_cast<uint32_t>(src.value()));
                    write_dst(ops[1], 8, AbstractValue::known(static_cast<uint64_t>(wide)));
                }
                break;
            }
            case IntOp::Compare:
                eval_src(ops[0], w);
                eval_src(ops[1], w);
                break;
            case IntOp::Nop:
                break;
        }
    }

    void run_unary() {
        const unsigned w = instr_.width;
        const Operand& op = instr_.operands[0];
        const auto apply = [&](AbstractValue v) {
            if (v.is_bottom()) return v;
            const uint64_t x = v.value();
            switch (instr_.op) {
                case IntOp::Inc: return AbstractValue::known(x + 1);
                case IntOp::Dec: return AbstractValue::known(x - 1);
                case IntOp::Neg: return AbstractValue::known(~x + 1);
                case IntOp::Not: return AbstractValue::known(~x);
                default: return AbstractValue::bottom();
            }
        };
        if (const auto* mem_op = std::get_if<MemOperand>(&op)) {
            const AbstractValue address = eval_address(*mem_op, regs_, fresh_);
            LoadEvent ev{uid_, address, w, {}};
            AbstractValue v = AbstractValue::bottom();
            if (address.is_known())
                v = shadow_load(mem_, address.value(), w, fresh_, ev.last_writers);
            events_.loads.push_back(std::move(ev));
            store_at(address, w, apply(v));
        } else {
            write_dst(op, w, apply(eval_src(op, w)));
        }
    }

    void run_opaque() {
        const auto& ops = instr_.operands;
        if (ops.empty()) return;
        for (std::size_t i = 0; i + 1 < ops.size(); ++i) {
            if (const auto* reg = std::get_if<Register>(&ops[i])) {
                read_reg(*reg);
            } else if (const auto* mem_op = std::get_if<MemOperand>(&ops[i])) {
                load(*mem_op, instr_.width);
            }
        }
        const Operand& dst = ops.back();
        if (ops.size() == 1 && std::holds_alternative<Immediate>(dst)) return;
        if (const auto* reg = std::get_if<Register>(&dst)) {
            if (!reg->is_vector()) regs_.write(reg->name, AbstractValue::bottom());
        } else if (const auto* mem_op = std::get_if<MemOperand>(&dst)) {
            store(*mem_op, instr_.width, AbstractValue::bottom());
        }
    }

    ShadowRegFile& regs_;
    ShadowMemory& mem_;
    const Instruction& instr_;
    uint64_t uid_;
    FreshSource& fresh_;
    StepEvents& events_;
};

}  // namespace

void step(ShadowRegFile& regs, ShadowMemory& mem, const Instruction& instr,
          uint64_t unrolled_id, FreshSource& fresh, StepEvents& events) {
    Stepper(regs, mem, instr, unrolled_id, fresh, events).run();
}

}  // namespace staticdeps
