#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "staticdeps/errors.hpp"

namespace staticdeps {

/// Canonical register names. Sub-width aliases (eax, ax, al, ...) resolve to
/// their 64-bit parent at parse time; only canonical names exist past that.
enum class Reg : uint8_t {
    Rax, Rbx, Rcx, Rdx, Rsi, Rdi, Rbp, Rsp,
    R8, R9, R10, R11, R12, R13, R14, R15,
    Rip,
    Xmm0, Xmm1, Xmm2, Xmm3, Xmm4, Xmm5, Xmm6, Xmm7,
    Xmm8, Xmm9, Xmm10, Xmm11, Xmm12, Xmm13, Xmm14, Xmm15,
    Ymm0, Ymm1, Ymm2, Ymm3, Ymm4, Ymm5, Ymm6, Ymm7,
    Ymm8, Ymm9, Ymm10, Ymm11, Ymm12, Ymm13, Ymm14, Ymm15,
};

inline constexpr std::size_t kGprCount = 16;

enum class RegClass : uint8_t { Gpr64, Alias32, Alias16, Alias8, Vector };

struct Register {
    Reg name = Reg::Rax;
    RegClass cls = RegClass::Gpr64;
    bool high_byte = false;  // ah/bh/ch/dh

    bool is_gpr() const { return static_cast<uint8_t>(name) < kGprCount; }
    bool is_rip() const { return name == Reg::Rip; }
    bool is_vector() const { return cls == RegClass::Vector; }

    /// Access width in bytes implied by the alias class.
    unsigned byte_width() const;

    friend bool operator==(const Register&, const Register&) = default;
};

/// Canonical 64-bit spelling of a register name ("rax", "rip", "xmm3").
std::string_view reg_name(Reg r);

/// Alias spelling, without the leading '%' ("eax" for (rax, Alias32)).
std::string register_spelling(const Register& r);

/// Immediates keep the raw two's-complement bit pattern.
struct Immediate {
    uint64_t value = 0;

    friend bool operator==(const Immediate&, const Immediate&) = default;
};

struct MemOperand {
    int64_t displacement = 0;
    std::optional<Register> base;
    std::optional<Register> index;
    uint8_t scale = 1;  // defaults to 1 when index absent
    bool rip_relative = false;

    friend bool operator==(const MemOperand&, const MemOperand&) = default;
};

using Operand = std::variant<Immediate, Register, MemOperand>;

struct RegAccess {
    Register reg;
    unsigned width = 8;

    friend bool operator==(const RegAccess&, const RegAccess&) = default;
};

struct MemAccess {
    MemOperand operand;
    unsigned width = 8;

    friend bool operator==(const MemAccess&, const MemAccess&) = default;
};

using Access = std::variant<RegAccess, MemAccess>;

enum class SemClass : uint8_t { SupportedInteger, Opaque };

/// Integer operations with exact value semantics. Everything else is Opaque.
enum class IntOp : uint8_t {
    Mov,      // mov, movabs
    Lea,
    Add, Sub, And, Or, Xor,
    Inc, Dec, Neg, Not,
    Shl, Shr, Sar,
    Imul,     // immediate forms only
    MovSx32,  // movslq / movsxd
    Compare,  // test/cmp: reads only, flags unmodeled
    Nop,
};

struct Instruction {
    uint32_t index = 0;
    std::string mnemonic;
    std::vector<Operand> operands;  // AT&T order, destination last
    SemClass sem_class = SemClass::Opaque;
    IntOp op = IntOp::Nop;     // meaningful when sem_class == SupportedInteger
    unsigned width = 8;        // destination width in bytes
    std::vector<Access> reads;
    std::vector<Access> writes;

    bool has_memory_read() const;
    bool has_memory_write() const;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct AccessLists {
    std::vector<Access> reads;
    std::vector<Access> writes;
};

/// The derived access lists of an instruction; idempotent.
AccessLists access_descriptors(const Instruction& instr);

inline constexpr uint64_t kDefaultBaseAddress = 0x400000;
inline constexpr uint32_t kSyntheticInstructionSize = 16;

struct Kernel {
    std::vector<Instruction> instructions;
    std::vector<std::string> source_text;  // one retained line per instruction
    uint64_t synthetic_base_address = kDefaultBaseAddress;
    std::vector<uint32_t> instruction_byte_sizes;

    std::size_t size() const { return instructions.size(); }
    bool empty() const { return instructions.empty(); }

    /// Synthetic address of instruction i (fixed-size encoding).
    uint64_t address_of(std::size_t i) const {
        return synthetic_base_address + kSyntheticInstructionSize * static_cast<uint64_t>(i);
    }
};

/// Parse the documented AT&T-syntax subset, one instruction per line.
/// Blank lines and '#' comments are skipped. Unknown mnemonics are accepted
/// and classified Opaque; control-flow mnemonics raise ParseError.
Kernel parse_kernel(std::string_view text, uint64_t base_address = kDefaultBaseAddress);

std::string to_string(const MemOperand& mem);
std::string to_string(const Operand& op);
std::string to_string(const Instruction& instr);

/// Canonical serialization; parse_kernel(to_string(k)) reproduces the structure.
std::string to_string(const Kernel& kernel);

/// Structural equality: instruction streams and layout, ignoring retained text.
bool same_structure(const Kernel& a, const Kernel& b);

}  // namespace staticdeps
