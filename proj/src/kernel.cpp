#include "staticdeps/kernel.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>
#include <unordered_map>

namespace staticdeps {

namespace {

constexpr std::array<std::string_view, 17> kCanonicalNames = {
    "rax", "rbx", "rcx", "rdx", "rsi", "rdi", "rbp", "rsp",
    "r8",  "r9",  "r10", "r11", "r12", "r13", "r14", "r15", "rip",
};

struct RegSpelling {
    Reg name;
    RegClass cls;
    bool high_byte;
};

const std::unordered_map<std::string_view, RegSpelling>& spelling_table() {
    static const auto* table = [] {
        auto* t = new std::unordered_map<std::string_view, RegSpelling>;
        constexpr std::array<std::string_view, 16> n64 = {
            "rax", "rbx", "rcx", "rdx", "rsi", "rdi", "rbp", "rsp",
            "r8",  "r9",  "r10", "r11", "r12", "r13", "r14", "r15"};
        constexpr std::array<std::string_view, 16> n32 = {
            "eax", "ebx", "ecx", "edx", "esi", "edi", "ebp", "esp",
            "r8d", "r9d", "r10d", "r11d", "r12d", "r13d", "r14d", "r15d"};
        constexpr std::array<std::string_view, 16> n16 = {
            "ax", "bx", "cx", "dx", "si", "di", "bp", "sp",
            "r8w", "r9w", "r10w", "r11w", "r12w", "r13w", "r14w", "r15w"};
        constexpr std::array<std::string_view, 16> n8 = {
            "al", "bl", "cl", "dl", "sil", "dil", "bpl", "spl",
            "r8b", "r9b", "r10b", "r11b", "r12b", "r13b", "r14b", "r15b"};
        for (std::size_t i = 0; i < 16; ++i) {
            const Reg r = static_cast<Reg>(i);
            (*t)[n64[i]] = {r, RegClass::Gpr64, false};
            (*t)[n32[i]] = {r, RegClass::Alias32, false};
            (*t)[n16[i]] = {r, RegClass::Alias16, false};
            (*t)[n8[i]] = {r, RegClass::Alias8, false};
        }
        (*t)["ah"] = {Reg::Rax, RegClass::Alias8, true};
        (*t)["bh"] = {Reg::Rbx, RegClass::Alias8, true};
        (*t)["ch"] = {Reg::Rcx, RegClass::Alias8, true};
        (*t)["dh"] = {Reg::Rdx, RegClass::Alias8, true};
        (*t)["rip"] = {Reg::Rip, RegClass::Gpr64, false};
        static auto* vec_storage = new std::array<std::string, 32>;
        for (std::size_t i = 0; i < 16; ++i) {
            (*vec_storage)[i] = "xmm" + std::to_string(i);
            (*vec_storage)[16 + i] = "ymm" + std::to_string(i);
            (*t)[(*vec_storage)[i]] = {static_cast<Reg>(static_cast<std::size_t>(Reg::Xmm0) + i),
                                       RegClass::Vector, false};
            (*t)[(*vec_storage)[16 + i]] = {static_cast<Reg>(static_cast<std::size_t>(Reg::Ymm0) + i),
                                            RegClass::Vector, false};
        }
        return t;
    }();
    return *table;
}

struct IntOpInfo {
    IntOp op;
    // 0 = width comes from operands / suffix.
    unsigned fixed_width;
};

const std::map<std::string_view, IntOpInfo>& integer_table() {
    static const std::map<std::string_view, IntOpInfo> table = {
        {"mov", {IntOp::Mov, 0}},    {"movabs", {IntOp::Mov, 8}},
        {"lea", {IntOp::Lea, 0}},    {"add", {IntOp::Add, 0}},
        {"sub", {IntOp::Sub, 0}},    {"and", {IntOp::And, 0}},
        {"or", {IntOp::Or, 0}},      {"xor", {IntOp::Xor, 0}},
        {"inc", {IntOp::Inc, 0}},    {"dec", {IntOp::Dec, 0}},
        {"neg", {IntOp::Neg, 0}},    {"not", {IntOp::Not, 0}},
        {"shl", {IntOp::Shl, 0}},    {"sal", {IntOp::Shl, 0}},
        {"shr", {IntOp::Shr, 0}},    {"sar", {IntOp::Sar, 0}},
        {"imul", {IntOp::Imul, 0}},  {"movslq", {IntOp::MovSx32, 8}},
        {"movsxd", {IntOp::MovSx32, 8}},
        {"test", {IntOp::Compare, 0}}, {"cmp", {IntOp::Compare, 0}},
        {"nop", {IntOp::Nop, 0}},
    };
    return table;
}

// Scalar FP forms with a fixed memory access width.
const std::map<std::string_view, unsigned>& vector_width_table() {
    static const std::map<std::string_view, unsigned> table = {
        {"movss", 4},  {"vmovss", 4},  {"movsd", 8},  {"vmovsd", 8},
        {"mulsd", 8},  {"vmulsd", 8},  {"addsd", 8},  {"vaddsd", 8},
        {"subsd", 8},  {"vsubsd", 8},  {"divsd", 8},  {"vdivsd", 8},
        {"mulss", 4},  {"vmulss", 4},  {"addss", 4},  {"vaddss", 4},
        {"subss", 4},  {"vsubss", 4},  {"divss", 4},  {"vdivss", 4},
    };
    return table;
}

bool is_full_vector_move(std::string_view m) {
    static constexpr std::array<std::string_view, 8> names = {
        "movaps", "movups", "movdqa", "movdqu",
        "vmovaps", "vmovups", "vmovdqa", "vmovdqu"};
    return std::find(names.begin(), names.end(), m) != names.end();
}

bool is_control_flow(std::string_view m) {
    if (!m.empty() && m.front() == 'j') return true;  // jmp and every jcc
    static constexpr std::array<std::string_view, 10> names = {
        "call", "callq", "ret", "retq", "loop", "loope",
        "loopne", "syscall", "sysret", "int3"};
    return std::find(names.begin(), names.end(), m) != names.end() || m == "int";
}

std::optional<unsigned> suffix_width(char c) {
    switch (c) {
        case 'q': return 8;
        case 'l': return 4;
        case 'w': return 2;
        case 'b': return 1;
        default: return std::nullopt;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

class LineParser {
public:
    LineParser(std::string_view text, std::size_t line_no) : text_(text), line_(line_no) {}

    [[noreturn]] void fail(const std::string& reason) const { throw ParseError(line_, reason); }

    // Accepts decimal and 0x-prefixed hex, optional sign; returns the raw bits.
    uint64_t parse_integer(std::string_view tok) const {
        tok = trim(tok);
        if (tok.empty()) fail("expected integer");
        bool negative = false;
        if (tok.front() == '-' || tok.front() == '+') {
            negative = tok.front() == '-';
            tok.remove_prefix(1);
        }
        int base = 10;
        if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
            base = 16;
            tok.remove_prefix(2);
        }
        if (tok.empty()) fail("expected digits after sign or base prefix");
        uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value, base);
        if (ec == std::errc::result_out_of_range) fail("integer literal out of 64-bit range");
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            fail("malformed integer literal '" + std::string(tok) + "'");
        return negative ? ~value + 1 : value;
    }

    Register parse_register(std::string_view tok, bool in_address) const {
        tok = trim(tok);
        if (tok.empty() || tok.front() != '%') fail("expected register, got '" + std::string(tok) + "'");
        tok.remove_prefix(1);
        const auto& table = spelling_table();
        const auto it = table.find(tok);
        if (it == table.end()) fail("unknown register '%" + std::string(tok) + "'");
        const Register reg{it->second.name, it->second.cls, it->second.high_byte};
        if (in_address && reg.is_vector()) fail("vector register '%" + std::string(tok) + "' in address expression");
        return reg;
    }

    MemOperand parse_memory(std::string_view tok) const {
        const std::size_t open = tok.find('(');
        if (open == std::string_view::npos)
            fail("malformed operand '" + std::string(tok) + "' (expected '$imm', '%reg' or displacement(...))");
        if (tok.back() != ')') fail("missing ')' in memory operand");
        MemOperand mem;
        const std::string_view disp = trim(tok.substr(0, open));
        if (!disp.empty()) mem.displacement = static_cast<int64_t>(parse_integer(disp));
        const std::string_view inner = tok.substr(open + 1, tok.size() - open - 2);
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= inner.size(); ++i) {
            if (i == inner.size() || inner[i] == ',') {
                parts.push_back(trim(inner.substr(start, i - start)));
                start = i + 1;
            }
        }
        if (parts.size() > 3) fail("too many components in memory operand");
        if (parts.size() == 1 && parts[0].empty()) fail("empty memory operand '()'");
        if (!parts[0].empty()) mem.base = parse_register(parts[0], true);
        if (parts.size() >= 2) {
            if (parts[1].empty()) fail("missing index register in memory operand");
            mem.index = parse_register(parts[1], true);
            if (mem.index->is_rip()) fail("rip cannot be an index register");
        }
        if (parts.size() == 3) {
            const uint64_t s = parse_integer(parts[2]);
            if (s != 1 && s != 2 && s != 4 && s != 8) fail("scale must be 1, 2, 4 or 8");
            mem.scale = static_cast<uint8_t>(s);
        }
        if (mem.base && mem.base->is_rip()) {
            if (mem.index) fail("rip-relative operand cannot carry an index");
            mem.rip_relative = true;
        }
        return mem;
    }

    Operand parse_operand(std::string_view tok) const {
        tok = trim(tok);
        if (tok.empty()) fail("empty operand");
        if (tok.front() == '$') return Immediate{parse_integer(tok.substr(1))};
        if (tok.front() == '%') return parse_register(tok, false);
        return parse_memory(tok);
    }

private:
    std::string_view text_;
    std::size_t line_;
};

bool has_vector_operand(const std::vector<Operand>& ops) {
    for (const auto& op : ops)
        if (const auto* reg = std::get_if<Register>(&op); reg && reg->is_vector()) return true;
    return false;
}

const Register* as_reg(const Operand& op) { return std::get_if<Register>(&op); }
const MemOperand* as_mem(const Operand& op) { return std::get_if<MemOperand>(&op); }
const Immediate* as_imm(const Operand& op) { return std::get_if<Immediate>(&op); }

// Looks up the integer table for the mnemonic, trying an exact match before
// stripping a q/l/w/b width suffix.
struct IntLookup {
    IntOpInfo info;
    std::optional<unsigned> width;
};

std::optional<IntLookup> lookup_integer(std::string_view m) {
    const auto& table = integer_table();
    if (const auto it = table.find(m); it != table.end()) {
        std::optional<unsigned> w;
        if (it->second.fixed_width) w = it->second.fixed_width;
        return IntLookup{it->second, w};
    }
    if (m.size() > 1) {
        if (const auto w = suffix_width(m.back())) {
            const auto it = table.find(m.substr(0, m.size() - 1));
            if (it != table.end()) {
                std::optional<unsigned> width = w;
                if (it->second.fixed_width) width = it->second.fixed_width;
                return IntLookup{it->second, width};
            }
        }
    }
    return std::nullopt;
}

unsigned first_gpr_width(const std::vector<Operand>& ops) {
    for (const auto& op : ops)
        if (const auto* reg = as_reg(op); reg && reg->is_gpr()) return reg->byte_width();
    return 8;
}

// Memory access width for an instruction that was not classified as a
// supported integer op.
unsigned opaque_mem_width(std::string_view m, const std::vector<Operand>& ops) {
    const auto& scalar = vector_width_table();
    if (const auto it = scalar.find(m); it != scalar.end()) return it->second;
    if (m.size() > 6 && m.ends_with("sd")) return 8;  // vfmadd231sd and friends
    if (m.size() > 6 && m.ends_with("ss")) return 4;
    if (const auto lk = lookup_integer(m); lk && lk->width) return *lk->width;  // movq %xmm0, (%rax)
    bool xmm = false, ymm = false;
    for (const auto& op : ops) {
        if (const auto* reg = as_reg(op); reg && reg->is_vector()) {
            if (static_cast<uint8_t>(reg->name) >= static_cast<uint8_t>(Reg::Ymm0)) ymm = true;
            else xmm = true;
        }
    }
    if (is_full_vector_move(m) || ymm || xmm) return ymm ? 32 : 16;
    if (m.size() > 1) {
        if (const auto w = suffix_width(m.back())) return *w;
    }
    return first_gpr_width(ops);
}

// Validates the operand shape of a supported integer op. A mismatch demotes
// the instruction to Opaque rather than rejecting it.
bool shape_matches(IntOp op, const std::vector<Operand>& ops) {
    const auto writable = [](const Operand& o) { return as_reg(o) || as_mem(o); };
    switch (op) {
        case IntOp::Mov:
            return ops.size() == 2 && writable(ops[1]);
        case IntOp::Lea:
            return ops.size() == 2 && as_mem(ops[0]) && as_reg(ops[1]) && as_reg(ops[1])->is_gpr();
        case IntOp::Add: case IntOp::Sub: case IntOp::And:
        case IntOp::Or:  case IntOp::Xor:
            return ops.size() == 2 && writable(ops[1]);
        case IntOp::Inc: case IntOp::Dec: case IntOp::Neg: case IntOp::Not:
            return ops.size() == 1 && writable(ops[0]);
        case IntOp::Shl: case IntOp::Shr: case IntOp::Sar: {
            if (ops.size() == 1) return writable(ops[0]);
            if (ops.size() != 2 || !writable(ops[1])) return false;
            if (as_imm(ops[0])) return true;
            const auto* count = as_reg(ops[0]);
            return count && count->name == Reg::Rcx && count->cls == RegClass::Alias8 &&
                   !count->high_byte;  // %cl
        }
        case IntOp::Imul:
            // Immediate forms only; register/memory source forms stay opaque.
            if (ops.size() == 2) return as_imm(ops[0]) && as_reg(ops[1]) && as_reg(ops[1])->is_gpr();
            if (ops.size() == 3)
                return as_imm(ops[0]) && (as_reg(ops[1]) || as_mem(ops[1])) && as_reg(ops[2]) &&
                       as_reg(ops[2])->is_gpr();
            return false;
        case IntOp::MovSx32: {
            if (ops.size() != 2) return false;
            const auto* dst = as_reg(ops[1]);
            if (!dst || !dst->is_gpr() || dst->cls != RegClass::Gpr64) return false;
            if (as_mem(ops[0])) return true;
            const auto* src = as_reg(ops[0]);
            return src && src->is_gpr() && src->cls == RegClass::Alias32;
        }
        case IntOp::Compare:
            return ops.size() == 2;
        case IntOp::Nop:
            return true;
    }
    return false;
}

unsigned integer_width(IntOp op, std::optional<unsigned> suffix, const std::vector<Operand>& ops) {
    if (op == IntOp::MovSx32) return 8;
    if (suffix) return *suffix;
    // Prefer the destination register's width, then any register operand.
    if (!ops.empty()) {
        if (const auto* dst = as_reg(ops.back()); dst && dst->is_gpr()) return dst->byte_width();
    }
    return first_gpr_width(ops);
}

void add_reg_read(std::vector<Access>& reads, const Register& reg) {
    const RegAccess acc{reg, reg.byte_width()};
    for (const auto& a : reads)
        if (const auto* r = std::get_if<RegAccess>(&a); r && *r == acc) return;
    reads.emplace_back(acc);
}

void add_address_regs(std::vector<Access>& reads, const MemOperand& mem) {
    if (mem.base && !mem.base->is_rip()) add_reg_read(reads, *mem.base);
    if (mem.index) add_reg_read(reads, *mem.index);
}

void add_read(Instruction& instr, const Operand& op, unsigned mem_width) {
    if (const auto* reg = as_reg(op)) {
        add_reg_read(instr.reads, *reg);
    } else if (const auto* mem = as_mem(op)) {
        add_address_regs(instr.reads, *mem);
        instr.reads.emplace_back(MemAccess{*mem, mem_width});
    }
}

void add_write(Instruction& instr, const Operand& op, unsigned mem_width) {
    if (const auto* reg = as_reg(op)) {
        instr.writes.emplace_back(RegAccess{*reg, reg->byte_width()});
    } else if (const auto* mem = as_mem(op)) {
        add_address_regs(instr.reads, *mem);
        instr.writes.emplace_back(MemAccess{*mem, mem_width});
    }
}

void derive_accesses(Instruction& instr) {
    const auto& ops = instr.operands;
    if (instr.sem_class == SemClass::SupportedInteger) {
        switch (instr.op) {
            case IntOp::Mov:
                add_read(instr, ops[0], instr.width);
                add_write(instr, ops[1], instr.width);
                break;
            case IntOp::Lea:
                add_address_regs(instr.reads, *as_mem(ops[0]));  // address math, no access
                add_write(instr, ops[1], instr.width);
                break;
            case IntOp::Add: case IntOp::Sub: case IntOp::And:
            case IntOp::Or:  case IntOp::Xor:
                add_read(instr, ops[0], instr.width);
                add_read(instr, ops[1], instr.width);
                add_write(instr, ops[1], instr.width);
                break;
            case IntOp::Inc: case IntOp::Dec: case IntOp::Neg: case IntOp::Not:
                add_read(instr, ops[0], instr.width);
                add_write(instr, ops[0], instr.width);
                break;
            case IntOp::Shl: case IntOp::Shr: case IntOp::Sar:
                if (ops.size() == 2) add_read(instr, ops[0], instr.width);
                add_read(instr, ops.back(), instr.width);
                add_write(instr, ops.back(), instr.width);
                break;
            case IntOp::Imul:
                for (std::size_t i = 0; i + 1 < ops.size(); ++i) add_read(instr, ops[i], instr.width);
                if (ops.size() == 2) add_read(instr, ops[1], instr.width);  // dst is also a factor
                add_write(instr, ops.back(), instr.width);
                break;
            case IntOp::MovSx32:
                add_read(instr, ops[0], 4);
                add_write(instr, ops[1], 8);
                break;
            case IntOp::Compare:
                add_read(instr, ops[0], instr.width);
                add_read(instr, ops[1], instr.width);
                break;
            case IntOp::Nop:
                break;
        }
        return;
    }
    // Opaque: every operand but the last is a source; the last is the
    // destination (write only). Address registers are always reads.
    if (ops.empty()) return;
    for (std::size_t i = 0; i + 1 < ops.size(); ++i) add_read(instr, ops[i], instr.width);
    const Operand& dst = ops.back();
    if (ops.size() == 1 && as_imm(dst)) return;
    if (ops.size() == 1 && !as_reg(dst) && !as_mem(dst)) return;
    add_write(instr, dst, instr.width);
}

Instruction parse_instruction(std::string_view line, std::size_t line_no, uint32_t index) {
    const LineParser lp(line, line_no);
    std::size_t end = 0;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    std::string mnemonic(line.substr(0, end));
    std::transform(mnemonic.begin(), mnemonic.end(), mnemonic.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (is_control_flow(mnemonic))
        lp.fail("control-flow mnemonic '" + mnemonic + "' is not a basic-block body instruction");

    Instruction instr;
    instr.index = index;
    instr.mnemonic = mnemonic;

    const std::string_view rest = trim(line.substr(end));
    if (!rest.empty()) {
        // Split on commas outside parentheses.
        int depth = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= rest.size(); ++i) {
            if (i == rest.size() || (rest[i] == ',' && depth == 0)) {
                instr.operands.push_back(lp.parse_operand(rest.substr(start, i - start)));
                start = i + 1;
            } else if (rest[i] == '(') {
                ++depth;
            } else if (rest[i] == ')') {
                if (--depth < 0) lp.fail("unbalanced ')'");
            }
        }
        if (depth != 0) lp.fail("unbalanced '('");
    }

    const auto lookup = lookup_integer(mnemonic);
    if (lookup && !has_vector_operand(instr.operands) &&
        shape_matches(lookup->info.op, instr.operands)) {
        instr.sem_class = SemClass::SupportedInteger;
        instr.op = lookup->info.op;
        instr.width = integer_width(instr.op, lookup->width, instr.operands);
    } else {
        instr.sem_class = SemClass::Opaque;
        instr.op = IntOp::Nop;
        instr.width = opaque_mem_width(mnemonic, instr.operands);
    }
    derive_accesses(instr);
    return instr;
}

}  // namespace

unsigned Register::byte_width() const {
    switch (cls) {
        case RegClass::Gpr64: return 8;
        case RegClass::Alias32: return 4;
        case RegClass::Alias16: return 2;
        case RegClass::Alias8: return 1;
        case RegClass::Vector:
            return static_cast<uint8_t>(name) >= static_cast<uint8_t>(Reg::Ymm0) ? 32 : 16;
    }
    return 8;
}

std::string_view reg_name(Reg r) {
    const auto i = static_cast<std::size_t>(r);
    if (i < kCanonicalNames.size()) return kCanonicalNames[i];
    static const auto* vec_names = [] {
        auto* v = new std::array<std::string, 32>;
        for (std::size_t k = 0; k < 16; ++k) {
            (*v)[k] = "xmm" + std::to_string(k);
            (*v)[16 + k] = "ymm" + std::to_string(k);
        }
        return v;
    }();
    return (*vec_names)[i - kCanonicalNames.size()];
}

std::string register_spelling(const Register& r) {
    static constexpr std::array<std::string_view, 16> n32 = {
        "eax", "ebx", "ecx", "edx", "esi", "edi", "ebp", "esp",
        "r8d", "r9d", "r10d", "r11d", "r12d", "r13d", "r14d", "r15d"};
    static constexpr std::array<std::string_view, 16> n16 = {
        "ax", "bx", "cx", "dx", "si", "di", "bp", "sp",
        "r8w", "r9w", "r10w", "r11w", "r12w", "r13w", "r14w", "r15w"};
    static constexpr std::array<std::string_view, 16> n8 = {
        "al", "bl", "cl", "dl", "sil", "dil", "bpl", "spl",
        "r8b", "r9b", "r10b", "r11b", "r12b", "r13b", "r14b", "r15b"};
    static constexpr std::array<std::string_view, 4> n8h = {"ah", "bh", "ch", "dh"};
    const auto i = static_cast<std::size_t>(r.name);
    switch (r.cls) {
        case RegClass::Alias32: return std::string(n32[i]);
        case RegClass::Alias16: return std::string(n16[i]);
        case RegClass::Alias8:
            if (r.high_byte) return std::string(n8h[i]);
            return std::string(n8[i]);
        default: return std::string(reg_name(r.name));
    }
}

bool Instruction::has_memory_read() const {
    return std::any_of(reads.begin(), reads.end(),
                       [](const Access& a) { return std::holds_alternative<MemAccess>(a); });
}

bool Instruction::has_memory_write() const {
    return std::any_of(writes.begin(), writes.end(),
                       [](const Access& a) { return std::holds_alternative<MemAccess>(a); });
}

AccessLists access_descriptors(const Instruction& instr) { return {instr.reads, instr.writes}; }

Kernel parse_kernel(std::string_view text, uint64_t base_address) {
    Kernel kernel;
    kernel.synthetic_base_address = base_address;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        const std::string_view raw = line;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        kernel.instructions.push_back(
            parse_instruction(line, line_no, static_cast<uint32_t>(kernel.instructions.size())));
        kernel.source_text.emplace_back(trim(raw));
        kernel.instruction_byte_sizes.push_back(kSyntheticInstructionSize);
    }
    return kernel;
}

std::string to_string(const MemOperand& mem) {
    std::ostringstream out;
    if (mem.displacement != 0) out << mem.displacement;
    out << '(';
    if (mem.base) out << '%' << register_spelling(*mem.base);
    if (mem.index) out << ", %" << register_spelling(*mem.index) << ", " << unsigned(mem.scale);
    out << ')';
    return out.str();
}

std::string to_string(const Operand& op) {
    if (const auto* imm = std::get_if<Immediate>(&op))
        return "$" + std::to_string(static_cast<int64_t>(imm->value));
    if (const auto* reg = std::get_if<Register>(&op)) return "%" + register_spelling(*reg);
    return to_string(std::get<MemOperand>(op));
}

std::string to_string(const Instruction& instr) {
    std::string out = instr.mnemonic;
    for (std::size_t i = 0; i < instr.operands.size(); ++i) {
        out += i == 0 ? " " : ", ";
        out += to_string(instr.operands[i]);
    }
    return out;
}

std::string to_string(const Kernel& kernel) {
    std::string out;
    for (const auto& instr : kernel.instructions) {
        out += to_string(instr);
        out += '\n';
    }
    return out;
}

bool same_structure(const Kernel& a, const Kernel& b) {
    return a.instructions == b.instructions &&
           a.synthetic_base_address == b.synthetic_base_address &&
           a.instruction_byte_sizes == b.instruction_byte_sizes;
}

}  // namespace staticdeps
