#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "staticdeps/kernel.hpp"

using namespace staticdeps;

namespace {

const MemAccess* find_mem(const std::vector<Access>& accesses) {
    for (const auto& a : accesses)
        if (const auto* m = std::get_if<MemAccess>(&a)) return m;
    return nullptr;
}

bool reads_register(const Instruction& instr, Reg r) {
    for (const auto& a : instr.reads)
        if (const auto* reg = std::get_if<RegAccess>(&a); reg && reg->reg.name == r) return true;
    return false;
}

bool writes_register(const Instruction& instr, Reg r) {
    for (const auto& a : instr.writes)
        if (const auto* reg = std::get_if<RegAccess>(&a); reg && reg->reg.name == r) return true;
    return false;
}

}  // namespace

TEST_CASE("scalar fp kernel: operand structure and widths") {
    const Kernel k = parse_kernel("vmulsd (%rax), %xmm0, %xmm1\nvmovsd %xmm1, (%r10)");
    REQUIRE(k.size() == 2);

    const Instruction& mul = k.instructions[0];
    CHECK(mul.sem_class == SemClass::Opaque);
    const MemAccess* load = find_mem(mul.reads);
    REQUIRE(load != nullptr);
    CHECK(load->width == 8);
    CHECK(load->operand.base->name == Reg::Rax);
    CHECK(find_mem(mul.writes) == nullptr);

    const Instruction& mov = k.instructions[1];
    CHECK(mov.sem_class == SemClass::Opaque);
    const MemAccess* store = find_mem(mov.writes);
    REQUIRE(store != nullptr);
    CHECK(store->width == 8);
    CHECK(store->operand.base->name == Reg::R10);
    CHECK(find_mem(mov.reads) == nullptr);
}

TEST_CASE("empty input gives an empty kernel") {
    CHECK(parse_kernel("").empty());
    CHECK(parse_kernel("\n  # just a comment\n\n").empty());
}

TEST_CASE("register arithmetic instruction") {
    const Kernel k = parse_kernel("addq $8, %rax");
    REQUIRE(k.size() == 1);
    const Instruction& add = k.instructions[0];
    CHECK(add.sem_class == SemClass::SupportedInteger);
    CHECK(add.op == IntOp::Add);
    CHECK(add.width == 8);
    CHECK(writes_register(add, Reg::Rax));
    CHECK(reads_register(add, Reg::Rax));
    CHECK_FALSE(add.has_memory_read());
    CHECK_FALSE(add.has_memory_write());
}

TEST_CASE("read-modify-write memory form yields both accesses") {
    const Kernel k = parse_kernel("addq $1, (%rax)");
    const Instruction& add = k.instructions[0];
    const MemAccess* r = find_mem(add.reads);
    const MemAccess* w = find_mem(add.writes);
    REQUIRE(r != nullptr);
    REQUIRE(w != nullptr);
    CHECK(r->width == 8);
    CHECK(w->width == 8);
    CHECK(r->operand == w->operand);
    CHECK(reads_register(add, Reg::Rax));
}

TEST_CASE("lea reads address registers without touching memory") {
    const Kernel k = parse_kernel("lea 16(%rax,%rbx,4), %rcx");
    const Instruction& lea = k.instructions[0];
    CHECK(lea.sem_class == SemClass::SupportedInteger);
    CHECK(reads_register(lea, Reg::Rax));
    CHECK(reads_register(lea, Reg::Rbx));
    CHECK(writes_register(lea, Reg::Rcx));
    CHECK_FALSE(lea.has_memory_read());
    CHECK_FALSE(lea.has_memory_write());
}

TEST_CASE("movslq reads four bytes and writes the full register") {
    const Kernel k = parse_kernel("movslq -4(%rsp), %rdx");
    const Instruction& mov = k.instructions[0];
    CHECK(mov.sem_class == SemClass::SupportedInteger);
    CHECK(reads_register(mov, Reg::Rsp));
    const MemAccess* load = find_mem(mov.reads);
    REQUIRE(load != nullptr);
    CHECK(load->width == 4);
    CHECK(load->operand.displacement == -4);
    CHECK(writes_register(mov, Reg::Rdx));
}

TEST_CASE("control-flow mnemonics are rejected with the line number") {
    CHECK_THROWS_AS(parse_kernel("jmp .L1"), ParseError);
    CHECK_THROWS_AS(parse_kernel("callq foo"), ParseError);
    CHECK_THROWS_AS(parse_kernel("ret"), ParseError);
    CHECK_THROWS_AS(parse_kernel("je .L2"), ParseError);
    try {
        parse_kernel("movq %rax, %rbx\njne .L0");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("unknown mnemonics are accepted and classified opaque") {
    const Kernel k = parse_kernel("cvttsd2si %xmm0, %rax\nbswapq %rbx");
    REQUIRE(k.size() == 2);
    CHECK(k.instructions[0].sem_class == SemClass::Opaque);
    CHECK(k.instructions[1].sem_class == SemClass::Opaque);
    CHECK(writes_register(k.instructions[0], Reg::Rax));
}

TEST_CASE("syntax errors carry a reason") {
    CHECK_THROWS_AS(parse_kernel("movq %nosuch, %rax"), ParseError);
    CHECK_THROWS_AS(parse_kernel("movq $, %rax"), ParseError);
    CHECK_THROWS_AS(parse_kernel("movq (%rax, %rbx, 3), %rcx"), ParseError);  // bad scale
    CHECK_THROWS_AS(parse_kernel("movq 8(%xmm1), %rax"), ParseError);  // vector in address
    CHECK_THROWS_AS(parse_kernel("movq 8(%rip,%rax,2), %rbx"), ParseError);
    CHECK_THROWS_AS(parse_kernel("movq (), %rax"), ParseError);
    CHECK_THROWS_AS(parse_kernel("movq 8, %rax"), ParseError);  // bare int operand
    CHECK_THROWS_AS(parse_kernel("movq 8(%rax, %rax"), ParseError);
}

TEST_CASE("rip-relative operands") {
    const Kernel k = parse_kernel("movq 128(%rip), %rax");
    const MemAccess* load = find_mem(k.instructions[0].reads);
    REQUIRE(load != nullptr);
    CHECK(load->operand.rip_relative);
    CHECK(load->operand.base->name == Reg::Rip);
    CHECK_FALSE(load->operand.index.has_value());
}

TEST_CASE("sub-width aliases resolve to canonical registers") {
    const Kernel k = parse_kernel("movl %eax, %r9d\nmovw %cx, %dx\nmovb %ah, %r8b");
    CHECK(writes_register(k.instructions[0], Reg::R9));
    CHECK(reads_register(k.instructions[0], Reg::Rax));
    CHECK(writes_register(k.instructions[1], Reg::Rdx));
    CHECK(reads_register(k.instructions[2], Reg::Rax));
    const Instruction& movb = k.instructions[2];
    const auto* src = std::get_if<Register>(&movb.operands[0]);
    REQUIRE(src != nullptr);
    CHECK(src->high_byte);
    CHECK(src->cls == RegClass::Alias8);
}

TEST_CASE("vector operands demote known integer mnemonics to opaque") {
    const Kernel k = parse_kernel("movq %xmm0, (%rax)");
    const Instruction& mov = k.instructions[0];
    CHECK(mov.sem_class == SemClass::Opaque);
    const MemAccess* store = find_mem(mov.writes);
    REQUIRE(store != nullptr);
    CHECK(store->width == 8);  // suffix still fixes the access width
}

TEST_CASE("full vector moves use the register width") {
    const Kernel k = parse_kernel("movaps %xmm0, (%rax)\nvmovups (%rbx), %ymm2");
    CHECK(find_mem(k.instructions[0].writes)->width == 16);
    CHECK(find_mem(k.instructions[1].reads)->width == 32);
}

TEST_CASE("imul forms: immediate supported, register source opaque") {
    const Kernel k = parse_kernel("imulq $3, %rax\nimulq $5, %rbx, %rcx\nimulq %rbx, %rax");
    CHECK(k.instructions[0].sem_class == SemClass::SupportedInteger);
    CHECK(k.instructions[1].sem_class == SemClass::SupportedInteger);
    CHECK(k.instructions[2].sem_class == SemClass::Opaque);
}

TEST_CASE("test/cmp read both operands and write nothing") {
    const Kernel k = parse_kernel("cmpq $4, 8(%rbx)\ntestq %rax, %rax");
    const Instruction& cmp = k.instructions[0];
    CHECK(cmp.sem_class == SemClass::SupportedInteger);
    CHECK(cmp.writes.empty());
    REQUIRE(find_mem(cmp.reads) != nullptr);
    CHECK(k.instructions[1].writes.empty());
}

TEST_CASE("access_descriptors is idempotent") {
    const Kernel k = parse_kernel("addq %rbx, 16(%rax)");
    const auto first = access_descriptors(k.instructions[0]);
    const auto second = access_descriptors(k.instructions[0]);
    CHECK(first.reads == second.reads);
    CHECK(first.writes == second.writes);
    CHECK(first.reads == k.instructions[0].reads);
}

TEST_CASE("synthetic addresses are fixed-stride") {
    const Kernel k = parse_kernel("nop\nnop\nnop", 0x500000);
    CHECK(k.address_of(0) == 0x500000);
    CHECK(k.address_of(2) == 0x500000 + 32);
    CHECK(k.instruction_byte_sizes == std::vector<uint32_t>(3, 16));
}

TEST_CASE("indices are dense and source text is retained") {
    const Kernel k = parse_kernel("movq %rax, %rbx  # copy\n\naddq $1, %rbx\n");
    REQUIRE(k.size() == 2);
    CHECK(k.instructions[0].index == 0);
    CHECK(k.instructions[1].index == 1);
    REQUIRE(k.source_text.size() == 2);
    CHECK(k.source_text[0].find("copy") != std::string::npos);
}

// Properties over the documented grammar.

namespace {

std::string random_grammar_line(std::mt19937_64& rng) {
    static const char* mnemonics[] = {"movq", "addl", "subq", "xorw",  "imulq", "leaq",
                                      "notb", "shlq", "cmpq", "vmulsd", "weirdop", "mov"};
    static const char* regs[] = {"rax", "rbx", "r12", "eax", "r9d", "cx", "al", "xmm3", "rip"};
    const auto reg = [&] { return std::string("%") + regs[rng() % std::size(regs)]; };
    const auto imm = [&] { return "$" + std::to_string(int64_t(rng() % 4096) - 2048); };
    const auto mem = [&]() -> std::string {
        std::string m;
        if (rng() % 2) m += std::to_string(int64_t(rng() % 512) - 256);
        m += '(';
        if (rng() % 4 != 0) m += reg();
        if (rng() % 3 == 0) {
            m += ", " + reg();
            if (rng() % 2) m += std::string(", ") + (rng() % 2 ? "4" : "8");
        }
        m += ')';
        return m;
    };
    std::string line = mnemonics[rng() % std::size(mnemonics)];
    const std::size_t n = rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
        line += i == 0 ? " " : ", ";
        switch (rng() % 3) {
            case 0: line += imm(); break;
            case 1: line += reg(); break;
            default: line += mem(); break;
        }
    }
    return line;
}

}  // namespace

TEST_CASE("fuzz: grammar-shaped lines never crash, only structured errors") {
    std::mt19937_64 rng(0xF00D);
    std::size_t parsed = 0;
    for (int i = 0; i < 5000; ++i) {
        const std::string line = random_grammar_line(rng);
        try {
            const Kernel k = parse_kernel(line);
            parsed += k.size();
            for (const auto& instr : k.instructions) {
                for (const auto& acc : instr.reads) {
                    if (const auto* m = std::get_if<MemAccess>(&acc)) {
                        const std::set<unsigned> ok = {1, 2, 4, 8, 16, 32};
                        CHECK(ok.count(m->width) == 1);
                    }
                }
            }
        } catch (const ParseError&) {
            // structured rejection is fine
        }
    }
    CHECK(parsed > 1000);  // the generator mostly emits valid lines
}

TEST_CASE("property: memory operand registers appear in the register read set") {
    std::mt19937_64 rng(0xBEEF);
    for (int i = 0; i < 3000; ++i) {
        Kernel k;
        try {
            k = parse_kernel(random_grammar_line(rng));
        } catch (const ParseError&) {
            continue;
        }
        for (const auto& instr : k.instructions) {
            const auto check_mem = [&](const Access& acc) {
                const auto* m = std::get_if<MemAccess>(&acc);
                if (!m) return;
                if (m->operand.base && !m->operand.base->is_rip())
                    CHECK(reads_register(instr, m->operand.base->name));
                if (m->operand.index) CHECK(reads_register(instr, m->operand.index->name));
            };
            for (const auto& acc : instr.reads) check_mem(acc);
            for (const auto& acc : instr.writes) check_mem(acc);
        }
    }
}

TEST_CASE("property: serialize/reparse round-trips the structure") {
    std::mt19937_64 rng(0xCAFE);
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        for (std::size_t l = 0; l < 1 + rng() % 5; ++l) text += random_grammar_line(rng) + "\n";
        Kernel first;
        try {
            first = parse_kernel(text);
        } catch (const ParseError&) {
            continue;
        }
        const Kernel second = parse_kernel(to_string(first));
        CHECK(same_structure(first, second));
    }
}

TEST_CASE("round-trip keeps representative kernels intact") {
    for (const char* text : {
             "movq -8(%rax), %rbx\naddq -16(%rax), %rbx\nmovq %rbx, (%rax)\naddq $8, %rax\n",
             "vmulsd (%rax), %xmm0, %xmm1\nvmovsd %xmm1, (%r10)\n",
             "subq $8, %rax\nmovq (%rax), %rdi\n",
         }) {
        const Kernel first = parse_kernel(text);
        CHECK(same_structure(first, parse_kernel(to_string(first))));
    }
}
