"""Smoke tests for the staticdeps Python bindings."""

import json

import staticdeps as sd

FIB = """\
movq -8(%rax), %rbx
addq -16(%rax), %rbx
movq %rbx, (%rax)
addq $8, %rax
"""

ALIAS = "vmulsd (%rax), %xmm0, %xmm1\nvmovsd %xmm1, (%r10)\n"


def test_parse():
    kernel = sd.parse_kernel(FIB)
    assert len(kernel) == 4
    assert kernel.instructions[0].mnemonic == "movq"
    assert not kernel.instructions[0].opaque
    assert kernel.instructions[0].has_memory_read
    assert kernel.instructions[2].has_memory_write
    reparsed = sd.parse_kernel(kernel.to_text())
    assert sd.kernel_sha256(reparsed) == sd.kernel_sha256(kernel)
    try:
        sd.parse_kernel("jmp .L0")
    except ValueError as e:
        assert "line 1" in str(e)
    else:
        raise AssertionError("control flow should be rejected")


def test_analysis():
    kernel = sd.parse_kernel(FIB)
    assert sd.unroll_count(len(kernel), 224) == 57
    report = sd.analyze_amplified(kernel, sd.DepConfig())
    triplets = sorted((d.src, d.dst, d.delta_k) for d in report.deps)
    assert triplets == [(2, 0, 1), (2, 1, 2)]
    assert all(d.hits == d.eligible for d in report.deps)
    parsed = json.loads(report.to_json())
    assert parsed["copies"] == 57
    assert parsed["seeds"] == [1, 2, 3]

    single = sd.analyze(kernel, sd.DepConfig(), 9)
    assert [(d.src, d.dst, d.delta_k) for d in single.deps] == [(2, 0, 1), (2, 1, 2)]

    kept = sd.filter_spurious([sd.Dependency(0, 1, 0, 79, 100), sd.Dependency(0, 2, 0, 80, 100)], 0.80)
    assert [(d.src, d.dst) for d in kept] == [(0, 2)]


def test_oracle_and_coverage():
    kernel = sd.parse_kernel(ALIAS)
    uniform = sd.OracleConfig(iterations=10, reg_init=sd.RegInit.uniform(0x2324000))
    trace = sd.run_concrete(kernel, uniform)
    assert [(d.src, d.dst, d.occurrences) for d in trace.deps] == [(1, 0, 9)]
    assert json.loads(trace.to_json())["reg_init"] == "uniform:0x2324000"

    distinct = sd.OracleConfig(iterations=10, reg_init=sd.RegInit.distinct(42))
    assert not sd.run_concrete(kernel, distinct).deps

    report = sd.analyze_amplified(kernel, sd.DepConfig())
    assert not report.deps
    cov = sd.coverage(report, trace)
    assert cov.found == 0
    assert cov.missed == 1
    assert cov.cov_u == 0.0

    fib = sd.parse_kernel(FIB)
    fib_cov = sd.coverage(
        sd.analyze_amplified(fib, sd.DepConfig()),
        sd.run_concrete(fib, sd.OracleConfig(iterations=50)),
    )
    assert fib_cov.cov_u == 1.0 and fib_cov.cov_w == 1.0


def test_liftstats():
    record = sd.BenchmarkRecord(
        "bench1",
        220.0,
        {"toolA": [sd.BlockPrediction("b0", 100, 2.0), sd.BlockPrediction("b1", 10, 5.0)]},
    )
    assert sd.lift(record, "toolA") == 250.0
    failing = sd.BenchmarkRecord(
        "bench1", 220.0, {"toolA": [sd.BlockPrediction("b0", 100, 2.0), sd.BlockPrediction("b1", 10)]}
    )
    assert sd.lift(failing, "toolA") is None

    assert sd.relative_error(11, 10) == 0.1
    stats = sd.summarize([0.0, 0.1, 0.2, 0.3])
    assert abs(stats.q1 - 7.5) < 1e-9
    assert abs(stats.median - 15.0) < 1e-9
    assert abs(stats.q3 - 22.5) < 1e-9

    assert sd.kendall_tau([1, 2, 3], [10, 20, 30]) == 1.0
    assert sd.kendall_tau([1, 2, 3], [30, 20, 10]) == -1.0
    try:
        sd.kendall_tau([5, 5], [1, 2])
    except ValueError:
        pass
    else:
        raise AssertionError("all-ties tau should be undefined")

    blocks = [sd.BlockPrediction("A", 100, 1.0), sd.BlockPrediction("B", 9, 1.0)]
    assert [b.block for b in sd.relevance_filter(blocks)] == ["A"]


def main():
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"ok {name}")
    print("python smoke tests passed")


if __name__ == "__main__":
    main()
