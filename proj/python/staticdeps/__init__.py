"""Static extraction of memory-carried dependencies from assembly basic blocks."""

from staticdeps._core import (
    BenchmarkRecord,
    BlockPrediction,
    CoverageReport,
    DepConfig,
    Dependency,
    DepReport,
    DynDependency,
    EmptyKernelError,
    ErrorStats,
    Instruction,
    Kernel,
    OracleConfig,
    OracleTrace,
    ParseError,
    RegInit,
    UndefinedCoverageError,
    UndefinedStatisticError,
    analyze,
    analyze_amplified,
    coverage,
    filter_spurious,
    kendall_tau,
    kernel_sha256,
    lift,
    parse_kernel,
    relative_error,
    relevance_filter,
    run_concrete,
    summarize,
    unroll_count,
)

__all__ = [
    "BenchmarkRecord",
    "BlockPrediction",
    "CoverageReport",
    "DepConfig",
    "Dependency",
    "DepReport",
    "DynDependency",
    "EmptyKernelError",
    "ErrorStats",
    "Instruction",
    "Kernel",
    "OracleConfig",
    "OracleTrace",
    "ParseError",
    "RegInit",
    "UndefinedCoverageError",
    "UndefinedStatisticError",
    "analyze",
    "analyze_amplified",
    "coverage",
    "filter_spurious",
    "kendall_tau",
    "kernel_sha256",
    "lift",
    "parse_kernel",
    "relative_error",
    "relevance_filter",
    "run_concrete",
    "summarize",
    "unroll_count",
]

__version__ = "0.1.0"
