#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace staticdeps {

/// Raised by the assembly parser. Carries the 1-based source line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class EmptyKernelError : public std::runtime_error {
public:
    EmptyKernelError() : std::runtime_error("kernel contains no instructions") {}
};

/// Coverage against an empty dynamic dependency set is undefined, not 0/0.
class UndefinedCoverageError : public std::runtime_error {
public:
    UndefinedCoverageError() : std::runtime_error("coverage undefined: dynamic dependency set is empty") {}
};

/// A statistic whose defining formula degenerates (empty input, all-ties denominator).
class UndefinedStatisticError : public std::runtime_error {
public:
    explicit UndefinedStatisticError(const std::string& what) : std::runtime_error(what) {}
};

class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& source, std::size_t line, const std::string& reason)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class MissingBaselineError : public std::runtime_error {
public:
    explicit MissingBaselineError(const std::string& benchmark)
        : std::runtime_error("no baseline cycles for benchmark '" + benchmark + "'"),
          benchmark_(benchmark) {}

    const std::string& benchmark() const { return benchmark_; }

private:
    std::string benchmark_;
};

}  // namespace staticdeps
