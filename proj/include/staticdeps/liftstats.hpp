#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "staticdeps/errors.hpp"

namespace staticdeps {

struct BlockPrediction {
    std::string block;
    uint64_t occurrences = 1;
    std::optional<double> predicted_cycles;  // nullopt marks an analyzer failure

    friend bool operator==(const BlockPrediction&, const BlockPrediction&) = default;
};

struct BenchmarkRecord {
    std::string benchmark;
    double baseline_cycles = 0.0;  // > 0 when consumed
    std::map<std::string, std::vector<BlockPrediction>> per_tool;
};

/// Occurrence-weighted sum of a tool's block predictions; nullopt when any
/// block carries a failure marker (the whole benchmark is discarded).
std::optional<double> lift(const BenchmarkRecord& record, const std::string& tool);

/// |pred - baseline| / baseline. Throws on non-positive baseline.
double relative_error(double pred, double baseline);

struct ErrorStats {
    uint64_t datapoints = 0;
    uint64_t failures = 0;
    double failure_pct = 0.0;
    double mape = 0.0;    // percentages
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::optional<double> kendall_tau;
};

/// MAPE / median / quartiles over relative-error fractions, as percentages.
/// Quartiles interpolate linearly between closest ranks. Throws
/// UndefinedStatisticError on an empty error list. kendall_tau is left unset.
ErrorStats summarize(std::span<const double> errors, uint64_t failures);

/// Tie-corrected (tau-b) Kendall rank correlation. Throws on length < 2,
/// mismatched lengths, or an all-ties denominator.
double kendall_tau(std::span<const double> xs, std::span<const double> ys);

/// Keep blocks with at least 10% of the highest occurrence count.
std::vector<BlockPrediction> relevance_filter(const std::vector<BlockPrediction>& blocks);

// --- CSV interfaces ---

struct PredictionRow {
    std::string benchmark;
    std::string block;
    uint64_t occurrences = 1;
    std::string tool;
    std::optional<double> predicted_cycles;
};

/// Parse `benchmark,block,occurrences,tool,pred_cycles` rows (header
/// required; `FAIL` marks failures). `source` names the stream in errors.
std::vector<PredictionRow> read_predictions_csv(std::istream& in, const std::string& source);

/// Parse `benchmark,baseline_cycles` rows (header required).
std::map<std::string, double> read_baseline_csv(std::istream& in, const std::string& source);

/// Group prediction rows into per-benchmark records. Baselines, when given,
/// must cover every benchmark (MissingBaselineError otherwise).
std::vector<BenchmarkRecord> group_records(const std::vector<PredictionRow>& rows,
                                           const std::map<std::string, double>* baselines);

struct LiftedRow {
    std::string benchmark;
    std::string tool;
    std::optional<double> lifted_cycles;  // nullopt = DISCARDED
};

std::vector<LiftedRow> lift_all(const std::vector<BenchmarkRecord>& records);

/// Full per-tool statistics against the baselines: lift, relative errors,
/// summary, Kendall tau over (lifted, baseline) series.
std::vector<std::pair<std::string, ErrorStats>> compute_tool_stats(
    const std::vector<BenchmarkRecord>& records);

}  // namespace staticdeps
