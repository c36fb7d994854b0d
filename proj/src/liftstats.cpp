#include "staticdeps/liftstats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>

namespace staticdeps {

std::optional<double> lift(const BenchmarkRecord& record, const std::string& tool) {
    const auto it = record.per_tool.find(tool);
    if (it == record.per_tool.end()) return std::nullopt;
    double total = 0.0;
    for (const auto& block : it->second) {
        if (!block.predicted_cycles) return std::nullopt;  // discard the whole benchmark
        total += static_cast<double>(block.occurrences) * *block.predicted_cycles;
    }
    return total;
}

double relative_error(double pred, double baseline) {
    if (!(baseline > 0.0)) throw std::invalid_argument("baseline cycles must be positive");
    return std::abs(pred - baseline) / baseline;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

ErrorStats summarize(std::span<const double> errors, uint64_t failures) {
    if (errors.empty()) throw UndefinedStatisticError("cannot summarize an empty error list");
    ErrorStats stats;
    stats.datapoints = errors.size();
    stats.failures = failures;
    stats.failure_pct =
        100.0 * static_cast<double>(failures) / static_cast<double>(errors.size() + failures);
    double sum = 0.0;
    for (const double e : errors) sum += e;
    stats.mape = 100.0 * sum / static_cast<double>(errors.size());
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    stats.q1 = 100.0 * percentile(sorted, 0.25);
    stats.median = 100.0 * percentile(sorted, 0.50);
    stats.q3 = 100.0 * percentile(sorted, 0.75);
    return stats;
}

namespace {

// Sum of t*(t-1)/2 over the tie groups of one series.
uint64_t tied_pairs(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    uint64_t total = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const uint64_t t = j - i;
        total += t * (t - 1) / 2;
        i = j;
    }
    return total;
}

}  // namespace

double kendall_tau(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("series lengths differ");
    if (xs.size() < 2) throw UndefinedStatisticError("kendall tau needs at least two points");
    const std::size_t n = xs.size();
    const uint64_t n0 = n * (n - 1) / 2;
    const uint64_t n1 = tied_pairs(xs);
    const uint64_t n2 = tied_pairs(ys);
    if (n0 == n1 || n0 == n2)
        throw UndefinedStatisticError("kendall tau undefined: all-ties denominator is zero");
    int64_t concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[j] - xs[i];
            const double dy = ys[j] - ys[i];
            if (dx != 0.0 && dy != 0.0) {
                if ((dx > 0.0) == (dy > 0.0))
                    ++concordant;
                else
                    ++discordant;
            }
        }
    }
    const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    return static_cast<double>(concordant - discordant) / denom;
}

std::vector<BlockPrediction> relevance_filter(const std::vector<BlockPrediction>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("relevance filter needs at least one block");
    uint64_t max_occ = 0;
    for (const auto& b : blocks) max_occ = std::max(max_occ, b.occurrences);
    std::vector<BlockPrediction> kept;
    for (const auto& b : blocks)
        if (b.occurrences * 10 >= max_occ) kept.push_back(b);  // inclusive 10% boundary
    return kept;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            std::string f = line.substr(start, i - start);
            while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
            std::size_t b = 0;
            while (b < f.size() && f[b] == ' ') ++b;
            fields.push_back(f.substr(b));
            start = i + 1;
        }
    }
    return fields;
}

double parse_double(const std::string& s, const std::string& source, std::size_t line,
                    const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CsvError(source, line, std::string("malformed ") + what + " '" + s + "'");
    }
}

uint64_t parse_count(const std::string& s, const std::string& source, std::size_t line,
                     const char* what) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size() || v == 0) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CsvError(source, line, std::string("malformed ") + what + " '" + s + "'");
    }
}

}  // namespace

std::vector<PredictionRow> read_predictions_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw CsvError(source, 1, "missing header row");
    ++line_no;
    if (split_csv_line(line) !=
        std::vector<std::string>{"benchmark", "block", "occurrences", "tool", "pred_cycles"})
        throw CsvError(source, 1,
                       "expected header 'benchmark,block,occurrences,tool,pred_cycles'");
    std::vector<PredictionRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw CsvError(source, line_no, "expected 5 fields");
        PredictionRow row;
        row.benchmark = fields[0];
        row.block = fields[1];
        row.occurrences = parse_count(fields[2], source, line_no, "occurrence count");
        row.tool = fields[3];
        if (fields[4] != "FAIL")
            row.predicted_cycles = parse_double(fields[4], source, line_no, "prediction");
        if (row.predicted_cycles && *row.predicted_cycles < 0.0)
            throw CsvError(source, line_no, "negative prediction");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::map<std::string, double> read_baseline_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw CsvError(source, 1, "missing header row");
    ++line_no;
    if (split_csv_line(line) != std::vector<std::string>{"benchmark", "baseline_cycles"})
        throw CsvError(source, 1, "expected header 'benchmark,baseline_cycles'");
    std::map<std::string, double> baselines;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) throw CsvError(source, line_no, "expected 2 fields");
        const double cycles = parse_double(fields[1], source, line_no, "baseline cycles");
        if (!(cycles > 0.0)) throw CsvError(source, line_no, "baseline cycles must be positive");
        baselines[fields[0]] = cycles;
    }
    return baselines;
}

std::vector<BenchmarkRecord> group_records(const std::vector<PredictionRow>& rows,
                                           const std::map<std::string, double>* baselines) {
    std::map<std::string, BenchmarkRecord> by_name;
    for (const auto& row : rows) {
        BenchmarkRecord& rec = by_name[row.benchmark];
        rec.benchmark = row.benchmark;
        rec.per_tool[row.tool].push_back(
            BlockPrediction{row.block, row.occurrences, row.predicted_cycles});
    }
    std::vector<BenchmarkRecord> records;
    records.reserve(by_name.size());
    for (auto& [name, rec] : by_name) {
        if (baselines) {
            const auto it = baselines->find(name);
            if (it == baselines->end()) throw MissingBaselineError(name);
            rec.baseline_cycles = it->second;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<LiftedRow> lift_all(const std::vector<BenchmarkRecord>& records) {
    std::vector<LiftedRow> rows;
    for (const auto& rec : records)
        for (const auto& [tool, blocks] : rec.per_tool)
            rows.push_back(LiftedRow{rec.benchmark, tool, lift(rec, tool)});
    return rows;
}

std::vector<std::pair<std::string, ErrorStats>> compute_tool_stats(
    const std::vector<BenchmarkRecord>& records) {
    std::set<std::string> tools;
    for (const auto& rec : records)
        for (const auto& [tool, blocks] : rec.per_tool) tools.insert(tool);

    std::vector<std::pair<std::string, ErrorStats>> result;
    for (const auto& tool : tools) {
        std::vector<double> errors, preds, baselines;
        uint64_t failures = 0;
        for (const auto& rec : records) {
            if (!rec.per_tool.contains(tool)) continue;
            const auto lifted = lift(rec, tool);
            if (!lifted) {
                ++failures;
                continue;
            }
            errors.push_back(relative_error(*lifted, rec.baseline_cycles));
            preds.push_back(*lifted);
            baselines.push_back(rec.baseline_cycles);
        }
        ErrorStats stats;
        if (errors.empty()) {
            stats.failures = failures;
            stats.failure_pct = failures ? 100.0 : 0.0;
        } else {
            stats = summarize(errors, failures);
            try {
                stats.kendall_tau = kendall_tau(preds, baselines);
            } catch (const UndefinedStatisticError&) {
                stats.kendall_tau = std::nullopt;
            }
        }
        result.emplace_back(tool, stats);
    }
    return result;
}

}  // namespace staticdeps
