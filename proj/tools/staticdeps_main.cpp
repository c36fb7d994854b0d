#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "staticdeps/analysis.hpp"
#include "staticdeps/kernel.hpp"
#include "staticdeps/liftstats.hpp"
#include "staticdeps/oracle.hpp"

namespace {

// Exit codes: 1 io/usage, 2 parse error, 3 empty kernel, 4 undefined
// coverage, 5 missing baseline.
constexpr int kExitIo = 1;
constexpr int kExitParse = 2;
constexpr int kExitEmptyKernel = 3;
constexpr int kExitUndefinedCoverage = 4;
constexpr int kExitMissingBaseline = 5;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

uint64_t parse_u64(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const uint64_t v = std::stoull(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(fmt::format("malformed {} '{}'", what, s));
    }
}

staticdeps::RegInit parse_reg_init(const std::string& s) {
    const auto colon = s.find(':');
    const std::string mode = s.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (mode == "uniform")
        return staticdeps::RegInit::uniform(
            arg.empty() ? staticdeps::kDefaultUniformConstant : parse_u64(arg, "register constant"));
    if (mode == "distinct")
        return staticdeps::RegInit::distinct(arg.empty() ? 42 : parse_u64(arg, "seed"));
    throw UsageError("--reg-init expects uniform:HEX or distinct:SEED, got '" + s + "'");
}

// Shortest decimal that keeps a trailing ".0" on integral values.
std::string format_cycles(double v) {
    std::string s = fmt::format("{:.12g}", v);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

struct KernelFlags {
    std::string path;
    uint64_t base_address = staticdeps::kDefaultBaseAddress;
    std::string base_address_str;
};

struct DepFlags {
    staticdeps::DepConfig cfg;
    std::string seeds_str;
};

struct OracleFlags {
    staticdeps::OracleConfig cfg;
    std::string reg_init_str = "distinct:42";
    std::string mem_fill_str = "0x2324000";
    uint64_t lifetime = 0;
    bool lifetime_set = false;
};

void add_kernel_flags(CLI::App* cmd, KernelFlags& kf) {
    cmd->add_option("kernel", kf.path, "assembly kernel file")->required();
    cmd->add_option("--base-address", kf.base_address_str,
                    "synthetic address of the first instruction (default 0x400000)");
}

void add_dep_flags(CLI::App* cmd, DepFlags& df) {
    cmd->add_option("--rob-size", df.cfg.rob_size, "reorder-buffer size in instructions")
        ->capture_default_str();
    cmd->add_option("--spurious-threshold", df.cfg.spurious_threshold,
                    "minimum hit fraction for a dependency to be kept")
        ->capture_default_str();
    cmd->add_option("--seeds", df.seeds_str, "comma-separated analysis seeds (default 1,2,3)")
        ->envname("STATICDEPS_SEEDS");
}

void add_oracle_flags(CLI::App* cmd, OracleFlags& of) {
    cmd->add_option("--iterations", of.cfg.iterations, "concrete iterations to execute")
        ->capture_default_str();
    cmd->add_option("--reg-init", of.reg_init_str, "uniform:HEX or distinct:SEED")
        ->capture_default_str();
    cmd->add_option("--mem-fill", of.mem_fill_str,
                    "fill constant for never-written memory (low byte used)")
        ->capture_default_str();
    auto* lt = cmd->add_option("--lifetime", of.lifetime,
                               "max executed instructions between write and read");
    cmd->callback([&of, lt] { of.lifetime_set = lt->count() > 0; });
}

staticdeps::Kernel load_kernel(KernelFlags& kf) {
    if (!kf.base_address_str.empty())
        kf.base_address = parse_u64(kf.base_address_str, "base address");
    return staticdeps::parse_kernel(read_file(kf.path), kf.base_address);
}

void finish_dep_flags(DepFlags& df, uint64_t base_address) {
    df.cfg.synthetic_base_address = base_address;
    if (df.seeds_str.empty()) return;
    df.cfg.seeds.clear();
    std::stringstream ss(df.seeds_str);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) df.cfg.seeds.push_back(parse_u64(tok, "seed"));
    if (df.cfg.seeds.empty()) throw UsageError("--seeds needs at least one value");
}

void finish_oracle_flags(OracleFlags& of) {
    of.cfg.reg_init = parse_reg_init(of.reg_init_str);
    of.cfg.mem_fill = static_cast<uint8_t>(parse_u64(of.mem_fill_str, "memory fill") & 0xFF);
    if (of.lifetime_set) of.cfg.lifetime = of.lifetime;
}

void print_dep_report(const staticdeps::DepReport& report, const std::string& format) {
    if (format == "json") {
        std::cout << staticdeps::to_json(report) << "\n";
        return;
    }
    fmt::print("kernel {}  copies {}  rob {}  threshold {:.2f}\n", report.kernel_sha256.substr(0, 12),
               report.copies, report.rob_size, report.spurious_threshold);
    fmt::print("dropped bottom-address stores: {}\n", report.dropped_bottom_stores);
    if (report.deps.empty()) {
        fmt::print("no dependencies\n");
        return;
    }
    for (const auto& d : report.deps)
        fmt::print("{} -> {}  dk={}  hits={}/{}\n", d.src, d.dst, d.delta_k, d.hits, d.eligible);
}

int cmd_deps(KernelFlags& kf, DepFlags& df, const std::string& format) {
    const staticdeps::Kernel kernel = load_kernel(kf);
    finish_dep_flags(df, kernel.synthetic_base_address);
    print_dep_report(staticdeps::analyze_amplified(kernel, df.cfg), format);
    return 0;
}

int cmd_oracle(KernelFlags& kf, OracleFlags& of, const std::string& format) {
    const staticdeps::Kernel kernel = load_kernel(kf);
    finish_oracle_flags(of);
    const staticdeps::OracleTrace trace = staticdeps::run_concrete(kernel, of.cfg);
    if (format == "json") {
        std::cout << staticdeps::to_json(trace) << "\n";
        return 0;
    }
    fmt::print("iterations {}  reg-init {}  suspicious {}\n", trace.iterations,
               staticdeps::to_string(trace.reg_init), trace.suspicious_addresses);
    for (const auto& d : trace.deps)
        fmt::print("{} -> {}  rho={}\n", d.src, d.dst, d.occurrences);
    return 0;
}

int cmd_cov(KernelFlags& kf, DepFlags& df, OracleFlags& of, const std::string& format) {
    const staticdeps::Kernel kernel = load_kernel(kf);
    finish_dep_flags(df, kernel.synthetic_base_address);
    finish_oracle_flags(of);
    const staticdeps::DepReport statics = staticdeps::analyze_amplified(kernel, df.cfg);
    const staticdeps::OracleTrace trace = staticdeps::run_concrete(kernel, of.cfg);
    const staticdeps::CoverageReport report = staticdeps::coverage(statics, trace.deps);
    if (format == "json") {
        nlohmann::ordered_json j;
        j["cov_u"] = report.cov_u;
        j["cov_w"] = report.cov_w;
        j["found"] = report.found;
        j["missed"] = report.missed;
        auto& deps = j["deps"] = nlohmann::ordered_json::array();
        for (const auto& entry : report.classification)
            deps.push_back(nlohmann::ordered_json{{"src", entry.dep.src},
                                                  {"dst", entry.dep.dst},
                                                  {"rho", entry.dep.occurrences},
                                                  {"found", entry.found}});
        std::cout << j.dump() << "\n";
        return 0;
    }
    fmt::print("cov_u {:.1f}%\n", 100.0 * report.cov_u);
    fmt::print("cov_w {:.1f}%\n", 100.0 * report.cov_w);
    fmt::print("found {}\nmissed {}\n", report.found, report.missed);
    for (const auto& entry : report.classification)
        fmt::print("{} {} -> {}  rho={}\n", entry.found ? "detected" : "missed", entry.dep.src,
                   entry.dep.dst, entry.dep.occurrences);
    return 0;
}

int cmd_lift(const std::string& pred_path) {
    std::ifstream in(pred_path);
    if (!in) throw UsageError("cannot open '" + pred_path + "'");
    const auto rows = staticdeps::read_predictions_csv(in, pred_path);
    const auto records = staticdeps::group_records(rows, nullptr);
    std::cout << "benchmark,tool,lifted_cycles\n";
    for (const auto& row : staticdeps::lift_all(records)) {
        std::cout << row.benchmark << ',' << row.tool << ','
                  << (row.lifted_cycles ? format_cycles(*row.lifted_cycles) : "DISCARDED") << "\n";
    }
    return 0;
}

int cmd_stats(const std::string& pred_path, const std::string& baseline_path) {
    std::ifstream pred_in(pred_path);
    if (!pred_in) throw UsageError("cannot open '" + pred_path + "'");
    std::ifstream base_in(baseline_path);
    if (!base_in) throw UsageError("cannot open '" + baseline_path + "'");
    const auto rows = staticdeps::read_predictions_csv(pred_in, pred_path);
    const auto baselines = staticdeps::read_baseline_csv(base_in, baseline_path);
    const auto records = staticdeps::group_records(rows, &baselines);
    std::cout << "tool,datapoints,failures,failure_pct,mape,median,q1,q3,kendall_tau\n";
    for (const auto& [tool, stats] : staticdeps::compute_tool_stats(records)) {
        const std::string tau =
            stats.kendall_tau ? fmt::format("{:.2f}", *stats.kendall_tau) : "NA";
        if (stats.datapoints == 0) {
            fmt::print("{},0,{},{:.2f},NA,NA,NA,NA,NA\n", tool, stats.failures, stats.failure_pct);
            continue;
        }
        fmt::print("{},{},{},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{}\n", tool, stats.datapoints,
                   stats.failures, stats.failure_pct, stats.mape, stats.median, stats.q1, stats.q3,
                   tau);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"static memory-carried dependency analysis for assembly basic blocks"};
    app.require_subcommand(1);

    KernelFlags deps_kf, oracle_kf, cov_kf;
    DepFlags deps_df, cov_df;
    OracleFlags oracle_of, cov_of;
    std::string deps_format = "json", oracle_format = "json", cov_format = "text";
    std::string lift_pred, stats_pred, stats_baseline;

    auto* deps = app.add_subcommand("deps", "extract loop-carried memory dependencies");
    add_kernel_flags(deps, deps_kf);
    add_dep_flags(deps, deps_df);
    deps->add_option("--format", deps_format)->check(CLI::IsMember({"json", "text"}));

    auto* oracle = app.add_subcommand("oracle", "run the concrete-execution baseline");
    add_kernel_flags(oracle, oracle_kf);
    add_oracle_flags(oracle, oracle_of);
    oracle->add_option("--format", oracle_format)->check(CLI::IsMember({"json", "text"}));

    auto* cov = app.add_subcommand("cov", "coverage of static dependencies vs the baseline");
    add_kernel_flags(cov, cov_kf);
    add_dep_flags(cov, cov_df);
    add_oracle_flags(cov, cov_of);
    cov->add_option("--format", cov_format)->check(CLI::IsMember({"json", "text"}));

    std::string lift_format = "csv", stats_format = "csv";
    auto* lift = app.add_subcommand("lift", "lift block predictions to benchmark level");
    lift->add_option("predictions", lift_pred, "predictions CSV")->required();
    lift->add_option("--format", lift_format)->check(CLI::IsMember({"csv"}));

    auto* stats = app.add_subcommand("stats", "error statistics of lifted predictions");
    stats->add_option("predictions", stats_pred, "predictions CSV")->required();
    stats->add_option("baseline", stats_baseline, "baseline CSV")->required();
    stats->add_option("--format", stats_format)->check(CLI::IsMember({"csv"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (deps->parsed()) return cmd_deps(deps_kf, deps_df, deps_format);
        if (oracle->parsed()) return cmd_oracle(oracle_kf, oracle_of, oracle_format);
        if (cov->parsed()) return cmd_cov(cov_kf, cov_df, cov_of, cov_format);
        if (lift->parsed()) return cmd_lift(lift_pred);
        if (stats->parsed()) return cmd_stats(stats_pred, stats_baseline);
    } catch (const staticdeps::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const staticdeps::CsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const staticdeps::EmptyKernelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmptyKernel;
    } catch (const staticdeps::UndefinedCoverageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUndefinedCoverage;
    } catch (const staticdeps::MissingBaselineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingBaseline;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
