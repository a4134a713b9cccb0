#include "pht/cli.hpp"

#include <iomanip>
#include <optional>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "pht/io.hpp"
#include "pht/two_sample.hpp"

namespace pht::cli {

namespace {

struct CommonOptions {
    std::string tau0 = "0.8";
    double alpha = 0.05;
    std::optional<std::uint64_t> seed;
    std::string out;
};

Tau0Choice parse_tau0(const std::string& text) {
    if (text == "auto") return Tau0Choice::automatic();
    double v = 0.0;
    std::size_t used = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(v >= 0.0 && v <= 1.0)) {
        throw CLI::ValidationError("--tau0", "expected a number in [0, 1] or 'auto', got '" + text + "'");
    }
    return Tau0Choice::value(v);
}

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--tau0", o.tau0, "screening threshold in [0, 1], or 'auto'")->capture_default_str();
    cmd->add_option("--alpha", o.alpha, "test level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--seed", o.seed, "random seed (drawn from entropy when absent)");
    cmd->add_option("--out", o.out, "write a JSON run record here");
}

std::uint64_t resolve_seed(const CommonOptions& o, std::ostream& out) {
    if (o.seed) return *o.seed;
    const std::uint64_t s = entropy_seed();
    out << "seed " << s << " (drawn from entropy)\n";
    return s;
}

void print_outcome(std::ostream& out, const TestOutcome& o, double alpha) {
    out << std::setprecision(6);
    out << "statistic  " << o.statistic << "\n"
        << "trace_hat  " << o.traceHat << "\n"
        << "z          " << o.z << "\n"
        << "p_value    " << o.pValue << "\n"
        << "tau0       " << o.tau0Used << "\n"
        << "pairs      " << o.nPairs << "\n"
        << "singles    " << o.nSingles << "\n"
        << "decision   " << (o.rejects(alpha) ? "reject" : "retain") << " H0 at alpha " << alpha << "\n";
}

std::string options_hash(const nlohmann::json& options) { return fnv1a_hex(options.dump()); }

void write_record(const std::string& path, RunRecord record) {
    if (path.empty()) return;
    write_text_file(path, run_record_json(record));
}

int run_test_one(const std::string& dataPath, const std::string& mu0Path, bool mu0Zero,
                 const CommonOptions& o, const std::vector<std::string>& args, std::ostream& out) {
    const std::string started = utc_timestamp();
    const Tau0Choice tau0 = parse_tau0(o.tau0);
    const DataTable table = read_table(dataPath);
    const SampleMatrix x = numeric_matrix(table);
    const Vector mu0 = mu0Zero ? Vector::Zero(static_cast<Eigen::Index>(x.p()))
                               : read_mu0(mu0Path, table.header);
    const std::uint64_t seed = resolve_seed(o, out);
    OneSampleOptions opts;
    opts.seed = seed;
    const TestOutcome outcome = test_one_sample(x, mu0, tau0, opts);
    out << "one-sample PHT: n = " << x.n() << ", p = " << x.p() << "\n";
    print_outcome(out, outcome, o.alpha);

    RunRecord record;
    record.command = "test-one";
    record.argv = args;
    record.seed = seed;
    record.configHash = options_hash({{"command", "test-one"},
                                      {"tau0", o.tau0},
                                      {"alpha", o.alpha},
                                      {"seed", seed},
                                      {"mu0", mu0Zero ? "zero" : "file"}});
    record.startedAt = started;
    record.finishedAt = utc_timestamp();
    record.result = outcome;
    write_record(o.out, std::move(record));
    return kOk;
}

int run_test_two(const std::string& dataPath, const std::string& groupCol, const std::string& center,
                 const std::string& weighting, const CommonOptions& o,
                 const std::vector<std::string>& args, std::ostream& out) {
    const std::string started = utc_timestamp();
    const Tau0Choice tau0 = parse_tau0(o.tau0);
    const DataTable table = read_table(dataPath);
    const GroupedData data = split_groups(table, groupCol);
    const std::uint64_t seed = resolve_seed(o, out);
    TwoSampleOptions opts;
    opts.seed = seed;
    opts.centering = center == "pooled" ? Centering::Pooled : Centering::None;
    opts.weighting = weighting == "dof" ? PooledWeighting::DegreesOfFreedom : PooledWeighting::Verbatim;
    const TestOutcome outcome = test_two_sample(data.x, data.y, tau0, opts);
    out << "two-sample PHT: " << data.labelX << " (n = " << data.x.n() << ") vs " << data.labelY
        << " (n = " << data.y.n() << "), p = " << data.x.p() << "\n";
    print_outcome(out, outcome, o.alpha);

    RunRecord record;
    record.command = "test-two";
    record.argv = args;
    record.seed = seed;
    record.configHash = options_hash({{"command", "test-two"},
                                      {"tau0", o.tau0},
                                      {"alpha", o.alpha},
                                      {"seed", seed},
                                      {"group_col", groupCol},
                                      {"center", center},
                                      {"weighting", weighting}});
    record.startedAt = started;
    record.finishedAt = utc_timestamp();
    record.result = outcome;
    write_record(o.out, std::move(record));
    return kOk;
}

void print_report(std::ostream& out, const SimReport& r) {
    out << std::fixed << std::setprecision(3);
    for (const auto& m : r.methods) {
        out << "  kappa " << std::setw(6) << r.config.mean.kappa << "  " << std::setw(3) << to_string(m.method)
            << "  rate " << m.rate << "  mc_se " << m.mcSe << "  failures " << m.failures << "\n";
    }
    out << std::defaultfloat;
}

int run_simulate(const std::string& configPath, const std::string& presetName, const std::string& outPath,
                 const std::string& recordPath, std::size_t threads, const std::vector<std::string>& args,
                 std::ostream& out) {
    const std::string started = utc_timestamp();
    const SimulationSpec spec = configPath.empty() ? preset(presetName) : load_simulation_spec(configPath);
    spec.config.validate();
    RunOptions run;
    run.threads = threads;

    const SimConfig& c = spec.config;
    out << "design: " << to_string(c.model.kind) << ", p = " << c.p << ", n1 = " << c.n1 << ", n2 = " << c.n2
        << ", " << to_string(c.dist.kind) << ", reps = " << c.reps << ", seed = " << c.seed << "\n";

    RunRecord record;
    record.command = "simulate";
    record.argv = args;
    record.seed = c.seed;
    record.configHash = fnv1a_hex(simulation_spec_json(spec));
    record.startedAt = started;

    if (spec.kappaGrid) {
        const std::vector<SimReport> reports = run_power(c, *spec.kappaGrid, run);
        for (const auto& r : reports) print_report(out, r);
        if (!outPath.empty()) write_text_file(outPath, power_report_json(reports));
        record.result = reports.back();
    } else {
        const SimReport report = run_design(c, run);
        print_report(out, report);
        out << "wall time " << std::setprecision(3) << report.wallSeconds << " s\n";
        if (!outPath.empty()) write_text_file(outPath, sim_report_json(report));
        record.result = report;
    }
    record.finishedAt = utc_timestamp();
    write_record(recordPath, std::move(record));
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pairwise Hotelling tests for high-dimensional mean vectors", "pht"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    CommonOptions one;
    std::string oneData, mu0Path;
    bool mu0Zero = false;
    auto* testOne = app.add_subcommand("test-one", "one-sample test of H0: mu = mu0");
    testOne->add_option("data", oneData, "CSV/TSV file, rows = observations")->required();
    auto* mu0Opt = testOne->add_option("--mu0", mu0Path, "one-row file with the same header");
    auto* zeroOpt = testOne->add_flag("--mu0-zero", mu0Zero, "test against the zero vector");
    mu0Opt->excludes(zeroOpt);
    add_common(testOne, one);

    CommonOptions two;
    std::string twoData, groupCol, center = "pooled", weighting = "verbatim";
    auto* testTwo = app.add_subcommand("test-two", "two-sample test of H0: mu1 = mu2");
    testTwo->add_option("data", twoData, "CSV/TSV file with a group label column")->required();
    testTwo->add_option("--group-col", groupCol, "name of the label column")->required();
    testTwo->add_option("--center", center, "subtract the pooled mean before testing")
        ->check(CLI::IsMember({"pooled", "none"}))
        ->capture_default_str();
    testTwo->add_option("--weighting", weighting, "pooled covariance weights")
        ->check(CLI::IsMember({"verbatim", "dof"}))
        ->capture_default_str();
    add_common(testTwo, two);

    std::string configPath, presetName, simOut, simRecord;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo size or power study");
    auto* configOpt = simulate->add_option("--config", configPath, "JSON simulation config");
    auto* presetOpt = simulate->add_option("--preset", presetName, "named design, e.g. sigma1-p100");
    configOpt->excludes(presetOpt);
    simulate->add_option("--out", simOut, "write the report (JSON) here");
    simulate->add_option("--record", simRecord, "write a run record (JSON) here");
    simulate->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
        if (testOne->parsed() && !mu0Zero && mu0Path.empty()) {
            throw CLI::RequiredError("--mu0 or --mu0-zero");
        }
        if (simulate->parsed() && configPath.empty() && presetName.empty()) {
            throw CLI::RequiredError("--config or --preset");
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (testOne->parsed()) return run_test_one(oneData, mu0Path, mu0Zero, one, args, out);
        if (testTwo->parsed()) return run_test_two(twoData, groupCol, center, weighting, two, args, out);
        return run_simulate(configPath, presetName, simOut, simRecord, threads, args, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const SingularBlock& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const DegenerateVariance& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const Error& e) {
        // Input, parse and config problems.
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
}

}  // namespace pht::cli
