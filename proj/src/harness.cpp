#include "pht/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "pht/baselines.hpp"

namespace pht {

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::PHT: return "PHT";
        case Method::UHT: return "UHT";
        case Method::DHT: return "DHT";
    }
    return "PHT";
}

Method method_from_string(std::string_view s) {
    if (s == "PHT") return Method::PHT;
    if (s == "UHT") return Method::UHT;
    if (s == "DHT") return Method::DHT;
    throw ConfigError("methods", "unknown method '" + std::string(s) + "'");
}

double mc_standard_error(double rate, std::size_t reps) noexcept {
    if (reps == 0) return 0.0;
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

const MethodSummary& SimReport::method(Method m) const {
    for (const auto& s : methods) {
        if (s.method == m) return s;
    }
    throw InvalidInput("method " + std::string(to_string(m)) + " not in report");
}

namespace {

void validate_common(double alpha, std::size_t reps, const Tau0Choice& tau0,
                     const std::vector<Method>& methods, std::size_t nResamples) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must lie in (0, 1]");
    if (reps < 100) throw ConfigError("reps", "must be at least 100");
    if (tau0.fixed && !(*tau0.fixed >= 0.0 && *tau0.fixed <= 1.0)) {
        throw ConfigError("tau0", "must lie in [0, 1] or be \"auto\"");
    }
    if (methods.empty()) throw ConfigError("methods", "must name at least one method");
    for (std::size_t a = 0; a < methods.size(); ++a) {
        for (std::size_t b = a + 1; b < methods.size(); ++b) {
            if (methods[a] == methods[b]) throw ConfigError("methods", "duplicate method");
        }
    }
    for (Method m : methods) {
        if (m != Method::PHT && nResamples < kMinResamples) {
            throw ConfigError("n_resamples", "must be at least " + std::to_string(kMinResamples));
        }
    }
}

// Per-replicate outcome of one method.
struct Cell {
    bool rejected = false;
    bool failed = false;
    double pValue = 1.0;
    double z = 0.0;
    double tau0 = 0.0;
};

constexpr std::uint64_t kPhtStream = 101;
constexpr std::uint64_t kBaselineStream = 102;

Cell run_method(Method m, const SampleMatrix& x, const SampleMatrix& y, double alpha,
                const Tau0Choice& tau0, std::size_t nResamples, PooledWeighting weighting,
                Centering centering, std::uint64_t replicateSeed) {
    Cell cell;
    try {
        if (m == Method::PHT) {
            TwoSampleOptions options;
            options.weighting = weighting;
            options.centering = centering;
            options.seed = substream_seed(replicateSeed, kPhtStream);
            const TestOutcome out = test_two_sample(x, y, tau0, options);
            cell.rejected = out.rejects(alpha);
            cell.pValue = out.pValue;
            cell.z = out.z;
            cell.tau0 = out.tau0Used;
        } else {
            const BaselineMethod bm = m == Method::UHT ? BaselineMethod::UHT : BaselineMethod::DHT;
            const auto out = calibrate(bm, x, y, nResamples,
                                       substream_seed(replicateSeed, kBaselineStream +
                                                                         static_cast<std::uint64_t>(m)));
            cell.pValue = out.pValue;
            cell.rejected = out.pValue <= alpha;
        }
    } catch (const SingularBlock&) {
        cell.failed = true;
    } catch (const DegenerateVariance&) {
        cell.failed = true;
    }
    return cell;
}

std::vector<MethodSummary> summarize(const std::vector<Method>& methods, std::size_t reps,
                                     const std::vector<Cell>& cells) {
    std::vector<MethodSummary> out;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        MethodSummary s;
        s.method = methods[mi];
        s.reps = reps;
        s.rejected.resize(reps);
        s.pValues.resize(reps);
        if (s.method == Method::PHT) {
            s.z.resize(reps);
            s.tau0Used.resize(reps);
        }
        for (std::size_t r = 0; r < reps; ++r) {
            const Cell& c = cells[r * methods.size() + mi];
            s.rejected[r] = c.rejected ? 1 : 0;
            s.pValues[r] = c.pValue;
            s.rejections += c.rejected ? 1 : 0;
            s.failures += c.failed ? 1 : 0;
            if (s.method == Method::PHT) {
                s.z[r] = c.z;
                s.tau0Used[r] = c.tau0;
            }
        }
        s.rate = static_cast<double>(s.rejections) / static_cast<double>(reps);
        s.mcSe = mc_standard_error(s.rate, reps);
        out.push_back(std::move(s));
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void SimConfig::validate() const {
    if (n1 < 5) throw ConfigError("n1", "must be at least 5");
    if (n2 < 5) throw ConfigError("n2", "must be at least 5");
    if (p < 1) throw ConfigError("p", "must be at least 1");
    CovModel m = model;
    m.p = p;
    m.validate();
    if (!(mean.beta >= 0.0 && mean.beta <= 1.0)) throw ConfigError("beta", "must lie in [0, 1]");
    if (!std::isfinite(mean.kappa)) throw ConfigError("kappa", "must be finite");
    if (!(dist.a > 2.0 && dist.b > 0.0)) {
        throw ConfigError("dist", "double-Pareto needs a > 2 and b > 0 for unit variance");
    }
    validate_common(alpha, reps, tau0, methods, nResamples);
}

void ResampleConfig::validate() const {
    if (n1 < 5) throw ConfigError("n1", "must be at least 5");
    if (n2 < 5) throw ConfigError("n2", "must be at least 5");
    validate_common(alpha, reps, tau0, methods, nResamples);
}

SimReport run_design(const SimConfig& config, const RunOptions& run) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    CovModel model = config.model;
    model.p = config.p;
    const Covariance cov = build_sigma(model, config.seed);
    const std::size_t nm = config.methods.size();
    std::vector<Cell> cells(config.reps * nm);

    parallel_for(config.reps, run.threads, [&](std::size_t r) {
        const std::uint64_t seed = substream_seed(config.seed, r);
        Rng innovations = make_rng(seed, 0);
        Rng meanRng = make_rng(seed, 1);
        const Vector mu2 = config.mean.draw(config.p, meanRng);
        const SampleMatrix x = generate_sample(
            cov, config.dist, Vector::Zero(static_cast<Eigen::Index>(config.p)), config.n1,
            innovations);
        const SampleMatrix y = generate_sample(cov, config.dist, mu2, config.n2, innovations);
        for (std::size_t mi = 0; mi < nm; ++mi) {
            cells[r * nm + mi] =
                run_method(config.methods[mi], x, y, config.alpha, config.tau0, config.nResamples,
                           config.weighting, config.centering, seed);
        }
    });

    SimReport report;
    report.config = config;
    report.config.model.p = config.p;
    report.methods = summarize(config.methods, config.reps, cells);
    report.wallSeconds = seconds_since(start);
    return report;
}

SimReport run_size(const SimConfig& config, const RunOptions& run) {
    if (config.mean.kappa != 0.0) throw ConfigError("kappa", "size runs require kappa = 0");
    return run_design(config, run);
}

std::vector<SimReport> run_power(const SimConfig& config, const std::vector<double>& kappaGrid,
                                 const RunOptions& run) {
    if (kappaGrid.empty()) throw ConfigError("kappa_grid", "must contain at least one value");
    std::vector<SimReport> out;
    for (double kappa : kappaGrid) {
        if (kappa > 0.0 && !(config.mean.beta > 0.0)) {
            throw ConfigError("beta", "must be positive when kappa > 0");
        }
        SimConfig c = config;
        c.mean.kappa = kappa;
        out.push_back(run_design(c, run));
    }
    return out;
}

PositiveRateReport run_false_true_positive(const SampleMatrix& xPool, const SampleMatrix& yPool,
                                           const ResampleConfig& config, const RunOptions& run) {
    config.validate();
    if (xPool.p() != yPool.p()) throw InvalidInput("pools differ in dimension");
    const std::size_t need = config.n1 + config.n2;
    if (xPool.n() + yPool.n() < need) {
        throw InvalidInput("pooled data has " + std::to_string(xPool.n() + yPool.n()) +
                           " rows, need " + std::to_string(need));
    }
    if (xPool.n() < config.n1 || yPool.n() < config.n2) {
        throw InvalidInput("pools are smaller than the requested subclass sizes");
    }
    const auto start = std::chrono::steady_clock::now();
    Matrix stacked(static_cast<Eigen::Index>(xPool.n() + yPool.n()),
                   static_cast<Eigen::Index>(xPool.p()));
    stacked << xPool.values(), yPool.values();
    const SampleMatrix pooled(std::move(stacked));

    const std::size_t nm = config.methods.size();
    std::vector<Cell> nullCells(config.reps * nm);
    std::vector<Cell> altCells(config.reps * nm);
    parallel_for(config.reps, run.threads, [&](std::size_t r) {
        const std::uint64_t seed = substream_seed(config.seed, r);
        Rng rng = make_rng(seed, 0);
        // Null: a random partition of pooled rows into two subclasses.
        std::vector<std::size_t> order(pooled.n());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        const std::span<const std::size_t> idx(order);
        const SampleMatrix a = pooled.select_rows(idx.first(config.n1));
        const SampleMatrix b = pooled.select_rows(idx.subspan(config.n1, config.n2));
        // Alternative: one subclass from each pool.
        const SampleMatrix c =
            xPool.select_rows(sample_without_replacement(xPool.n(), config.n1, rng));
        const SampleMatrix d =
            yPool.select_rows(sample_without_replacement(yPool.n(), config.n2, rng));
        for (std::size_t mi = 0; mi < nm; ++mi) {
            nullCells[r * nm + mi] =
                run_method(config.methods[mi], a, b, config.alpha, config.tau0, config.nResamples,
                           PooledWeighting::Verbatim, config.centering, substream_seed(seed, 11));
            altCells[r * nm + mi] =
                run_method(config.methods[mi], c, d, config.alpha, config.tau0, config.nResamples,
                           PooledWeighting::Verbatim, config.centering, substream_seed(seed, 12));
        }
    });
    PositiveRateReport report;
    report.config = config;
    report.falsePositive = summarize(config.methods, config.reps, nullCells);
    report.truePositive = summarize(config.methods, config.reps, altCells);
    report.wallSeconds = seconds_since(start);
    return report;
}

}  // namespace pht
