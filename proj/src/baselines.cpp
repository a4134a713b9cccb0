#include "pht/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pht/random.hpp"

namespace pht {

std::string_view to_string(BaselineMethod m) noexcept {
    return m == BaselineMethod::UHT ? "UHT" : "DHT";
}

std::string_view to_string(Calibration c) noexcept {
    return c == Calibration::SignFlip ? "signflip" : "permutation";
}

namespace {

void check_mu0(const SampleMatrix& x, const Vector& mu0) {
    if (static_cast<std::size_t>(mu0.size()) != x.p()) throw InvalidInput("mu0 length mismatch");
    if (x.n() < 1) throw InvalidInput("need at least one observation");
}

void check_resamples(std::size_t nResamples) {
    if (nResamples < kMinResamples) {
        throw InvalidInput("resampling calibration needs at least " +
                           std::to_string(kMinResamples) + " resamples");
    }
}

Vector column_variances(const SampleMatrix& x) {
    const Matrix c = x.values().rowwise() - x.column_means().transpose();
    return c.colwise().squaredNorm().transpose() / (static_cast<double>(x.n()) - 1.0);
}

double p_value(std::size_t atLeast, std::size_t nResamples) {
    return (1.0 + static_cast<double>(atLeast)) / (static_cast<double>(nResamples) + 1.0);
}

}  // namespace

double uht_statistic(const SampleMatrix& x, const Vector& mu0) {
    check_mu0(x, mu0);
    return static_cast<double>(x.n()) * (x.column_means() - mu0).squaredNorm();
}

double dht_statistic(const SampleMatrix& x, const Vector& mu0) {
    check_mu0(x, mu0);
    if (x.n() < 2) throw InsufficientSample("DHT needs n >= 2");
    const Vector var = column_variances(x);
    const Vector d = x.column_means() - mu0;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        if (!(var(j) > 0.0)) {
            throw DegenerateVariance("coordinate " + std::to_string(j) + " has zero variance");
        }
        acc += d(j) * d(j) / var(j);
    }
    return static_cast<double>(x.n()) * acc;
}

double uht_statistic_two(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.p() != y.p()) throw InvalidInput("groups differ in dimension");
    const double n1 = static_cast<double>(x.n());
    const double n2 = static_cast<double>(y.n());
    return n1 * n2 / (n1 + n2) * (x.column_means() - y.column_means()).squaredNorm();
}

double dht_statistic_two(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.p() != y.p()) throw InvalidInput("groups differ in dimension");
    if (x.n() < 2 || y.n() < 2) throw InsufficientSample("DHT needs two observations per group");
    const double n1 = static_cast<double>(x.n());
    const double n2 = static_cast<double>(y.n());
    const Vector pooled =
        ((n1 - 1.0) * column_variances(x) + (n2 - 1.0) * column_variances(y)) / (n1 + n2 - 2.0);
    const Vector d = x.column_means() - y.column_means();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        if (!(pooled(j) > 0.0)) {
            throw DegenerateVariance("coordinate " + std::to_string(j) + " has zero variance");
        }
        acc += d(j) * d(j) / pooled(j);
    }
    return n1 * n2 / (n1 + n2) * acc;
}

double calibrate_sign_flip(const OneSampleStatistic& statistic, const SampleMatrix& x,
                           const Vector& mu0, std::size_t nResamples, std::uint64_t seed,
                           double* observed) {
    check_mu0(x, mu0);
    check_resamples(nResamples);
    const double obs = statistic(x, mu0);
    if (observed) *observed = obs;
    const Matrix centred = x.values().rowwise() - mu0.transpose();
    Rng rng = make_rng(seed, 0);
    std::bernoulli_distribution coin(0.5);
    Matrix flipped(centred.rows(), centred.cols());
    std::size_t atLeast = 0;
    for (std::size_t r = 0; r < nResamples; ++r) {
        for (Eigen::Index s = 0; s < centred.rows(); ++s) {
            flipped.row(s) = coin(rng) ? centred.row(s) : Eigen::RowVectorXd(-centred.row(s));
        }
        const SampleMatrix resampled(Matrix(flipped.rowwise() + mu0.transpose()));
        if (statistic(resampled, mu0) >= obs) ++atLeast;
    }
    return p_value(atLeast, nResamples);
}

double calibrate_permutation(const TwoSampleStatistic& statistic, const SampleMatrix& x,
                             const SampleMatrix& y, std::size_t nResamples, std::uint64_t seed,
                             double* observed) {
    if (x.p() != y.p()) throw InvalidInput("groups differ in dimension");
    check_resamples(nResamples);
    const double obs = statistic(x, y);
    if (observed) *observed = obs;
    const std::size_t n1 = x.n();
    const std::size_t total = x.n() + y.n();
    Matrix pooled(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(x.p()));
    pooled << x.values(), y.values();
    const SampleMatrix all(std::move(pooled));

    Rng rng = make_rng(seed, 0);
    std::vector<std::size_t> order(total);
    std::size_t atLeast = 0;
    for (std::size_t r = 0; r < nResamples; ++r) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        const std::span<const std::size_t> idx(order);
        const SampleMatrix px = all.select_rows(idx.first(n1));
        const SampleMatrix py = all.select_rows(idx.subspan(n1));
        if (statistic(px, py) >= obs) ++atLeast;
    }
    return p_value(atLeast, nResamples);
}

BaselineOutcome calibrate(BaselineMethod method, const SampleMatrix& x, const Vector& mu0,
                          std::size_t nResamples, std::uint64_t seed) {
    BaselineOutcome out;
    out.method = method;
    out.calibration = Calibration::SignFlip;
    out.nResamples = nResamples;
    const OneSampleStatistic fn = method == BaselineMethod::UHT ? OneSampleStatistic(uht_statistic)
                                                                : OneSampleStatistic(dht_statistic);
    out.pValue = calibrate_sign_flip(fn, x, mu0, nResamples, seed, &out.statistic);
    return out;
}

BaselineOutcome calibrate(BaselineMethod method, const SampleMatrix& x, const SampleMatrix& y,
                          std::size_t nResamples, std::uint64_t seed) {
    BaselineOutcome out;
    out.method = method;
    out.calibration = Calibration::Permutation;
    out.nResamples = nResamples;
    const TwoSampleStatistic fn = method == BaselineMethod::UHT
                                      ? TwoSampleStatistic(uht_statistic_two)
                                      : TwoSampleStatistic(dht_statistic_two);
    out.pValue = calibrate_permutation(fn, x, y, nResamples, seed, &out.statistic);
    return out;
}

}  // namespace pht
