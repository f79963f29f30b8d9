#include "pskqkd/montecarlo.hpp"

#include "pskqkd/eve.hpp"
#include "pskqkd/info.hpp"
#include "pskqkd/parallel.hpp"
#include "pskqkd/protocol.hpp"
#include "pskqkd/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace pskqkd {

namespace detail {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace detail

namespace {

constexpr std::uint64_t kBatchSize = 1ULL << 16;

double to_unit_interval(std::uint64_t x) {
    // (0, 1]: 53 significant bits, never 0 so log is safe
    return static_cast<double>((x >> 11) + 1) * 0x1p-53;
}

double plugin_conditional_entropy(const std::vector<std::uint64_t>& counts, int n,
                                  std::uint64_t total) {
    // H(k|l) = sum_l p(l) H(k | l)
    double h = 0.0;
    for (int l = 0; l < n; ++l) {
        std::uint64_t col = 0;
        for (int k = 0; k < n; ++k)
            col += counts[static_cast<size_t>(k) * n + l];
        if (col == 0)
            continue;
        for (int k = 0; k < n; ++k) {
            const std::uint64_t c = counts[static_cast<size_t>(k) * n + l];
            if (c == 0)
                continue;
            const double p = static_cast<double>(c) / static_cast<double>(total);
            h -= p * std::log2(static_cast<double>(c) / static_cast<double>(col));
        }
    }
    return h;
}

double plugin_standard_error(const std::vector<std::uint64_t>& counts, int n,
                             std::uint64_t total) {
    // Delta-method variance of the plug-in mutual information.
    std::vector<double> row(n, 0.0), col(n, 0.0);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const double p = static_cast<double>(counts[static_cast<size_t>(k) * n + l]) /
                             static_cast<double>(total);
            row[k] += p;
            col[l] += p;
        }
    double mean = 0.0, second = 0.0;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const double p = static_cast<double>(counts[static_cast<size_t>(k) * n + l]) /
                             static_cast<double>(total);
            if (p <= 0.0 || row[k] <= 0.0 || col[l] <= 0.0)
                continue;
            const double s = std::log2(p / (row[k] * col[l]));
            mean += p * s;
            second += p * s * s;
        }
    const double var = std::max(second - mean * mean, 0.0);
    return std::sqrt(var / static_cast<double>(total));
}

} // namespace

SimulationReport simulate(const SimulationConfig& config) {
    config.params.validate();
    if (config.samples == 0)
        throw std::invalid_argument("samples must be >= 1");
    const int n = config.params.letters;
    const auto means = detail::letter_means(config.params);
    const double log2n = std::log2(static_cast<double>(n));
    const bool select = config.postselection == McPostselection::direct_psa;
    const double iae = select ? iae_direct(config.params) : 0.0;
    const double inv_root2 = 1.0 / std::sqrt(2.0);

    // unbiased letter draw: reject the top sliver of the 64-bit range
    const std::uint64_t rem = UINT64_MAX % static_cast<std::uint64_t>(n) + 1;
    const bool no_reject = rem == static_cast<std::uint64_t>(n);
    const std::uint64_t reject_from = UINT64_MAX - rem + 1;

    const int batches = static_cast<int>((config.samples + kBatchSize - 1) / kBatchSize);
    std::vector<std::vector<std::uint64_t>> batch_counts(
        batches, std::vector<std::uint64_t>(static_cast<size_t>(n) * n, 0));
    std::vector<std::uint64_t> batch_accepted(batches, 0);

    parallel_for(batches, [&, probs = std::vector<double>(n)](int b) mutable {
        std::mt19937_64 engine(detail::splitmix64(config.seed + static_cast<std::uint64_t>(b)));
        const std::uint64_t begin = static_cast<std::uint64_t>(b) * kBatchSize;
        const std::uint64_t end = std::min(begin + kBatchSize, config.samples);
        auto& counts = batch_counts[b];
        std::uint64_t accepted = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            std::uint64_t u = engine();
            if (!no_reject)
                while (u >= reject_from)
                    u = engine();
            const int k = static_cast<int>(u % static_cast<std::uint64_t>(n)); // 0-based
            const double u1 = to_unit_interval(engine());
            const double u2 = to_unit_interval(engine());
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double g1 = radius * std::cos(2.0 * std::numbers::pi * u2);
            const double g2 = radius * std::sin(2.0 * std::numbers::pi * u2);
            const PhaseSpacePoint beta =
                means[k] + PhaseSpacePoint(g1 * inv_root2, g2 * inv_root2);
            const int l = decode(beta, config.params); // 1-based
            ++counts[static_cast<size_t>(k) * n + (l - 1)];
            if (select) {
                detail::posterior_raw(beta, means.data(), n, probs.data());
                if (detail::iab_from_probs(probs.data(), n, log2n) >= iae)
                    ++accepted;
            }
        }
        batch_accepted[b] = accepted;
    });

    SimulationReport report;
    report.samples = config.samples;
    report.letters = n;
    report.confusion.assign(static_cast<size_t>(n) * n, 0);
    for (int b = 0; b < batches; ++b) {
        for (size_t i = 0; i < report.confusion.size(); ++i)
            report.confusion[i] += batch_counts[b][i];
        report.accepted += batch_accepted[b];
    }
    std::uint64_t diag = 0;
    for (int k = 0; k < n; ++k)
        diag += report.confusion[static_cast<size_t>(k) * n + k];
    report.symbol_error_rate =
        1.0 - static_cast<double>(diag) / static_cast<double>(config.samples);
    report.empirical_iab =
        log2n - plugin_conditional_entropy(report.confusion, n, config.samples);
    report.iab_standard_error = plugin_standard_error(report.confusion, n, config.samples);
    report.accepted_fraction =
        select ? static_cast<double>(report.accepted) / static_cast<double>(config.samples) : 1.0;
    if (!select)
        report.accepted = config.samples;
    return report;
}

double empirical_confusion_entropy(const SimulationReport& report) {
    const double log2n = std::log2(static_cast<double>(report.letters));
    return log2n - plugin_conditional_entropy(report.confusion, report.letters, report.samples);
}

std::vector<double> decoded_channel_distribution(const ProtocolParams& params) {
    params.validate();
    const int n = params.letters;
    const double mu = std::sqrt(params.transmittance) * params.amplitude;
    // Angular density of the heterodyne outcome about the sent phase, radius
    // integrated out in closed form:
    //   A(theta) = (1/2pi) [e^{-mu^2} + sqrt(pi) t e^{-mu^2 sin^2 theta} erfc(-t)],
    //   t = mu cos theta.
    auto angular_density = [mu](double theta) {
        const double t = mu * std::cos(theta);
        const double s = mu * std::sin(theta);
        return (std::exp(-mu * mu) +
                std::sqrt(std::numbers::pi) * t * std::exp(-s * s) * std::erfc(-t)) /
               (2.0 * std::numbers::pi);
    };
    const GaussLegendreRule& gl = gauss_legendre(64);
    std::vector<double> q(n, 0.0);
    const double width = 2.0 * std::numbers::pi / n;
    for (int d = 0; d < n; ++d) {
        const double center = d * width;
        KahanSum sum;
        for (size_t i = 0; i < gl.x.size(); ++i)
            sum.add(gl.w[i] * angular_density(center + 0.5 * width * gl.x[i]));
        q[d] = 0.5 * width * sum.value();
    }
    return q;
}

double decoded_channel_error(const ProtocolParams& params) {
    return 1.0 - decoded_channel_distribution(params)[0];
}

double decoded_channel_information(const ProtocolParams& params) {
    const std::vector<double> q = decoded_channel_distribution(params);
    double h = 0.0;
    for (double p : q)
        if (p > 0.0)
            h -= p * std::log2(p);
    return std::log2(static_cast<double>(params.letters)) - h;
}

} // namespace pskqkd
