#include "pskqkd/info.hpp"

#include "pskqkd/protocol.hpp"
#include "pskqkd/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace pskqkd {

namespace detail {

std::vector<PhaseSpacePoint> letter_means(const ProtocolParams& params) {
    const double root_eta = std::sqrt(params.transmittance);
    std::vector<PhaseSpacePoint> means(params.letters);
    for (int k = 1; k <= params.letters; ++k)
        means[k - 1] = root_eta * alphabet_state(k, params);
    return means;
}

double posterior_into(PhaseSpacePoint beta, const ProtocolParams& params, double* out) {
    const auto means = letter_means(params);
    return posterior_raw(beta, means.data(), params.letters, out);
}

} // namespace detail

double likelihood(PhaseSpacePoint beta, int k, const ProtocolParams& params) {
    const PhaseSpacePoint mean = beam_split(k, params).bob;
    return std::exp(-std::norm(beta - mean)) / std::numbers::pi;
}

double marginal(PhaseSpacePoint beta, const ProtocolParams& params) {
    params.validate();
    const auto means = detail::letter_means(params);
    double sum = 0.0;
    for (const auto& mean : means)
        sum += std::exp(-std::norm(beta - mean));
    return sum / (std::numbers::pi * params.letters);
}

PosteriorDistribution posterior(PhaseSpacePoint beta, const ProtocolParams& params) {
    params.validate();
    PosteriorDistribution d;
    d.probs.resize(params.letters);
    d.at = beta;
    detail::posterior_into(beta, params, d.probs.data());
    return d;
}

double shannon_entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p < -1e-12)
            throw std::domain_error("negative probability " + std::to_string(p));
        if (p > 0.0)
            h -= p * std::log2(p);
    }
    return h;
}

double iab_pointwise(PhaseSpacePoint beta, const ProtocolParams& params) {
    params.validate();
    const auto means = detail::letter_means(params);
    std::vector<double> p(params.letters);
    detail::posterior_raw(beta, means.data(), params.letters, p.data());
    return detail::iab_from_probs(p.data(), params.letters,
                                  std::log2(static_cast<double>(params.letters)));
}

double iab_total(const ProtocolParams& params, const QuadratureGrid& grid) {
    params.validate();
    const auto means = detail::letter_means(params);
    const int n = params.letters;
    const double log2n = std::log2(static_cast<double>(n));
    std::vector<double> scratch(n);
    return integrate_phase_space(
        [&](PhaseSpacePoint beta) {
            const double m = detail::posterior_raw(beta, means.data(), n, scratch.data());
            return m * detail::iab_from_probs(scratch.data(), n, log2n);
        },
        params, grid);
}

} // namespace pskqkd
