#pragma once

#include "pskqkd/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace pskqkd {

struct QuadratureGrid; // quadrature.hpp

struct PosteriorDistribution {
    std::vector<double> probs; // p_k(beta), index 0 holds letter 1
    PhaseSpacePoint at;
};

// Heterodyne outcome density (1/pi) exp(-|beta - sqrt(eta) alpha_k|^2).
double likelihood(PhaseSpacePoint beta, int k, const ProtocolParams& params);

// Equal-prior mixture (1/N) sum_k likelihood; invariant under 2 pi / N rotations.
double marginal(PhaseSpacePoint beta, const ProtocolParams& params);

PosteriorDistribution posterior(PhaseSpacePoint beta, const ProtocolParams& params);

// -sum p log2 p with 0 log 0 = 0. Throws if a component is negative beyond rounding
// noise; mildly negative values are treated as 0.
double shannon_entropy(std::span<const double> probs);

// log2(N) - H(posterior(beta)), clamped to [0, log2 N].
double iab_pointwise(PhaseSpacePoint beta, const ProtocolParams& params);

// Integral of marginal * iab_pointwise over the truncated plane.
double iab_total(const ProtocolParams& params, const QuadratureGrid& grid);

namespace detail {

// Received letter means sqrt(eta) * alpha_k; index 0 holds letter 1. Precomputed once
// per parameter set by the integration kernels.
std::vector<PhaseSpacePoint> letter_means(const ProtocolParams& params);

// Posterior written into out[0..n-1]; returns the marginal density. Exponents are
// shifted by their maximum before exponentiation so large |beta| cannot underflow
// every term at once.
inline double posterior_raw(PhaseSpacePoint beta, const PhaseSpacePoint* means, int n,
                            double* out) {
    double max_exp = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double e = -std::norm(beta - means[i]);
        out[i] = e;
        if (e > max_exp)
            max_exp = e;
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::exp(out[i] - max_exp);
        sum += out[i];
    }
    const double inv_sum = 1.0 / sum;
    for (int i = 0; i < n; ++i)
        out[i] *= inv_sum;
    // marginal = (1/N) sum_k (1/pi) e^{e_k}
    constexpr double inv_pi = 0.31830988618379067;
    return inv_pi * std::exp(max_exp) * sum / n;
}

// log2(N) - H(p) for an already normalized posterior, clamped to [0, log2 N].
inline double iab_from_probs(const double* p, int n, double log2n) {
    double h = 0.0;
    for (int i = 0; i < n; ++i)
        if (p[i] > 0.0)
            h -= p[i] * std::log2(p[i]);
    return std::clamp(log2n - h, 0.0, log2n);
}

double posterior_into(PhaseSpacePoint beta, const ProtocolParams& params, double* out);

} // namespace detail

} // namespace pskqkd
