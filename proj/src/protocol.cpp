#include "pskqkd/protocol.hpp"

#include <cmath>
#include <numbers>

namespace pskqkd {

PhaseSpacePoint alphabet_state(int k, const ProtocolParams& params) {
    params.validate();
    if (k < 1 || k > params.letters)
        throw std::domain_error("letter index " + std::to_string(k) + " outside 1.." +
                                std::to_string(params.letters));
    // k = N means phase 0 exactly; reduce first so it does not pick up 2*pi rounding.
    const int m = k % params.letters;
    const double phi = 2.0 * std::numbers::pi * m / params.letters;
    return std::polar(params.amplitude, phi);
}

std::complex<double> coherent_overlap(PhaseSpacePoint alpha, PhaseSpacePoint beta) {
    const double na = std::norm(alpha);
    const double nb = std::norm(beta);
    const std::complex<double> cross = std::conj(alpha) * beta;
    return std::exp(std::complex<double>(-0.5 * (na + nb), 0.0) + cross);
}

SplitStates beam_split(int k, const ProtocolParams& params) {
    const PhaseSpacePoint alpha = alphabet_state(k, params);
    return {std::sqrt(params.transmittance) * alpha,
            std::sqrt(1.0 - params.transmittance) * alpha};
}

int decode(PhaseSpacePoint beta, const ProtocolParams& params) {
    params.validate();
    int best = 1;
    double best_score = 0.0;
    for (int l = 1; l <= params.letters; ++l) {
        const PhaseSpacePoint alpha = alphabet_state(l, params);
        const double score = alpha.real() * beta.real() + alpha.imag() * beta.imag();
        if (l == 1 || score > best_score) {
            best = l;
            best_score = score;
        }
    }
    return best;
}

} // namespace pskqkd
