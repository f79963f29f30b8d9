#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace pskqkd {

// Heterodyne outcomes and coherent-state amplitudes live in the same complex
// plane, expressed in shot-noise units (each quadrature has vacuum variance 1/2).
using PhaseSpacePoint = std::complex<double>;

struct ProtocolParams {
    int letters = 2;            // N, size of the phase alphabet
    double amplitude = 1.0;     // a, |alpha| of every letter; mean photon number a^2
    double transmittance = 1.0; // eta, fraction of power reaching the receiver

    void validate() const {
        if (letters < 2)
            throw std::invalid_argument("letters must be >= 2, got " + std::to_string(letters));
        if (!(amplitude >= 0.0))
            throw std::invalid_argument("amplitude must be >= 0");
        if (!(transmittance >= 0.0 && transmittance <= 1.0))
            throw std::invalid_argument("transmittance must be in [0, 1]");
    }
};

struct SplitStates {
    PhaseSpacePoint bob; // sqrt(eta) * alpha_k
    PhaseSpacePoint eve; // sqrt(1 - eta) * alpha_k
};

} // namespace pskqkd
