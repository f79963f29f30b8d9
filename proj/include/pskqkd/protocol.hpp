#pragma once

#include "pskqkd/types.hpp"

namespace pskqkd {

// Letter k in 1..N maps to amplitude a * exp(i 2 pi k / N); k = N sits at phase 0.
PhaseSpacePoint alphabet_state(int k, const ProtocolParams& params);

// Inner product <alpha|beta> of two coherent states; |result|^2 = exp(-|alpha-beta|^2).
std::complex<double> coherent_overlap(PhaseSpacePoint alpha, PhaseSpacePoint beta);

SplitStates beam_split(int k, const ProtocolParams& params);

// Nearest-letter decision: the l maximizing |<alpha_l|beta>|^2, which at fixed |alpha_l|
// reduces to maximizing Re(conj(alpha_l) * beta). Exact score ties (sector boundaries,
// the origin) go to the smallest index so repeated runs agree bit for bit.
int decode(PhaseSpacePoint beta, const ProtocolParams& params);

} // namespace pskqkd
