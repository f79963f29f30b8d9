#pragma once

#include "pskqkd/types.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace pskqkd {

// Spectrum of the eavesdropper's unconditional state: the equal mixture of the N
// tapped coherent states is circulant in the letter basis, so its eigenvalues are the
// inverse discrete Fourier transform of the pairwise overlap sequence.
struct SpectralWeights {
    std::vector<double> weights; // |c_m|^2, m = 0..N-1, sum to 1
    std::vector<double> coeffs;  // c_m = sqrt(|c_m|^2), phase fixed real nonnegative
};

// <eps_N | eps_k> = exp(-a^2 (1-eta) (1 - e^{i 2 pi k / N})).
std::complex<double> eve_overlap(int k, const ProtocolParams& params);

SpectralWeights spectral_weights(const ProtocolParams& params);

// Holevo bound for direct reconciliation: entropy of the unconditional spectrum.
// The tapped states are pure, so the mixture entropy is the whole bound.
double iae_direct(const ProtocolParams& params);

struct EveConditionedMatrix {
    Eigen::MatrixXcd entries; // Hermitian, unit trace, PSD
};

// Density matrix of the tapped ensemble reweighted by the posterior at beta,
// expressed in the eigenbasis of the unconditional state:
// M_mn = sum_k p_k(beta) c_m c_n e^{i (2 pi / N) k (m - n)}.
EveConditionedMatrix eve_conditioned_matrix(PhaseSpacePoint beta, const ProtocolParams& params);

// Holevo bound for reverse reconciliation at outcome beta: iae_direct minus the von
// Neumann entropy of the conditioned matrix. The announced amplitude leaves an N-fold
// phase ambiguity whose members are unitarily equivalent, so evaluating at beta itself
// is exact. Result clamped to [0, iae_direct].
double ibe_pointwise(PhaseSpacePoint beta, const ProtocolParams& params);

// Per-parameter cache for the integral and simulation hot paths: letter means,
// spectral coefficients, the k x d phase table, and the direct bound.
class EveContext {
public:
    explicit EveContext(const ProtocolParams& params);

    const ProtocolParams& params() const { return params_; }
    const SpectralWeights& weights() const { return weights_; }
    double iae() const { return iae_; }
    const std::vector<PhaseSpacePoint>& means() const { return means_; }

    // Scratch owned by the calling thread; copyable so parallel bodies can carry one.
    struct Workspace {
        std::vector<double> probs;
        std::vector<std::complex<double>> symbol; // f_d = sum_k p_k e^{i 2 pi k d / N}
        Eigen::MatrixXcd m;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
    };
    Workspace make_workspace() const;

    // I_BE at beta; also leaves the posterior for beta in ws.probs.
    double ibe(PhaseSpacePoint beta, Workspace& ws) const;

    // Entropy of the conditioned matrix for an externally supplied posterior.
    double conditioned_entropy(const double* probs, Workspace& ws) const;

private:
    ProtocolParams params_;
    std::vector<PhaseSpacePoint> means_;
    SpectralWeights weights_;
    double iae_ = 0.0;
    std::vector<std::complex<double>> phase_; // phase_[k * N + d] = e^{i 2 pi k d / N}
};

} // namespace pskqkd
