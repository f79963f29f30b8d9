#include "pskqkd/eve.hpp"

#include "pskqkd/info.hpp"

#include <cmath>
#include <numbers>

namespace pskqkd {

namespace {

double entropy_bits_clamped(const double* p, int n, const char* what) {
    double h = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = p[i];
        if (v < -1e-8)
            throw std::runtime_error(std::string(what) + " has eigenvalue " +
                                     std::to_string(v) + " below -1e-8; inconsistent input");
        if (v <= 0.0)
            continue;
        h -= v * std::log2(v);
    }
    return h;
}

} // namespace

std::complex<double> eve_overlap(int k, const ProtocolParams& params) {
    params.validate();
    if (k < 1 || k > params.letters)
        throw std::domain_error("eve_overlap index outside 1..N");
    const double eps2 = params.amplitude * params.amplitude * (1.0 - params.transmittance);
    const double phi = 2.0 * std::numbers::pi * (k % params.letters) / params.letters;
    const std::complex<double> one_minus = 1.0 - std::polar(1.0, phi);
    return std::exp(-eps2 * one_minus);
}

SpectralWeights spectral_weights(const ProtocolParams& params) {
    params.validate();
    const int n = params.letters;
    std::vector<std::complex<double>> overlaps(n);
    for (int k = 1; k <= n; ++k)
        overlaps[k - 1] = eve_overlap(k, params);
    SpectralWeights sw;
    sw.weights.resize(n);
    sw.coeffs.resize(n);
    for (int m = 0; m < n; ++m) {
        std::complex<double> acc = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double phi = -2.0 * std::numbers::pi * m * (k % n) / n;
            acc += std::polar(1.0, phi) * overlaps[k - 1];
        }
        acc /= static_cast<double>(n);
        if (std::abs(acc.imag()) > 1e-10 || acc.real() < -1e-8)
            throw std::runtime_error("spectral weight " + std::to_string(m) +
                                     " inconsistent: " + std::to_string(acc.real()) + " + " +
                                     std::to_string(acc.imag()) + "i");
        sw.weights[m] = std::max(acc.real(), 0.0);
        sw.coeffs[m] = std::sqrt(sw.weights[m]);
    }
    return sw;
}

double iae_direct(const ProtocolParams& params) {
    const SpectralWeights sw = spectral_weights(params);
    return entropy_bits_clamped(sw.weights.data(), params.letters, "spectral weights");
}

EveContext::EveContext(const ProtocolParams& params)
    : params_(params),
      means_(detail::letter_means(params)),
      weights_(spectral_weights(params)),
      iae_(entropy_bits_clamped(weights_.weights.data(), params.letters, "spectral weights")) {
    const int n = params_.letters;
    phase_.resize(static_cast<size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int d = 0; d < n; ++d)
            phase_[static_cast<size_t>(k) * n + d] =
                std::polar(1.0, 2.0 * std::numbers::pi * ((k + 1) % n) * d / n);
}

EveContext::Workspace EveContext::make_workspace() const {
    Workspace ws;
    const int n = params_.letters;
    ws.probs.resize(n);
    ws.symbol.resize(n);
    ws.m.resize(n, n);
    return ws;
}

double EveContext::conditioned_entropy(const double* probs, Workspace& ws) const {
    const int n = params_.letters;
    // Circulant symbol of the posterior: f_d = sum_k p_k e^{i 2 pi k d / N}. Only the
    // lower triangle M_mn = c_m c_n f_{m-n} is filled; the solver reads that half.
    for (int d = 0; d < n; ++d) {
        std::complex<double> acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += probs[k] * phase_[static_cast<size_t>(k) * n + d];
        ws.symbol[d] = acc;
    }
    const auto& c = weights_.coeffs;
    for (int m = 0; m < n; ++m)
        for (int d = 0; d <= m; ++d)
            ws.m(m, d) = c[m] * c[d] * ws.symbol[m - d];
    ws.solver.compute(ws.m, Eigen::EigenvaluesOnly);
    if (ws.solver.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed on conditioned matrix");
    const auto& ev = ws.solver.eigenvalues();
    return entropy_bits_clamped(ev.data(), n, "conditioned matrix");
}

double EveContext::ibe(PhaseSpacePoint beta, Workspace& ws) const {
    detail::posterior_raw(beta, means_.data(), params_.letters, ws.probs.data());
    const double s = conditioned_entropy(ws.probs.data(), ws);
    const double v = iae_ - s;
    if (v < 0.0)
        return 0.0;
    return std::min(v, iae_);
}

EveConditionedMatrix eve_conditioned_matrix(PhaseSpacePoint beta, const ProtocolParams& params) {
    params.validate();
    const int n = params.letters;
    EveContext ctx(params);
    auto ws = ctx.make_workspace();
    detail::posterior_raw(beta, ctx.means().data(), n, ws.probs.data());
    const auto& c = ctx.weights().coeffs;
    EveConditionedMatrix out;
    out.entries = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        // rank-one term p_k v_k v_k^dagger with (v_k)_m = c_m e^{i 2 pi (k+1) m / N}
        for (int m = 0; m < n; ++m) {
            const std::complex<double> vm =
                c[m] * std::polar(1.0, 2.0 * std::numbers::pi * (k + 1) * m / n);
            for (int l = 0; l < n; ++l) {
                const std::complex<double> vl =
                    c[l] * std::polar(1.0, 2.0 * std::numbers::pi * (k + 1) * l / n);
                out.entries(m, l) += ws.probs[k] * vm * std::conj(vl);
            }
        }
    }
    return out;
}

double ibe_pointwise(PhaseSpacePoint beta, const ProtocolParams& params) {
    params.validate();
    EveContext ctx(params);
    auto ws = ctx.make_workspace();
    return ctx.ibe(beta, ws);
}

} // namespace pskqkd
