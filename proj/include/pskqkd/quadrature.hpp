#pragma once

#include "pskqkd/parallel.hpp"
#include "pskqkd/types.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace pskqkd {

// Polar product rule over one 2 pi / N sector: Gauss-Legendre radially, uniform
// midpoints angularly (optimal for periodic integrands). Integrals of rotation
// invariant functions over the plane are the sector result times N.
struct QuadratureGrid {
    int radial_nodes = 96;
    int angular_nodes = 64;        // per sector
    double r_max = 0.0;            // 0 = automatic sqrt(eta)*a + 6
    double convergence_target = 1e-5;

    void validate() const {
        if (radial_nodes < 32)
            throw std::invalid_argument("radial_nodes must be >= 32");
        if (angular_nodes < 16)
            throw std::invalid_argument("angular_nodes must be >= 16");
        if (r_max < 0.0)
            throw std::invalid_argument("r_max must be >= 0 (0 means automatic)");
        if (!(convergence_target > 0.0))
            throw std::invalid_argument("convergence_target must be positive");
    }

    // Truncation radius covering six standard deviations past the outermost letter
    // (sigma = 1/sqrt(2) per quadrature, so 6 in beta units is > 8 sigma).
    double effective_r_max(const ProtocolParams& params) const {
        const double required = std::sqrt(params.transmittance) * params.amplitude + 6.0;
        if (r_max == 0.0)
            return required;
        if (r_max < required)
            throw std::invalid_argument("r_max too small: need >= sqrt(eta)*a + 6");
        return r_max;
    }
};

struct GaussLegendreRule {
    std::vector<double> x; // nodes on [-1, 1], ascending
    std::vector<double> w;
};

// Nodes and weights by Newton iteration on the Legendre recurrence; exact to double
// roundoff for the orders used here.
const GaussLegendreRule& gauss_legendre(int n);

struct SectorRule {
    std::vector<double> r;     // radial nodes on [0, r_max]
    std::vector<double> wr;    // radial weights including the polar factor r dr
    std::vector<double> theta; // angular midpoints in [0, 2 pi / N)
    double dtheta = 0.0;
    double r_max = 0.0;
};

SectorRule sector_rule(const ProtocolParams& params, const QuadratureGrid& grid);

// N x integral over one sector of f(beta) r dr dtheta. f must be invariant under
// 2 pi / N rotations; it is copied per worker thread and may hold mutable scratch.
// Per-angle radial sums are written by index and merged serially, so the result is
// bit-identical at any thread count.
template <typename F>
double integrate_phase_space(F f, const ProtocolParams& params, const QuadratureGrid& grid) {
    params.validate();
    grid.validate();
    const SectorRule rule = sector_rule(params, grid);
    std::vector<double> line(rule.theta.size());
    parallel_for(static_cast<int>(rule.theta.size()),
                 [&rule, &line, g = std::move(f)](int j) mutable {
                     const PhaseSpacePoint dir = std::polar(1.0, rule.theta[j]);
                     KahanSum s;
                     for (size_t i = 0; i < rule.r.size(); ++i) {
                         const PhaseSpacePoint beta = rule.r[i] * dir;
                         const double v = g(beta);
                         if (!std::isfinite(v))
                             throw std::runtime_error(
                                 "non-finite integrand sample at beta = (" +
                                 std::to_string(beta.real()) + ", " +
                                 std::to_string(beta.imag()) + ")");
                         s.add(rule.wr[i] * v);
                     }
                     line[j] = s.value();
                 });
    KahanSum total;
    for (double v : line)
        total.add(v);
    return total.value() * rule.dtheta * params.letters;
}

} // namespace pskqkd
