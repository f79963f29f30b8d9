#pragma once

#include "pskqkd/quadrature.hpp"
#include "pskqkd/types.hpp"

#include <cstdint>
#include <vector>

namespace pskqkd {

enum class Reconciliation { direct, reverse };

struct KeyRateResult {
    double rate = 0.0; // bits per transmission; may be negative without postselection
    Reconciliation mode = Reconciliation::direct;
    bool postselected = false;
    double accepted_fraction = 1.0;
    double r_max = 0.0;
    double iab = 0.0;             // integral of marginal * I_AB(beta)
    double eve_information = 0.0; // I_AE (direct) or density-weighted mean I_BE (reverse)
    double achieved_delta = -1.0; // |rate(grid) - rate(half-step grid)| when checked
};

// Direct reconciliation. Without postselection G = iab_total - iae_direct, reported
// raw even when negative. With postselection the integrand is the positive part
// max(I_AB(beta) - I_AE, 0); each angular line is integrated from the acceptance
// radius outward so the rate and accepted fraction converge at spectral accuracy
// instead of stalling on the boundary kink.
KeyRateResult keyrate_direct(const ProtocolParams& params, const QuadratureGrid& grid,
                             bool postselect);

// Same postselected rate evaluated as max(..., 0) straight on the product grid.
// Kept as an independent route; agrees with keyrate_direct to within the boundary
// kink noise (about 2x the default convergence target).
double keyrate_direct_positive_grid(const ProtocolParams& params, const QuadratureGrid& grid);

// Reverse reconciliation: G = integral of marginal * (I_AB - I_BE). Postselection
// restricts to the positive part; the integrand is already nonnegative up to
// rounding, so this should not change the value (verified by tests, not assumed).
KeyRateResult keyrate_reverse(const ProtocolParams& params, const QuadratureGrid& grid,
                              bool postselect);

// Acceptance threshold along rays: smallest r with I_AB(r e^{i theta}) >= I_AE,
// located by a coarse radial scan (step 0.05) plus bisection. Rays that never reach
// the threshold below r_max are flagged not-found (the rejected region is open in
// that direction).
struct PostselectionBoundary {
    std::vector<double> angles;
    std::vector<double> radii;
    std::vector<std::uint8_t> found;
    ProtocolParams params;

    bool empty() const; // true when no sampled ray crosses
};

// Angles default to the grid's angular midpoints over one sector.
PostselectionBoundary psa_boundary(const ProtocolParams& params, const QuadratureGrid& grid);
PostselectionBoundary psa_boundary(const ProtocolParams& params, const QuadratureGrid& grid,
                                   const std::vector<double>& angles);

// Re-evaluates a result on a half-step grid and fills achieved_delta.
KeyRateResult with_convergence_check(KeyRateResult base, const ProtocolParams& params,
                                     const QuadratureGrid& grid);

namespace detail {
// Boundary radius for one ray, bisected to the given half-width; returns false when
// the ray never crosses below r_max.
bool acceptance_radius(const ProtocolParams& params, const std::vector<PhaseSpacePoint>& means,
                       double iae, double theta, double r_max, double tol, double* out);
} // namespace detail

} // namespace pskqkd
