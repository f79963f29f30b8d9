#pragma once

#include "pskqkd/keyrate.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace pskqkd {

struct RateMode {
    Reconciliation reconciliation = Reconciliation::direct;
    bool postselected = true;
};

struct AmplitudeSearch {
    double lo = 0.05;
    double hi = 5.0;
    double step = 0.05;
    double tol = 1e-3; // golden-section amplitude tolerance
};

struct SweepPoint {
    double eta = 0.0;
    int letters = 0;
    double optimal_amplitude = 0.0; // NaN when no amplitude produced a nonzero rate
    double rate = 0.0;
    double accepted_fraction = 1.0;
    // Second local maximum within 1e-4 bits of the best, when the rate curve has one
    // (the near-degenerate double-peak regime).
    std::optional<std::pair<double, double>> secondary_maximum;
    std::string error; // nonempty when this sweep point failed
};

SweepPoint optimize_amplitude(double eta, int letters, RateMode mode, const QuadratureGrid& grid,
                              const AmplitudeSearch& search = {});

std::vector<SweepPoint> sweep_eta(int letters, RateMode mode, std::span<const double> etas,
                                  const QuadratureGrid& grid, const AmplitudeSearch& search = {});

struct CrossingRecord {
    int n_low = 0;
    int n_high = 0;
    double eta_star = 0.0;
    double bracket_width = 0.0; // final bisection interval width
    double gap_low = 0.0;       // optimized-rate difference at the original bracket ends
    double gap_high = 0.0;
};

// Transmittance where the amplitude-optimized rate curves of n_low and n_high letters
// intersect. The rate difference must change sign across the bracket; amplitude is
// re-optimized at every probe. Throws std::runtime_error (with endpoint values) when
// the bracket does not straddle a crossing.
CrossingRecord find_crossing(int n_low, int n_high, RateMode mode,
                             std::pair<double, double> bracket, const QuadratureGrid& grid,
                             const AmplitudeSearch& search = {});

namespace detail {

struct ScalarMaximum {
    double x = 0.0;
    double value = 0.0;
    bool all_zero = false;
    std::optional<std::pair<double, double>> secondary;
};

// Coarse scan on lo..hi inclusive with the given step, then golden-section refinement
// (to xtol) around the best coarse point and around every coarse local maximum within
// 1e-3 of the best. Never returns less than the best coarse value.
ScalarMaximum maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              double step, double xtol);

} // namespace detail

} // namespace pskqkd
