#include "pskqkd/sweep.hpp"

#include <cmath>
#include <limits>

namespace pskqkd {

namespace detail {

namespace {

// Golden-section maximization on [lo, hi]; returns the midpoint of the final bracket.
double golden_max(const std::function<double(double)>& f, double lo, double hi, double xtol) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > xtol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

ScalarMaximum maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              double step, double xtol) {
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1.5));
    std::vector<double> xs(count), vals(count);
    for (int i = 0; i < count; ++i) {
        xs[i] = std::min(lo + i * step, hi);
        vals[i] = f(xs[i]);
    }
    double vmax = vals[0];
    for (double v : vals)
        vmax = std::max(vmax, v);

    ScalarMaximum out;
    if (vmax == 0.0) {
        bool every_zero = true;
        for (double v : vals)
            every_zero = every_zero && v == 0.0;
        if (every_zero) {
            out.all_zero = true;
            out.x = std::numeric_limits<double>::quiet_NaN();
            out.value = 0.0;
            return out;
        }
    }

    // Refine every coarse local maximum competitive within 1e-3 bits of the best;
    // the rate curve can carry two near-equal peaks that trade places as parameters
    // move, and refining only the tallest coarse sample can pick the wrong one.
    struct Candidate {
        double x, value;
    };
    std::vector<Candidate> cands;
    for (int i = 0; i < count; ++i) {
        const double left = i > 0 ? vals[i - 1] : -std::numeric_limits<double>::infinity();
        const double right =
            i + 1 < count ? vals[i + 1] : -std::numeric_limits<double>::infinity();
        if (vals[i] < left || vals[i] < right || vals[i] < vmax - 1e-3)
            continue;
        const double blo = i > 0 ? xs[i - 1] : xs[i];
        const double bhi = i + 1 < count ? xs[i + 1] : xs[i];
        double x_ref = xs[i];
        double v_ref = vals[i];
        if (bhi > blo) {
            const double xg = golden_max(f, blo, bhi, xtol);
            const double vg = f(xg);
            if (vg > v_ref) {
                x_ref = xg;
                v_ref = vg;
            }
        }
        cands.push_back({x_ref, v_ref});
    }

    size_t best = 0;
    for (size_t i = 1; i < cands.size(); ++i)
        if (cands[i].value > cands[best].value)
            best = i;
    out.x = cands[best].x;
    out.value = cands[best].value;
    for (size_t i = 0; i < cands.size(); ++i) {
        if (i == best || std::abs(cands[i].x - out.x) <= 1.5 * step)
            continue; // same peak reached from a neighboring coarse bracket
        if (cands[i].value >= out.value - 1e-4 &&
            (!out.secondary || cands[i].value > out.secondary->second))
            out.secondary = {cands[i].x, cands[i].value};
    }
    return out;
}

} // namespace detail

namespace {

double rate_at(double eta, int letters, double amplitude, RateMode mode,
               const QuadratureGrid& grid) {
    const ProtocolParams params{letters, amplitude, eta};
    if (mode.reconciliation == Reconciliation::direct)
        return keyrate_direct(params, grid, mode.postselected).rate;
    return keyrate_reverse(params, grid, mode.postselected).rate;
}

} // namespace

SweepPoint optimize_amplitude(double eta, int letters, RateMode mode, const QuadratureGrid& grid,
                              const AmplitudeSearch& search) {
    SweepPoint point;
    point.eta = eta;
    point.letters = letters;
    const auto rate = [&](double a) { return rate_at(eta, letters, a, mode, grid); };
    const detail::ScalarMaximum m =
        detail::maximize_scalar(rate, search.lo, search.hi, search.step, search.tol);
    point.optimal_amplitude = m.x;
    point.rate = m.value;
    point.secondary_maximum = m.secondary;
    if (!m.all_zero) {
        const ProtocolParams params{letters, m.x, eta};
        if (mode.reconciliation == Reconciliation::direct && mode.postselected)
            point.accepted_fraction = keyrate_direct(params, grid, true).accepted_fraction;
    }
    return point;
}

std::vector<SweepPoint> sweep_eta(int letters, RateMode mode, std::span<const double> etas,
                                  const QuadratureGrid& grid, const AmplitudeSearch& search) {
    std::vector<SweepPoint> points;
    points.reserve(etas.size());
    for (double eta : etas) {
        try {
            points.push_back(optimize_amplitude(eta, letters, mode, grid, search));
        } catch (const std::exception& e) {
            SweepPoint failed;
            failed.eta = eta;
            failed.letters = letters;
            failed.optimal_amplitude = std::numeric_limits<double>::quiet_NaN();
            failed.rate = std::numeric_limits<double>::quiet_NaN();
            failed.error = e.what();
            points.push_back(std::move(failed));
        }
    }
    return points;
}

CrossingRecord find_crossing(int n_low, int n_high, RateMode mode,
                             std::pair<double, double> bracket, const QuadratureGrid& grid,
                             const AmplitudeSearch& search) {
    auto gap = [&](double eta) {
        return optimize_amplitude(eta, n_low, mode, grid, search).rate -
               optimize_amplitude(eta, n_high, mode, grid, search).rate;
    };
    double lo = bracket.first;
    double hi = bracket.second;
    if (!(lo < hi))
        throw std::invalid_argument("crossing bracket must satisfy lo < hi");
    double glo = gap(lo);
    double ghi = gap(hi);
    CrossingRecord rec;
    rec.n_low = n_low;
    rec.n_high = n_high;
    rec.gap_low = glo;
    rec.gap_high = ghi;
    if (glo == 0.0) {
        rec.eta_star = lo;
        rec.bracket_width = 0.0;
        return rec;
    }
    if (ghi == 0.0) {
        rec.eta_star = hi;
        rec.bracket_width = 0.0;
        return rec;
    }
    if ((glo > 0.0) == (ghi > 0.0))
        throw std::runtime_error("no crossing bracketed: rate difference is " +
                                 std::to_string(glo) + " at eta=" + std::to_string(lo) + " and " +
                                 std::to_string(ghi) + " at eta=" + std::to_string(hi));
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        const double gm = gap(mid);
        if (gm == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    rec.eta_star = 0.5 * (lo + hi);
    rec.bracket_width = hi - lo;
    return rec;
}

} // namespace pskqkd
