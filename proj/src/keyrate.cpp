#include "pskqkd/keyrate.hpp"

#include "pskqkd/eve.hpp"
#include "pskqkd/info.hpp"
#include "pskqkd/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pskqkd {

namespace detail {

bool acceptance_radius(const ProtocolParams& params, const std::vector<PhaseSpacePoint>& means,
                       double iae, double theta, double r_max, double tol, double* out) {
    const int n = params.letters;
    const double log2n = std::log2(static_cast<double>(n));
    std::vector<double> probs(n);
    const PhaseSpacePoint dir = std::polar(1.0, theta);
    auto gap = [&](double r) {
        posterior_raw(r * dir, means.data(), n, probs.data());
        return iab_from_probs(probs.data(), n, log2n) - iae;
    };
    constexpr double scan_step = 0.05;
    if (gap(0.0) >= 0.0) {
        *out = 0.0;
        return true;
    }
    double lo = 0.0;
    double hi = -1.0;
    for (double r = scan_step; r < r_max + scan_step; r += scan_step) {
        const double rr = std::min(r, r_max);
        if (gap(rr) >= 0.0) {
            hi = rr;
            break;
        }
        lo = rr;
        if (rr >= r_max)
            break;
    }
    if (hi < 0.0)
        return false;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    *out = 0.5 * (lo + hi);
    return true;
}

} // namespace detail

namespace {

struct DirectSplitTotals {
    double rate = 0.0;
    double accepted = 0.0;
};

// Postselected DR integral with the radial domain cut at the acceptance radius per
// angle. The integrand vanishes continuously at the cut, so Gauss-Legendre on the
// accepted segment converges spectrally.
DirectSplitTotals direct_split(const ProtocolParams& params, const QuadratureGrid& grid,
                               double iae) {
    const SectorRule rule = sector_rule(params, grid);
    const auto means = detail::letter_means(params);
    const GaussLegendreRule& gl = gauss_legendre(grid.radial_nodes);
    const int n = params.letters;
    const double log2n = std::log2(static_cast<double>(n));
    const int na = static_cast<int>(rule.theta.size());
    std::vector<double> line_rate(na, 0.0), line_acc(na, 0.0);
    parallel_for(na, [&, probs = std::vector<double>(n)](int j) mutable {
        double r_star = 0.0;
        if (!detail::acceptance_radius(params, means, iae, rule.theta[j], rule.r_max, 1e-9,
                                       &r_star))
            return; // whole ray rejected
        const PhaseSpacePoint dir = std::polar(1.0, rule.theta[j]);
        const double half = 0.5 * (rule.r_max - r_star);
        const double mid = 0.5 * (rule.r_max + r_star);
        KahanSum rate, acc;
        for (int i = 0; i < grid.radial_nodes; ++i) {
            const double r = half * gl.x[i] + mid;
            const double w = half * gl.w[i] * r;
            const double m = detail::posterior_raw(r * dir, means.data(), n, probs.data());
            const double iab = detail::iab_from_probs(probs.data(), n, log2n);
            rate.add(w * m * (iab - iae));
            acc.add(w * m);
        }
        line_rate[j] = rate.value();
        line_acc[j] = acc.value();
    });
    KahanSum rate, acc;
    for (int j = 0; j < na; ++j) {
        rate.add(line_rate[j]);
        acc.add(line_acc[j]);
    }
    const double scale = rule.dtheta * params.letters;
    return {rate.value() * scale, acc.value() * scale};
}

} // namespace

KeyRateResult keyrate_direct(const ProtocolParams& params, const QuadratureGrid& grid,
                             bool postselect) {
    params.validate();
    grid.validate();
    KeyRateResult res;
    res.mode = Reconciliation::direct;
    res.postselected = postselect;
    res.r_max = grid.effective_r_max(params);
    const double iae = iae_direct(params);
    res.eve_information = iae;
    res.iab = iab_total(params, grid);
    if (!postselect) {
        res.rate = res.iab - iae;
        res.accepted_fraction = 1.0;
        return res;
    }
    const DirectSplitTotals t = direct_split(params, grid, iae);
    res.rate = t.rate;
    res.accepted_fraction = std::clamp(t.accepted, 0.0, 1.0);
    return res;
}

double keyrate_direct_positive_grid(const ProtocolParams& params, const QuadratureGrid& grid) {
    params.validate();
    grid.validate();
    const double iae = iae_direct(params);
    const auto means = detail::letter_means(params);
    const int n = params.letters;
    const double log2n = std::log2(static_cast<double>(n));
    return integrate_phase_space(
        [&, probs = std::vector<double>(n)](PhaseSpacePoint beta) mutable {
            const double m = detail::posterior_raw(beta, means.data(), n, probs.data());
            const double gap = detail::iab_from_probs(probs.data(), n, log2n) - iae;
            return gap > 0.0 ? m * gap : 0.0;
        },
        params, grid);
}

KeyRateResult keyrate_reverse(const ProtocolParams& params, const QuadratureGrid& grid,
                              bool postselect) {
    params.validate();
    grid.validate();
    KeyRateResult res;
    res.mode = Reconciliation::reverse;
    res.postselected = postselect;
    res.r_max = grid.effective_r_max(params);
    const SectorRule rule = sector_rule(params, grid);
    const EveContext ctx(params);
    const int n = params.letters;
    const double log2n = std::log2(static_cast<double>(n));
    const int na = static_cast<int>(rule.theta.size());
    // per-angle partial sums: rate, iab, mean ibe, accepted mass
    std::vector<std::array<double, 4>> line(na, {0.0, 0.0, 0.0, 0.0});
    parallel_for(na, [&, ws = ctx.make_workspace()](int j) mutable {
        const PhaseSpacePoint dir = std::polar(1.0, rule.theta[j]);
        KahanSum rate, iab_sum, ibe_sum, acc;
        for (size_t i = 0; i < rule.r.size(); ++i) {
            const PhaseSpacePoint beta = rule.r[i] * dir;
            const double ibe = ctx.ibe(beta, ws);
            const double m = detail::posterior_raw(beta, ctx.means().data(), n, ws.probs.data());
            const double iab = detail::iab_from_probs(ws.probs.data(), n, log2n);
            const double gap = iab - ibe;
            const double w = rule.wr[i];
            rate.add((postselect && gap <= 0.0) ? 0.0 : w * m * gap);
            iab_sum.add(w * m * iab);
            ibe_sum.add(w * m * ibe);
            if (!postselect || gap > 0.0)
                acc.add(w * m);
        }
        line[j] = {rate.value(), iab_sum.value(), ibe_sum.value(), acc.value()};
    });
    KahanSum rate, iab_sum, ibe_sum, acc;
    for (const auto& v : line) {
        rate.add(v[0]);
        iab_sum.add(v[1]);
        ibe_sum.add(v[2]);
        acc.add(v[3]);
    }
    const double scale = rule.dtheta * params.letters;
    res.rate = rate.value() * scale;
    res.iab = iab_sum.value() * scale;
    res.eve_information = ibe_sum.value() * scale;
    res.accepted_fraction = postselect ? std::clamp(acc.value() * scale, 0.0, 1.0) : 1.0;
    return res;
}

PostselectionBoundary psa_boundary(const ProtocolParams& params, const QuadratureGrid& grid) {
    const SectorRule rule = sector_rule(params, grid);
    return psa_boundary(params, grid, rule.theta);
}

PostselectionBoundary psa_boundary(const ProtocolParams& params, const QuadratureGrid& grid,
                                   const std::vector<double>& angles) {
    params.validate();
    grid.validate();
    PostselectionBoundary b;
    b.params = params;
    b.angles = angles;
    b.radii.assign(angles.size(), 0.0);
    b.found.assign(angles.size(), 0);
    const double r_max = grid.effective_r_max(params);
    const double iae = iae_direct(params);
    const auto means = detail::letter_means(params);
    parallel_for(static_cast<int>(angles.size()), [&](int j) {
        double r = 0.0;
        if (detail::acceptance_radius(params, means, iae, angles[j], r_max, 1e-4, &r)) {
            b.radii[j] = r;
            b.found[j] = 1;
        }
    });
    return b;
}

bool PostselectionBoundary::empty() const {
    for (auto f : found)
        if (f)
            return false;
    return true;
}

KeyRateResult with_convergence_check(KeyRateResult base, const ProtocolParams& params,
                                     const QuadratureGrid& grid) {
    QuadratureGrid half = grid;
    half.radial_nodes *= 2;
    half.angular_nodes *= 2;
    const KeyRateResult fine = base.mode == Reconciliation::direct
                                   ? keyrate_direct(params, half, base.postselected)
                                   : keyrate_reverse(params, half, base.postselected);
    base.achieved_delta = std::abs(base.rate - fine.rate);
    return base;
}

} // namespace pskqkd
