#include "pskqkd/quadrature.hpp"

#include <map>
#include <mutex>

namespace pskqkd {

namespace {

GaussLegendreRule compute_gauss_legendre(int n) {
    GaussLegendreRule rule;
    rule.x.assign(n, 0.0);
    rule.w.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-15)
                break;
        }
        rule.x[i] = -x; // roots found near +1 first; store ascending
        rule.x[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    return rule;
}

} // namespace

const GaussLegendreRule& gauss_legendre(int n) {
    if (n < 1)
        throw std::invalid_argument("gauss_legendre order must be >= 1");
    static std::mutex mutex;
    static std::map<int, GaussLegendreRule> cache;
    std::scoped_lock lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

SectorRule sector_rule(const ProtocolParams& params, const QuadratureGrid& grid) {
    params.validate();
    grid.validate();
    const double r_max = grid.effective_r_max(params);
    const GaussLegendreRule& gl = gauss_legendre(grid.radial_nodes);
    SectorRule rule;
    rule.r_max = r_max;
    rule.r.resize(grid.radial_nodes);
    rule.wr.resize(grid.radial_nodes);
    for (int i = 0; i < grid.radial_nodes; ++i) {
        rule.r[i] = 0.5 * r_max * (gl.x[i] + 1.0);
        rule.wr[i] = 0.5 * r_max * gl.w[i] * rule.r[i]; // polar measure r dr folded in
    }
    rule.dtheta = 2.0 * std::numbers::pi / params.letters / grid.angular_nodes;
    rule.theta.resize(grid.angular_nodes);
    for (int j = 0; j < grid.angular_nodes; ++j)
        rule.theta[j] = (j + 0.5) * rule.dtheta;
    return rule;
}

} // namespace pskqkd
