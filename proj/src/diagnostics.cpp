#include <cmath>
#include <cstring>
#include <stdexcept>

#include "precis/diagnostics.hpp"
#include "precis/rng.hpp"

namespace precis {

namespace {

double norm_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

DivergenceMetrics gradient_divergence_metrics(const std::vector<double>& g,
                                              const std::vector<double>& g_ref) {
    if (g.size() != g_ref.size())
        throw std::invalid_argument("gradient_divergence_metrics: length mismatch");
    for (double x : g)
        if (!std::isfinite(x)) throw std::domain_error("gradient_divergence_metrics: non-finite gradient");
    for (double x : g_ref)
        if (!std::isfinite(x)) throw std::domain_error("gradient_divergence_metrics: non-finite gradient");
    const double na = norm_of(g), nb = norm_of(g_ref);
    if (na == 0 || nb == 0) throw std::domain_error("gradient_divergence_metrics: zero gradient");
    double dot = 0, d2 = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        dot += g[i] * g_ref[i];
        const double d = g[i] - g_ref[i];
        d2 += d * d;
    }
    DivergenceMetrics m;
    m.cosine = dot / (na * nb);
    m.l2_distance = std::sqrt(d2);
    m.l2_relative_distance = m.l2_distance / nb;
    return m;
}

double stagnation_fraction(const std::vector<double>& before, const std::vector<double>& after) {
    if (before.size() != after.size())
        throw std::invalid_argument("stagnation_fraction: length mismatch");
    if (before.empty()) throw std::invalid_argument("stagnation_fraction: empty input");
    std::size_t same = 0;
    for (std::size_t i = 0; i < before.size(); ++i)
        if (std::memcmp(&before[i], &after[i], sizeof(double)) == 0) ++same;
    return double(same) / double(before.size());
}

LandscapeSlice landscape_slice(const std::function<double(const std::vector<double>&)>& loss_fn,
                               const std::vector<double>& theta,
                               const std::vector<std::vector<std::size_t>>& groups,
                               std::uint64_t seed, double half_width, int resolution) {
    if (!loss_fn) throw std::invalid_argument("landscape_slice: no loss function");
    if (theta.empty()) throw std::invalid_argument("landscape_slice: empty theta");
    if (half_width <= 0) throw std::invalid_argument("landscape_slice: half_width must be positive");
    if (resolution < 3 || resolution % 2 == 0)
        throw std::invalid_argument("landscape_slice: resolution must be odd and >= 3");

    const std::size_t n = theta.size();
    Rng root(seed);
    Rng rd = root.derive(0), re = root.derive(1);
    std::vector<double> delta(n), eta(n);
    for (std::size_t i = 0; i < n; ++i) delta[i] = rd.normal();
    for (std::size_t i = 0; i < n; ++i) eta[i] = re.normal();

    auto filter_normalize = [&](std::vector<double>& dir) {
        for (const auto& grp : groups) {
            double tn = 0, dn = 0;
            for (std::size_t idx : grp) {
                tn += theta[idx] * theta[idx];
                dn += dir[idx] * dir[idx];
            }
            const double scale = dn > 0 ? std::sqrt(tn / dn) : 0.0;
            for (std::size_t idx : grp) dir[idx] *= scale;
        }
    };
    filter_normalize(delta);
    filter_normalize(eta);

    LandscapeSlice s;
    s.half_width = half_width;
    s.resolution = resolution;
    s.delta = delta;
    s.eta = eta;
    const int mid = resolution / 2;
    const double h = half_width / mid;
    s.xs.resize(std::size_t(resolution));
    for (int i = 0; i < resolution; ++i) s.xs[std::size_t(i)] = (i - mid) * h;

    s.loss.resize(std::size_t(resolution) * std::size_t(resolution));
    s.nan_mask.resize(s.loss.size());
    std::vector<double> point(n);
    for (int iy = 0; iy < resolution; ++iy) {
        for (int ix = 0; ix < resolution; ++ix) {
            double v;
            if (ix == mid && iy == mid) {
                v = loss_fn(theta);
                s.center_loss = v;
            } else {
                const double x = s.xs[std::size_t(ix)], y = s.xs[std::size_t(iy)];
                for (std::size_t i = 0; i < n; ++i) point[i] = theta[i] + x * delta[i] + y * eta[i];
                v = loss_fn(point);
            }
            const std::size_t at = std::size_t(iy) * std::size_t(resolution) + std::size_t(ix);
            s.loss[at] = v;
            s.nan_mask[at] = std::isfinite(v) ? 0 : 1;
        }
    }
    return s;
}

}  // namespace precis
