#include "precis/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "precis/diagnostics.hpp"
#include "precis/half.hpp"
#include "precis/rng.hpp"

namespace precis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double norm_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double theorem_constant() { return (2.0 + std::sqrt(6.0)) / std::ldexp(1.0, 11); }

double corollary_gap_constant() { return (15.0 + 6.0 * std::sqrt(6.0)) / std::ldexp(1.0, 22); }

double critical_region_threshold(double L_hat, double theta_norm) {
    if (!(L_hat > 0) || !std::isfinite(L_hat))
        throw std::invalid_argument("critical_region_threshold: L_hat must be positive and finite");
    if (!(theta_norm >= 0) || !std::isfinite(theta_norm))
        throw std::invalid_argument("critical_region_threshold: theta_norm must be nonnegative");
    return theorem_constant() * L_hat * theta_norm;
}

bool in_critical_region(const TheoremInputs& in) {
    if (!std::isfinite(in.grad_norm) || in.grad_norm < 0)
        throw std::invalid_argument("in_critical_region: grad_norm must be nonnegative and finite");
    return in.grad_norm < critical_region_threshold(in.L_hat, in.theta_norm);
}

double local_lipschitz_estimate(const std::vector<double>& theta_t,
                                const std::vector<double>& theta_next,
                                const std::vector<double>& grad_t,
                                const std::vector<double>& grad_next) {
    const std::size_t n = theta_t.size();
    if (theta_next.size() != n || grad_t.size() != n || grad_next.size() != n)
        throw std::invalid_argument("local_lipschitz_estimate: length mismatch");
    if (n == 0) throw std::invalid_argument("local_lipschitz_estimate: empty vectors");
    double dg = 0, dt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = grad_next[i] - grad_t[i];
        const double b = theta_next[i] - theta_t[i];
        dg += a * a;
        dt += b * b;
    }
    if (dt == 0) throw std::domain_error("local_lipschitz_estimate: degenerate step");
    return std::sqrt(dg) / std::sqrt(dt);
}

Theorem1Report check_theorem1(const TrainRecord& record) {
    const std::size_t n = record.grad_norm.size();
    if (n == 0) throw std::invalid_argument("check_theorem1: empty record");
    if (record.theta_norm.size() != n || record.lipschitz_est.size() != n)
        throw std::invalid_argument("check_theorem1: series length mismatch");

    Theorem1Report rep;
    rep.lipschitz_running_max.assign(n, kNaN);
    rep.threshold.assign(n, kNaN);
    rep.in_region.assign(n, 0);

    double lmax = kNaN;
    for (std::size_t t = 0; t < n; ++t) {
        const double est = record.lipschitz_est[t];
        if (std::isfinite(est) && est > 0 && !(est <= lmax)) lmax = est;
        if (!std::isfinite(lmax)) continue;
        rep.lipschitz_running_max[t] = lmax;
        rep.threshold[t] = critical_region_threshold(lmax, record.theta_norm[t]);
        if (record.grad_norm[t] < rep.threshold[t]) {
            rep.in_region[t] = 1;
            if (!rep.first_hit) rep.first_hit = t;
        }
    }
    if (!std::isfinite(lmax))
        throw std::invalid_argument("check_theorem1: no positive finite Lipschitz estimates");

    const std::size_t window = std::max<std::size_t>(1, n / 10);
    rep.satisfied_at_end = true;
    for (std::size_t t = n - window; t < n; ++t)
        if (!rep.in_region[t]) rep.satisfied_at_end = false;
    return rep;
}

CorollaryReport corollary_bounds(double L_hat, double mu_hat, const std::vector<double>& theta,
                                 const std::vector<double>& theta_star, double loss_gap) {
    if (!(mu_hat > 0) || !std::isfinite(mu_hat))
        throw std::invalid_argument("corollary_bounds: mu_hat must be positive and finite");
    if (!(L_hat >= mu_hat) || !std::isfinite(L_hat))
        throw std::invalid_argument("corollary_bounds: need finite L_hat >= mu_hat");
    if (theta.size() != theta_star.size() || theta.empty())
        throw std::invalid_argument("corollary_bounds: parameter vectors must match and be nonempty");

    const double tn = norm_of(theta);
    double d = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double e = theta[i] - theta_star[i];
        d += e * e;
    }
    CorollaryReport rep;
    rep.dist = std::sqrt(d);
    rep.dist_bound = theorem_constant() * (L_hat / mu_hat) * tn;
    rep.gap = loss_gap;
    rep.gap_bound = corollary_gap_constant() * (L_hat * L_hat / mu_hat) * tn * tn;
    rep.dist_ok = rep.dist == 0 || rep.dist < rep.dist_bound;
    rep.gap_ok = loss_gap <= 0 || loss_gap < rep.gap_bound;
    return rep;
}

TestbedRun quadratic_testbed(const TestbedConfig& cfg) {
    if (cfg.dim < 2) throw std::invalid_argument("quadratic_testbed: dim must be at least 2");
    if (!(cfg.mu > 0) || !(cfg.L >= cfg.mu) || !std::isfinite(cfg.L))
        throw std::invalid_argument("quadratic_testbed: need finite 0 < mu <= L");
    if (!(cfg.eta > 0)) throw std::invalid_argument("quadratic_testbed: eta must be positive");
    if (cfg.eta > 1.0 / cfg.L)
        throw std::domain_error("quadratic_testbed: eta > 1/L violates the bound's hypothesis");
    if (cfg.iters == 0) throw std::invalid_argument("quadratic_testbed: iters must be positive");

    TestbedRun run;
    run.config = cfg;

    const std::size_t d = cfg.dim;
    run.eigenvalues.resize(d);
    const double ratio = cfg.L / cfg.mu;
    for (std::size_t i = 0; i < d; ++i)
        run.eigenvalues[i] = cfg.mu * std::pow(ratio, double(i) / double(d - 1));

    Rng rng(cfg.seed);
    std::vector<double> theta(d);
    for (auto& x : theta) x = rng.normal();
    const double n0 = norm_of(theta);
    for (auto& x : theta) x /= n0;
    const double start_norm = norm_of(theta);

    const std::size_t T = cfg.iters;
    run.record.loss.reserve(T);
    run.record.grad_norm.reserve(T);
    run.record.theta_norm.reserve(T);
    run.record.stagnation_frac.reserve(T);
    run.record.lipschitz_est.reserve(T);
    run.exact_grad_norm.reserve(T);
    run.exact_lipschitz.reserve(T);
    run.threshold.reserve(T);
    run.in_region.reserve(T);
    run.in_region_exact.reserve(T);
    run.delta_ratio.reserve(T);
    run.all_normal.reserve(T);

    std::vector<double> g(d), gh(d), prev_theta, prev_g, prev_gh;
    auto energy = [&](const std::vector<double>& th) {
        double e = 0;
        for (std::size_t i = 0; i < d; ++i) e += run.eigenvalues[i] * th[i] * th[i];
        return 0.5 * e;
    };

    for (std::size_t t = 0; t < T; ++t) {
        const double tn = norm_of(theta);
        double dn2 = 0;
        bool normal = true;
        std::vector<double> theta_r(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double r = cfg.exact ? theta[i] : double(round16(float(theta[i])));
            theta_r[i] = r;
            const double dd = r - theta[i];
            dn2 += dd * dd;
            const double a = std::fabs(theta[i]);
            if (a < kHalfMinNormal || a > double(kHalfMaxFinite)) normal = false;
        }
        for (std::size_t i = 0; i < d; ++i) {
            g[i] = run.eigenvalues[i] * theta[i];
            gh[i] = run.eigenvalues[i] * theta_r[i];
        }
        const double gn = norm_of(g), ghn = norm_of(gh);

        run.record.loss.push_back(energy(theta));
        run.record.grad_norm.push_back(ghn);
        run.record.theta_norm.push_back(tn);
        run.exact_grad_norm.push_back(gn);
        run.threshold.push_back(critical_region_threshold(cfg.L, tn));
        run.in_region.push_back(ghn < run.threshold.back() ? 1 : 0);
        run.in_region_exact.push_back(gn < run.threshold.back() ? 1 : 0);
        run.delta_ratio.push_back(tn > 0 ? std::sqrt(dn2) / tn : 0.0);
        run.all_normal.push_back(normal ? 1 : 0);

        if (t == 0) {
            run.record.lipschitz_est.push_back(kNaN);
            run.exact_lipschitz.push_back(kNaN);
        } else {
            double step2 = 0;
            for (std::size_t i = 0; i < d; ++i) {
                const double s = theta[i] - prev_theta[i];
                step2 += s * s;
            }
            if (step2 == 0) {
                run.record.lipschitz_est.push_back(kNaN);
                run.exact_lipschitz.push_back(kNaN);
            } else {
                run.record.lipschitz_est.push_back(
                    local_lipschitz_estimate(prev_theta, theta, prev_gh, gh));
                run.exact_lipschitz.push_back(
                    local_lipschitz_estimate(prev_theta, theta, prev_g, g));
            }
        }
        prev_theta = theta;
        prev_g = g;
        prev_gh = gh;

        for (std::size_t i = 0; i < d; ++i) theta[i] -= cfg.eta * gh[i];
        run.record.stagnation_frac.push_back(stagnation_fraction(prev_theta, theta));
    }

    run.record.iters = long(T);
    run.record.final_error = energy(theta);
    run.theta_final = theta;
    run.alpha = std::max(8.0 * start_norm * start_norm / cfg.eta, run.record.loss[0]);
    return run;
}

}  // namespace precis
