#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "precis/problems.hpp"
#include "precis/rng.hpp"

using namespace precis;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

// jet whose channels are fixed tensors (analytic derivative values)
Jet const_jet(Tape& t, const std::vector<double>& v, const std::vector<double>& dx,
              const std::vector<double>& dxx, const std::vector<double>& dt) {
    const int n = int(v.size());
    Jet j;
    j.v = t.constant(Tensor::from_flat(n, 1, t.format(), v));
    if (!dx.empty()) j.dx = t.constant(Tensor::from_flat(n, 1, t.format(), dx));
    if (!dxx.empty()) j.dxx = t.constant(Tensor::from_flat(n, 1, t.format(), dxx));
    if (!dt.empty()) j.dt = t.constant(Tensor::from_flat(n, 1, t.format(), dt));
    return j;
}
}  // namespace

TEST_CASE("regression target and points") {
    CHECK(regression_target(0.0) == 0.0);
    CHECK(regression_target(kPi / 10) == doctest::Approx(kPi / 10).epsilon(1e-14));
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(-1, 1);
        CHECK(regression_target(-x) == doctest::Approx(regression_target(x)).epsilon(1e-14));
    }
    const auto xs = regression_points(16);
    REQUIRE(xs.size() == 16);
    CHECK(xs.front() == -1.0);
    CHECK(xs.back() == 1.0);
    for (int i = 0; i < 16; ++i) CHECK(xs[std::size_t(i)] == doctest::Approx(-1.0 + 2.0 * i / 15).epsilon(1e-15));
}

TEST_CASE("heat residual") {
    const PinnProblem p = heat_problem();
    CHECK(p.alpha == 0.4);

    // closed-form solution drives the residual to ~0 at random interior points
    Rng rng(11);
    const int n = 1000;
    std::vector<double> u(n), uxx(n), ut(n);
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(0, 1), tt = rng.uniform(0, 1);
        u[std::size_t(i)] = heat_exact(x, tt, p.alpha);
        uxx[std::size_t(i)] = -kPi * kPi * u[std::size_t(i)];
        ut[std::size_t(i)] = -p.alpha * kPi * kPi * u[std::size_t(i)];
    }
    Tape t(Format::Binary64);
    const Jet j = const_jet(t, u, {}, uxx, ut);
    const int r = heat_residual(t, j, p.alpha);
    for (int i = 0; i < n; ++i) CHECK(std::fabs(t.val(r).get(i, 0)) <= 1e-6);

    // u == 0 and u == t
    Tape t2(Format::Binary64);
    const Jet z = const_jet(t2, {0, 0}, {}, {0, 0}, {0, 0});
    const int rz = heat_residual(t2, z, p.alpha);
    CHECK(t2.val(rz).get(0, 0) == 0.0);
    const Jet lin = const_jet(t2, {0.3, 0.9}, {}, {0, 0}, {1, 1});
    const int rl = heat_residual(t2, lin, p.alpha);
    CHECK(t2.val(rl).get(0, 0) == 1.0);
    CHECK(t2.val(rl).get(1, 0) == 1.0);

    Jet missing;
    missing.v = z.v;
    CHECK_THROWS_AS(heat_residual(t2, missing, p.alpha), std::invalid_argument);
}

TEST_CASE("burgers residual") {
    const PinnProblem p = burgers_problem();
    CHECK(p.nu == doctest::Approx(0.01 / kPi).epsilon(1e-15));
    Tape t(Format::Binary64);
    const Jet z = const_jet(t, {0, 0}, {0, 0}, {0, 0}, {0, 0});
    CHECK(t.val(burgers_residual(t, z, p.nu)).get(0, 0) == 0.0);
    // u = x at fixed t: r = u u_x = x
    const Jet ux = const_jet(t, {0.25, -0.8}, {1, 1}, {0, 0}, {0, 0});
    const int r = burgers_residual(t, ux, p.nu);
    CHECK(t.val(r).get(0, 0) == 0.25);
    CHECK(t.val(r).get(1, 0) == -0.8);
}

TEST_CASE("diffusion-validation residual") {
    // exact solution annihilates the residual
    Rng rng(7);
    const int n = 1000;
    std::vector<double> y(n), yxx(n), yt(n), f(n);
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(-1, 1), tt = rng.uniform(0, 1);
        y[std::size_t(i)] = diffusion_validation_exact(x, tt);
        yxx[std::size_t(i)] = -kPi * kPi * y[std::size_t(i)];
        yt[std::size_t(i)] = -y[std::size_t(i)];
        f[std::size_t(i)] = diffusion_validation_forcing(x, tt);
    }
    Tape t(Format::Binary64);
    const Jet j = const_jet(t, y, {}, yxx, yt);
    const int fn = t.constant(Tensor::from_flat(n, 1, Format::Binary64, f));
    const int r = diffusion_validation_residual(t, j, fn);
    for (int i = 0; i < n; ++i) CHECK(std::fabs(t.val(r).get(i, 0)) <= 1e-6);

    // zero field: residual equals the forcing
    Tape t2(Format::Binary64);
    const Jet z = const_jet(t2, {0, 0}, {}, {0, 0}, {0, 0});
    const int f2 = t2.constant(Tensor::from_flat(2, 1, Format::Binary64,
                                                 {diffusion_validation_forcing(0.0, 0.3),
                                                  diffusion_validation_forcing(0.5, 0.0)}));
    const int r2 = diffusion_validation_residual(t2, z, f2);
    CHECK(t2.val(r2).get(0, 0) == 0.0);                                       // forcing vanishes at x=0
    CHECK(t2.val(r2).get(1, 0) == doctest::Approx(1 - kPi * kPi).epsilon(1e-14));
}

TEST_CASE("diffusion-reaction residual") {
    Tape t(Format::Binary64);
    const Jet z = const_jet(t, {0, 0}, {}, {0, 0}, {0, 0});
    const int v0 = t.constant(Tensor::from_flat(2, 1, Format::Binary64, {0.0, std::sin(kPi * 0.5)}));
    const int r = diffusion_reaction_residual(t, z, v0, 0.01, 0.01);
    CHECK(t.val(r).get(0, 0) == 0.0);
    CHECK(t.val(r).get(1, 0) == -1.0);
}

TEST_CASE("collocation sampling") {
    const PinnProblem p = heat_problem();
    const PinnPointSet a = sample_points(p, 2200, 400, 180, 0);
    CHECK(a.n_interior() == 2200);
    CHECK(a.n_icbc() == 580);
    for (std::size_t i = 0; i < a.n_interior(); ++i) {
        CHECK(a.interior[2 * i] > 0.0);
        CHECK(a.interior[2 * i] < 1.0);
        CHECK(a.interior[2 * i + 1] > 0.0);
        CHECK(a.interior[2 * i + 1] < 1.0);
    }
    for (std::size_t i = 0; i < 400; ++i) {
        CHECK(a.icbc[2 * i + 1] == 0.0);
        CHECK(a.icbc_u[i] == doctest::Approx(std::sin(kPi * a.icbc[2 * i])).epsilon(1e-14));
    }
    for (std::size_t i = 400; i < 580; ++i) {
        CHECK((a.icbc[2 * i] == 0.0 || a.icbc[2 * i] == 1.0));
        CHECK(a.icbc_u[i] == 0.0);
    }
    const PinnPointSet b = sample_points(p, 2200, 400, 180, 0);
    CHECK(a.interior == b.interior);
    CHECK(a.icbc == b.icbc);
    const PinnPointSet c = sample_points(p, 2200, 400, 180, 1);
    CHECK(a.interior != c.interior);

    const PinnProblem bp = burgers_problem();
    const PinnPointSet d = sample_points(bp, 100, 50, 50, 5);
    for (std::size_t i = 0; i < 50; ++i)
        CHECK(d.icbc_u[i] == doctest::Approx(-std::sin(kPi * d.icbc[2 * i])).epsilon(1e-14));
}

TEST_CASE("boundary closeness") {
    CHECK(boundary_close(1.0, 1.0, 1e-6));
    CHECK(boundary_close(1.0 - 5e-5, 1.0, 1e-4));
    CHECK(!boundary_close(1.0 - 5e-5, 1.0, 1e-6));
    CHECK(!boundary_close(0.5, 1.0, 1e-4));
    CHECK_THROWS_AS(boundary_close(0.5, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("advection exact transport") {
    const SquareWave s{0.5, 0.4, 1.0};
    // shifted support is [0.8, 1] union [0, 0.2]
    CHECK(advection_at_half(s, 0.85) == 1.0);
    CHECK(advection_at_half(s, 0.1) == 1.0);
    CHECK(advection_at_half(s, 0.8) == 1.0);
    CHECK(advection_at_half(s, 0.2) == 1.0);
    CHECK(advection_at_half(s, 0.5) == 0.0);
    CHECK(advection_at_half(s, 0.25) == 0.0);
    CHECK(advection_at_half(s, 0.75) == 0.0);

    // constants are transport-invariant
    const SquareWave flat{0.5, 1.0, 1.7};
    for (double x : {0.0, 0.3, 0.77, 0.99}) CHECK(advection_at_half(flat, x) == 1.7);

    // mass conservation: integral of the shifted profile equals w*h
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const SquareWave sw{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.6), rng.uniform(1.0, 2.0)};
        const int n = 200000;
        double sum = 0;
        for (int i = 0; i < n; ++i) sum += advection_at_half(sw, (i + 0.5) / n);
        CHECK(std::fabs(sum / n - sw.w * sw.h) <= 3.0 * sw.h / n + 1e-12);
    }
}

TEST_CASE("advection dataset") {
    const OperatorDataset a = advection_dataset(20, 100, 100, 9);
    const OperatorDataset b = advection_dataset(20, 100, 100, 9);
    CHECK(a.sensors == b.sensors);
    CHECK(a.targets == b.targets);
    CHECK(a.sensor_x[0] == 0.0);
    CHECK(a.sensor_x[99] == 0.99);
    for (const auto& v : a.sensors) {
        REQUIRE(v.size() == 100);
        double h = 0;
        for (double e : v) {
            if (e != 0) {
                if (h == 0) h = e;
                CHECK(e == h);  // two-level profile
            }
        }
        CHECK(h >= 1.0);
        CHECK(h <= 2.0);
    }
    const OperatorDataset c = advection_dataset(20, 100, 100, 10);
    CHECK(a.sensors != c.sensors);
}

TEST_CASE("gauss-hermite rules") {
    std::vector<double> z, w;
    gauss_hermite(1, z, w);
    CHECK(z[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(std::sqrt(kPi)).epsilon(1e-14));
    gauss_hermite(2, z, w);
    CHECK(std::fabs(z[0]) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(w[0] == doctest::Approx(std::sqrt(kPi) / 2).epsilon(1e-12));
    for (int n : {4, 16, 64, 128}) {
        gauss_hermite(n, z, w);
        double s = 0, s2 = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            s += w[i];
            s2 += w[i] * z[i] * z[i];
        }
        CHECK(s == doctest::Approx(std::sqrt(kPi)).epsilon(1e-10));
        CHECK(s2 == doctest::Approx(std::sqrt(kPi) / 2).epsilon(1e-10));
    }
}

TEST_CASE("burgers quadrature reference") {
    const double nu = 0.01 / kPi;
    // initial profile
    for (double x : {-0.7, -0.2, 0.4, 0.9})
        CHECK(burgers_reference(x, 1e-9, nu) == doctest::Approx(-std::sin(kPi * x)).epsilon(1e-5));
    // antisymmetry and pinned walls
    for (double tt : {0.2, 0.5, 0.9}) {
        CHECK(burgers_reference(1.0, tt, nu) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(burgers_reference(-0.37, tt, nu) ==
              doctest::Approx(-burgers_reference(0.37, tt, nu)).epsilon(1e-12));
        CHECK(burgers_reference(-0.17, tt, nu) ==
              doctest::Approx(-burgers_reference(0.17, tt, nu)).epsilon(1e-12));
    }
    // quadrature is converged at 128 nodes, including near the steep front
    CHECK(burgers_reference(0.3, 0.6, nu, 128) ==
          doctest::Approx(burgers_reference(0.3, 0.6, nu, 192)).epsilon(1e-10));
    CHECK(burgers_reference(0.17, 0.2, nu, 128) ==
          doctest::Approx(burgers_reference(0.17, 0.2, nu, 256)).epsilon(1e-10));
    // peak gradient at the steepening time: the benchmark value for this
    // viscosity is u_x(0, 1.6037/pi) = -152.00516
    {
        const double ts = 1.6037 / kPi, fd = 1e-5;
        const double ux =
            (burgers_reference(fd, ts, nu) - burgers_reference(-fd, ts, nu)) / (2 * fd);
        CHECK(ux == doctest::Approx(-152.00516).epsilon(2e-5));
    }
    // the PDE holds under finite differences away from the shock
    const double h = 1e-4;
    for (double x : {-0.6, 0.35}) {
        const double tt = 0.4;
        const double u = burgers_reference(x, tt, nu);
        const double ut = (burgers_reference(x, tt + h, nu) - burgers_reference(x, tt - h, nu)) / (2 * h);
        const double uxp = burgers_reference(x + h, tt, nu), uxm = burgers_reference(x - h, tt, nu);
        const double ux = (uxp - uxm) / (2 * h);
        const double uxx = (uxp - 2 * u + uxm) / (h * h);
        CHECK(std::fabs(ut + u * ux - nu * uxx) <= 1e-4);
    }
}

TEST_CASE("crank-nicolson oracle") {
    // k = 0 single-mode analytic check: v = sin(pi x) gives
    // u(x, t) = (1 - exp(-D pi^2 t)) sin(pi x) / (D pi^2)
    const double D = 0.01;
    const int nx = 101, nt = 101;
    std::vector<double> v(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) v[std::size_t(i)] = std::sin(kPi * i / (nx - 1));
    const auto field = diffusion_reaction_solve(v, nx, nt, D, 0.0);
    const double lam = D * kPi * kPi;
    for (int i : {25, 50, 75}) {
        const double x = double(i) / (nx - 1);
        const double want = (1 - std::exp(-lam)) * std::sin(kPi * x) / lam;
        CHECK(field[std::size_t(nt - 1) * nx + std::size_t(i)] == doctest::Approx(want).epsilon(2e-4));
    }

    // second-order self-convergence with the nonlinear term on
    auto solve_at = [&](int n) {
        std::vector<double> vg(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) vg[std::size_t(i)] = std::sin(kPi * i / (n - 1)) + 0.4;
        return diffusion_reaction_solve(vg, n, n, 0.01, 0.01);
    };
    const auto c1 = solve_at(51), c2 = solve_at(101), c3 = solve_at(201);
    auto diff_mid = [&](const std::vector<double>& coarse, int ncoarse,
                        const std::vector<double>& fine, int nfine) {
        double e = 0;
        const int ratio = (nfine - 1) / (ncoarse - 1);
        for (int i = 0; i < ncoarse; ++i) {
            const double a = coarse[std::size_t(ncoarse - 1) * ncoarse + std::size_t(i)];
            const double b = fine[std::size_t(nfine - 1) * nfine + std::size_t(i * ratio)];
            e = std::max(e, std::fabs(a - b));
        }
        return e;
    };
    const double e1 = diff_mid(c1, 51, c2, 101);
    const double e2 = diff_mid(c2, 101, c3, 201);
    CHECK(e1 / e2 > 2.5);
    CHECK(e1 / e2 < 6.0);

    // zero source stays identically zero
    const auto z = diffusion_reaction_solve(std::vector<double>(std::size_t(nx), 0.0), nx, nt, D, 0.01);
    for (double u : z) CHECK(u == 0.0);
}

TEST_CASE("gaussian random field sources") {
    const auto a = sample_grf(400, 100, 0.2, 13);
    const auto b = sample_grf(400, 100, 0.2, 13);
    CHECK(a == b);
    double mean = 0, var = 0;
    for (const auto& f : a) mean += f[50];
    mean /= double(a.size());
    for (const auto& f : a) var += (f[50] - mean) * (f[50] - mean);
    var /= double(a.size());
    CHECK(std::fabs(mean) < 0.2);
    CHECK(var > 0.6);
    CHECK(var < 1.5);
    // nearby sensors strongly correlated, distant ones weakly
    double c_near = 0, c_far = 0;
    for (const auto& f : a) {
        c_near += f[50] * f[52];
        c_far += f[5] * f[95];
    }
    CHECK(c_near / double(a.size()) > 0.5);
    CHECK(std::fabs(c_far) / double(a.size()) < 0.25);
}

TEST_CASE("diffusion-reaction dataset") {
    const auto ds = diffusion_reaction_dataset(3, 100, 11, 0.01, 0.01, 2);
    REQUIRE(ds.sensors.size() == 3);
    REQUIRE(ds.targets.size() == 3);
    CHECK(ds.query_dim == 2);
    for (int f = 0; f < 3; ++f) {
        REQUIRE(ds.query[std::size_t(f)].size() == 121 * 2);
        REQUIRE(ds.targets[std::size_t(f)].size() == 121);
        // first query row is t = 0: the zero initial condition
        for (int i = 0; i < 11; ++i) {
            CHECK(ds.query[std::size_t(f)][std::size_t(2 * i) + 1] == 0.0);
            CHECK(ds.targets[std::size_t(f)][std::size_t(i)] == 0.0);
        }
        for (double u : ds.targets[std::size_t(f)]) {
            CHECK(std::isfinite(u));
            CHECK(std::fabs(u) < 10.0);
        }
    }
    const auto ds2 = diffusion_reaction_dataset(3, 100, 11, 0.01, 0.01, 2);
    CHECK(ds.targets == ds2.targets);
}
