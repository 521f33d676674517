#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "precis/problems.hpp"

namespace precis {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = std::sqrt(k / 2.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(std::size_t(n));
    weights.resize(std::size_t(n));
    const double sqrt_pi = std::sqrt(kPi);
    for (int i = 0; i < n; ++i) {
        nodes[std::size_t(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        weights[std::size_t(i)] = sqrt_pi * v0 * v0;
    }
}

double burgers_reference(double x, double t, double nu, int quad_nodes) {
    if (nu <= 0) throw std::invalid_argument("burgers_reference: nu > 0");
    if (quad_nodes < 8) throw std::invalid_argument("burgers_reference: quad_nodes >= 8");
    if (t <= 0) return -std::sin(kPi * x);
    // Cole-Hopf: u = int u0(x - a z) e^f dz / int e^f dz with a = 2 sqrt(nu t)
    // and f(z) = -z^2 + (1 - cos(pi (x - a z))) / (2 pi nu).  A weighted mean
    // of u0, so |u| <= max|u0|.  The integrand is entire and decays like
    // exp(-z^2), so a uniform grid converges spectrally; the grid is symmetric
    // about z = 0, which preserves u(-x, t) = -u(x, t) to roundoff.  The sharp
    // exponent peak can sit far off-center near the steepening front, which is
    // why fixed Gauss-Hermite nodes are not used here.
    const double a = 2 * std::sqrt(nu * t);
    const double c = 1.0 / (2 * kPi * nu);
    const double zmax = std::sqrt(2 * c + 40.0);
    const int n = quad_nodes * int(std::ceil(zmax)) + 1;
    const double h = 2 * zmax / (n - 1);
    std::vector<double> ex(static_cast<std::size_t>(n));
    double m = -1e300;
    for (int j = 0; j < n; ++j) {
        const double z = -zmax + h * j;
        ex[std::size_t(j)] = -z * z + c * (1 - std::cos(kPi * (x - a * z)));
        m = std::max(m, ex[std::size_t(j)]);
    }
    double num = 0, den = 0;
    for (int j = 0; j < n; ++j) {
        const double z = -zmax + h * j;
        const double g = std::exp(ex[std::size_t(j)] - m);
        num += -std::sin(kPi * (x - a * z)) * g;
        den += g;
    }
    return num / den;
}

std::vector<double> diffusion_reaction_solve(const std::vector<double>& v_grid, int nx, int nt,
                                             double D, double k, int picard_iters) {
    if (int(v_grid.size()) != nx) throw std::invalid_argument("diffusion_reaction_solve: v size");
    if (nx < 3 || nt < 2) throw std::invalid_argument("diffusion_reaction_solve: grid too small");
    const double dx = 1.0 / (nx - 1);
    const double dt = 1.0 / (nt - 1);
    const double r = D * dt / (2 * dx * dx);

    std::vector<double> field(std::size_t(nx) * std::size_t(nt), 0.0);
    std::vector<double> u(std::size_t(nx), 0.0), nxt(std::size_t(nx), 0.0), star(static_cast<std::size_t>(nx));
    const int m = nx - 2;  // interior unknowns
    std::vector<double> rhs(static_cast<std::size_t>(m)), cp(static_cast<std::size_t>(m)), dp(static_cast<std::size_t>(m));

    for (int step = 1; step < nt; ++step) {
        star = u;
        for (int it = 0; it < picard_iters; ++it) {
            for (int i = 1; i <= m; ++i) {
                const double lap = u[std::size_t(i) - 1] - 2 * u[std::size_t(i)] + u[std::size_t(i) + 1];
                const double react = 0.5 * k * (star[std::size_t(i)] * star[std::size_t(i)] +
                                                u[std::size_t(i)] * u[std::size_t(i)]);
                rhs[std::size_t(i) - 1] = u[std::size_t(i)] + r * lap + dt * (v_grid[std::size_t(i)] - react);
            }
            // Thomas solve of (1 + 2r) on the diagonal, -r off-diagonal
            const double b = 1 + 2 * r, a = -r, cc = -r;
            cp[0] = cc / b;
            dp[0] = rhs[0] / b;
            for (int i = 1; i < m; ++i) {
                const double den = b - a * cp[std::size_t(i) - 1];
                cp[std::size_t(i)] = cc / den;
                dp[std::size_t(i)] = (rhs[std::size_t(i)] - a * dp[std::size_t(i) - 1]) / den;
            }
            nxt[std::size_t(m)] = dp[std::size_t(m) - 1];
            for (int i = m - 1; i >= 1; --i)
                nxt[std::size_t(i)] = dp[std::size_t(i) - 1] - cp[std::size_t(i) - 1] * nxt[std::size_t(i) + 1];
            nxt[0] = nxt[std::size_t(nx) - 1] = 0.0;
            star = nxt;
        }
        u = nxt;
        for (int i = 0; i < nx; ++i) field[std::size_t(step) * nx + std::size_t(i)] = u[std::size_t(i)];
    }
    return field;
}

}  // namespace precis
