#include "precis/problems.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "precis/rng.hpp"

namespace precis {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

int const_like(Tape& t, int node, double value) {
    const Tensor& v = t.val(node);
    return t.constant(Tensor::full(v.rows, v.cols, t.format(), value));
}
}  // namespace

double regression_target(double x) { return x * std::sin(5 * x); }

std::vector<double> regression_points(int n) {
    require(n >= 2, "regression_points: need at least 2 points");
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs[std::size_t(i)] = -1.0 + 2.0 * i / (n - 1);
    return xs;
}

int heat_residual(Tape& t, const Jet& u, double alpha) {
    require(u.dt >= 0 && u.dxx >= 0, "heat_residual: jet must carry dt and dxx");
    return t.sub(u.dt, t.mul(const_like(t, u.dxx, alpha), u.dxx));
}

int burgers_residual(Tape& t, const Jet& u, double nu) {
    require(u.v >= 0 && u.dx >= 0 && u.dt >= 0 && u.dxx >= 0,
            "burgers_residual: jet must carry v, dx, dt and dxx");
    const int adv = t.mul(u.v, u.dx);
    const int visc = t.mul(const_like(t, u.dxx, nu), u.dxx);
    return t.sub(t.add(u.dt, adv), visc);
}

int diffusion_validation_residual(Tape& t, const Jet& y, int forcing_node) {
    require(y.dt >= 0 && y.dxx >= 0, "diffusion_validation_residual: jet must carry dt and dxx");
    return t.add(t.sub(y.dt, y.dxx), forcing_node);
}

int diffusion_reaction_residual(Tape& t, const Jet& u, int source_node, double D, double k) {
    require(u.v >= 0 && u.dt >= 0 && u.dxx >= 0,
            "diffusion_reaction_residual: jet must carry v, dt and dxx");
    const int diff = t.mul(const_like(t, u.dxx, D), u.dxx);
    const int react = t.mul(const_like(t, u.v, k), t.square(u.v));
    return t.sub(t.add(t.sub(u.dt, diff), react), source_node);
}

double diffusion_validation_forcing(double x, double t) {
    return std::exp(-t) * (std::sin(kPi * x) - kPi * kPi * std::sin(kPi * x));
}

double heat_exact(double x, double t, double alpha) {
    return std::sin(kPi * x) * std::exp(-alpha * kPi * kPi * t);
}

double diffusion_validation_exact(double x, double t) {
    return std::exp(-t) * std::sin(kPi * x);
}

PinnProblem heat_problem() { return {"heat", 0.0, 1.0, 1.0, 0.4, 0.0}; }
PinnProblem burgers_problem() { return {"burgers", -1.0, 1.0, 1.0, 0.0, 0.01 / kPi}; }
PinnProblem diffusion_validation_problem() { return {"diffusion-validation", -1.0, 1.0, 1.0, 0.0, 0.0}; }

double pinn_initial_condition(const PinnProblem& p, double x) {
    if (p.name == "burgers") return -std::sin(kPi * x);
    return std::sin(kPi * x);  // heat (L = 1) and diffusion-validation
}

PinnPointSet sample_points(const PinnProblem& p, int n_interior, int n_ic, int n_bc,
                           std::uint64_t seed) {
    require(n_interior > 0 && n_ic > 0 && n_bc > 0, "sample_points: counts must be positive");
    Rng rng(seed);
    PinnPointSet ps;
    ps.interior.reserve(std::size_t(n_interior) * 2);
    for (int i = 0; i < n_interior; ++i) {
        double x = 0, tt = 0;
        do { x = rng.uniform(p.x_lo, p.x_hi); } while (x <= p.x_lo || x >= p.x_hi);
        do { tt = rng.uniform(0.0, p.t_hi); } while (tt <= 0.0 || tt >= p.t_hi);
        ps.interior.push_back(x);
        ps.interior.push_back(tt);
    }
    for (int i = 0; i < n_ic; ++i) {
        const double x = rng.uniform(p.x_lo, p.x_hi);
        ps.icbc.push_back(x);
        ps.icbc.push_back(0.0);
        ps.icbc_u.push_back(pinn_initial_condition(p, x));
    }
    for (int i = 0; i < n_bc; ++i) {
        const double x = i < n_bc / 2 ? p.x_lo : p.x_hi;
        ps.icbc.push_back(x);
        ps.icbc.push_back(rng.uniform(0.0, p.t_hi));
        ps.icbc_u.push_back(0.0);
    }
    return ps;
}

bool boundary_close(double x, double target, double atol) {
    require(atol > 0, "boundary_close: atol must be positive");
    return std::fabs(x - target) <= atol;
}

double advection_initial(const SquareWave& s, double x) {
    return std::fabs(x - s.c) <= s.w / 2 ? s.h : 0.0;
}

double advection_at_half(const SquareWave& s, double x) {
    double xs = std::fmod(x - 0.5, 1.0);
    if (xs < 0) xs += 1.0;
    return advection_initial(s, xs);
}

OperatorDataset advection_dataset(int n_functions, int n_sensors, int n_query,
                                  std::uint64_t seed) {
    require(n_functions > 0 && n_sensors > 0 && n_query > 0, "advection_dataset: counts positive");
    Rng rng(seed);
    OperatorDataset ds;
    ds.n_sensors = n_sensors;
    ds.query_dim = 1;
    for (int i = 0; i < n_sensors; ++i) ds.sensor_x.push_back(double(i) / n_sensors);
    std::vector<double> qx(static_cast<std::size_t>(n_query));
    for (int j = 0; j < n_query; ++j) qx[std::size_t(j)] = double(j) / n_query;
    for (int f = 0; f < n_functions; ++f) {
        const SquareWave s{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.6), rng.uniform(1.0, 2.0)};
        std::vector<double> v(static_cast<std::size_t>(n_sensors)), u(static_cast<std::size_t>(n_query));
        for (int i = 0; i < n_sensors; ++i) v[std::size_t(i)] = advection_initial(s, ds.sensor_x[std::size_t(i)]);
        for (int j = 0; j < n_query; ++j) u[std::size_t(j)] = advection_at_half(s, qx[std::size_t(j)]);
        ds.sensors.push_back(std::move(v));
        ds.query.push_back(qx);
        ds.targets.push_back(std::move(u));
    }
    return ds;
}

std::vector<std::vector<double>> sample_grf(int n_functions, int n_sensors,
                                            double length_scale, std::uint64_t seed) {
    require(n_functions > 0 && n_sensors > 1 && length_scale > 0, "sample_grf: bad arguments");
    Eigen::MatrixXd K(n_sensors, n_sensors);
    for (int i = 0; i < n_sensors; ++i)
        for (int j = 0; j < n_sensors; ++j) {
            const double d = double(i - j) / (n_sensors - 1);
            K(i, j) = std::exp(-d * d / (2 * length_scale * length_scale));
        }
    K.diagonal().array() += 1e-10;
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(K).matrixL();
    Rng rng(seed);
    std::vector<std::vector<double>> out;
    for (int f = 0; f < n_functions; ++f) {
        Eigen::VectorXd z(n_sensors);
        for (int i = 0; i < n_sensors; ++i) z(i) = rng.normal();
        const Eigen::VectorXd v = L * z;
        out.emplace_back(v.data(), v.data() + n_sensors);
    }
    return out;
}

OperatorDataset diffusion_reaction_dataset(int n_functions, int n_sensors, int query_grid,
                                           double D, double k, std::uint64_t seed) {
    require(query_grid >= 2, "diffusion_reaction_dataset: query_grid >= 2");
    const int nx = 101, nt = 101;
    OperatorDataset ds;
    ds.n_sensors = n_sensors;
    ds.query_dim = 2;
    for (int i = 0; i < n_sensors; ++i) ds.sensor_x.push_back(double(i) / (n_sensors - 1));
    ds.sensors = sample_grf(n_functions, n_sensors, 0.2, seed);

    std::vector<double> qcoords;
    for (int it = 0; it < query_grid; ++it)
        for (int ix = 0; ix < query_grid; ++ix) {
            qcoords.push_back(double(ix) / (query_grid - 1));  // x
            qcoords.push_back(double(it) / (query_grid - 1));  // t
        }

    for (int f = 0; f < n_functions; ++f) {
        // linear interpolation of the sensor values onto the solver grid
        std::vector<double> vg(static_cast<std::size_t>(nx));
        for (int j = 0; j < nx; ++j) {
            const double x = double(j) / (nx - 1);
            const double pos = x * (n_sensors - 1);
            const int i0 = std::min(int(pos), n_sensors - 2);
            const double w = pos - i0;
            vg[std::size_t(j)] = (1 - w) * ds.sensors[std::size_t(f)][std::size_t(i0)] +
                                 w * ds.sensors[std::size_t(f)][std::size_t(i0) + 1];
        }
        const std::vector<double> field = diffusion_reaction_solve(vg, nx, nt, D, k);
        std::vector<double> u;
        u.reserve(qcoords.size() / 2);
        for (std::size_t q = 0; q < qcoords.size(); q += 2) {
            const double px = qcoords[q] * (nx - 1);
            const double pt = qcoords[q + 1] * (nt - 1);
            const int ix = std::min(int(px), nx - 2), it = std::min(int(pt), nt - 2);
            const double wx = px - ix, wt = pt - it;
            const auto at = [&](int tt, int xx) { return field[std::size_t(tt) * nx + std::size_t(xx)]; };
            u.push_back((1 - wt) * ((1 - wx) * at(it, ix) + wx * at(it, ix + 1)) +
                        wt * ((1 - wx) * at(it + 1, ix) + wx * at(it + 1, ix + 1)));
        }
        ds.query.push_back(qcoords);
        ds.targets.push_back(std::move(u));
    }
    return ds;
}

}  // namespace precis
