#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "precis/tape.hpp"
#include "precis/tensor.hpp"

namespace precis {

// ---- regression task: f(x) = x sin(5x) on [-1, 1] ----

double regression_target(double x);
std::vector<double> regression_points(int n);  // equispaced including endpoints

// ---- PINN residuals, built from jet channels (dx/dxx/dt) on the tape ----

// r = u_t - alpha u_xx
int heat_residual(Tape& t, const Jet& u, double alpha);
// r = u_t + u u_x - nu u_xx
int burgers_residual(Tape& t, const Jet& u, double nu);
// r = y_t - y_xx + f, with f(x,t) = exp(-t)(sin(pi x) - pi^2 sin(pi x))
// supplied as a constant node evaluated at the collocation points
int diffusion_validation_residual(Tape& t, const Jet& y, int forcing_node);
// r = u_t - D u_xx + k u^2 - v(x)
int diffusion_reaction_residual(Tape& t, const Jet& u, int source_node, double D, double k);

double diffusion_validation_forcing(double x, double t);

// closed forms
double heat_exact(double x, double t, double alpha);
double diffusion_validation_exact(double x, double t);

// ---- collocation sampling ----

struct PinnPointSet {
    std::vector<double> interior;  // flat rows (x, t)
    std::vector<double> icbc;      // flat rows (x, t)
    std::vector<double> icbc_u;    // target per icbc row
    std::size_t n_interior() const { return interior.size() / 2; }
    std::size_t n_icbc() const { return icbc_u.size(); }
};

struct PinnProblem {
    std::string name;
    double x_lo, x_hi;   // spatial domain
    double t_hi;         // temporal domain [0, t_hi]
    double alpha = 0.0;  // heat diffusivity
    double nu = 0.0;     // burgers viscosity
};

PinnProblem heat_problem();                  // alpha = 0.4, x in [0,1], t in [0,1]
PinnProblem burgers_problem();               // nu = 0.01/pi, x in [-1,1], t in [0,1]
PinnProblem diffusion_validation_problem();  // x in [-1,1], t in [0,1]

double pinn_initial_condition(const PinnProblem& p, double x);

// interior uniform in the open domain, IC at t=0, BC split across both faces
PinnPointSet sample_points(const PinnProblem& p, int n_interior, int n_ic, int n_bc,
                           std::uint64_t seed);

bool boundary_close(double x, double target, double atol);

// ---- operator-learning datasets ----

struct OperatorDataset {
    int n_sensors = 0;
    std::vector<double> sensor_x;               // shared sensor grid
    std::vector<std::vector<double>> sensors;   // per function: v at sensor grid
    std::vector<std::vector<double>> query;     // per function: flat query coords
    std::vector<std::vector<double>> targets;   // per function: u at queries
    int query_dim = 1;
};

struct SquareWave {
    double c, w, h;
};

// transport u_t + u_x = 0, periodic on [0,1]; target is u at t = 0.5
double advection_initial(const SquareWave& s, double x);
double advection_at_half(const SquareWave& s, double x);
OperatorDataset advection_dataset(int n_functions, int n_sensors, int n_query,
                                  std::uint64_t seed);

// zero-mean Gaussian random field with RBF kernel on an inclusive grid
std::vector<std::vector<double>> sample_grf(int n_functions, int n_sensors,
                                            double length_scale, std::uint64_t seed);

// physics-informed diffusion-reaction operator task: sources from the GRF,
// queries on an inclusive (x,t) grid, targets from the Crank-Nicolson oracle
OperatorDataset diffusion_reaction_dataset(int n_functions, int n_sensors, int query_grid,
                                           double D, double k, std::uint64_t seed);

// ---- independent oracle solvers ----

// Gauss-Hermite nodes/weights for integrating f(z) exp(-z^2)
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Cole-Hopf quadrature reference for burgers with u0 = -sin(pi x).
// quad_nodes sets the integration grid resolution (points per unit of the
// heat-kernel variable is ~quad_nodes/2); 128 is converged well past 1e-10.
double burgers_reference(double x, double t, double nu, int quad_nodes = 128);

// Crank-Nicolson solve of u_t = D u_xx - k u^2 + v(x) on [0,1]x[0,1] with
// u(x,0) = 0 and zero Dirichlet walls; v given on the nx-point inclusive grid.
// Returns the full field, row t-major: u[it * nx + ix], it in [0, nt).
std::vector<double> diffusion_reaction_solve(const std::vector<double>& v_grid, int nx, int nt,
                                             double D, double k, int picard_iters = 3);

}  // namespace precis
