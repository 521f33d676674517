#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "precis/trainer.hpp"

namespace precis {

// Constants of the gradient-descent error bound, computed at runtime from
// their closed forms. The critical-region threshold constant is (2+sqrt 6)/2^11
// and the loss-gap constant is (15+6*sqrt 6)/2^22 == 1.5x the square of the
// first.
double theorem_constant();
double corollary_gap_constant();

// threshold = theorem_constant() * L_hat * ||theta||. A parameter vector sits
// in the critical region once its gradient norm drops below this.
double critical_region_threshold(double L_hat, double theta_norm);

struct TheoremInputs {
    double L_hat = 0;       // Lipschitz estimate of the loss gradient
    double mu_hat = 0;      // strong-convexity estimate; 0 when unknown
    double theta_norm = 0;
    double grad_norm = 0;
    double eta = 0;         // learning rate; 0 when not applicable
};

// grad_norm < critical_region_threshold(L_hat, theta_norm). Requires a
// positive finite L_hat and nonnegative finite norms.
bool in_critical_region(const TheoremInputs& in);

// Local Lipschitz estimate of the loss gradient between two iterates:
// ||g_next - g_t|| / ||theta_next - theta_t||. Throws on a fully stagnated
// step (zero denominator); callers that tolerate those should test the
// denominator first.
double local_lipschitz_estimate(const std::vector<double>& theta_t,
                                const std::vector<double>& theta_next,
                                const std::vector<double>& grad_t,
                                const std::vector<double>& grad_next);

struct Theorem1Report {
    std::optional<std::size_t> first_hit;       // first iteration inside the region
    bool satisfied_at_end = false;              // inside at every iteration of the final 10%
    std::vector<double> lipschitz_running_max;  // NaN until the first finite estimate
    std::vector<double> threshold;              // NaN wherever the running max is undefined
    std::vector<std::uint8_t> in_region;
};

// Evaluates the critical-region bound along a recorded run, using the running
// maximum of the per-iteration Lipschitz estimates as a conservative L_hat.
// Non-finite estimate entries (the first iteration, skipped or stagnated
// steps) are ignored by the running max. The final-10% window is the last
// max(1, n/10) iterations.
Theorem1Report check_theorem1(const TrainRecord& record);

struct CorollaryReport {
    bool dist_ok = false;
    bool gap_ok = false;
    double dist = 0, dist_bound = 0;
    double gap = 0, gap_bound = 0;
};

// Strong-convexity corollary at a single point: checks
//   ||theta - theta_star|| <  theorem_constant() * (L/mu) * ||theta||
//   loss_gap               <  corollary_gap_constant() * (L^2/mu) * ||theta||^2
// A left-hand side that is exactly zero satisfies its bound even when the
// bound itself is zero.
CorollaryReport corollary_bounds(double L_hat, double mu_hat, const std::vector<double>& theta,
                                 const std::vector<double>& theta_star, double loss_gap);

struct TestbedConfig {
    std::size_t dim = 50;
    double L = 10.0;            // largest eigenvalue; Lipschitz constant of the gradient
    double mu = 0.1;            // smallest eigenvalue; strong-convexity constant
    double eta = 0.1;
    std::size_t iters = 10000;
    std::uint64_t seed = 0;
    bool exact = false;         // disable the rounding perturbation (reference mode)
};

// One gradient-descent run on L(theta) = 1/2 theta^T A theta with A diagonal,
// eigenvalues log-spaced in [mu, L] and minimum theta* = 0, where each
// gradient is evaluated at the binary16 rounding of theta:
//   theta <- theta - eta * A * round16(theta)
// The start point is a random direction of unit norm. Updates run in double;
// the only perturbation is the rounding of the evaluation point, so the run
// isolates the delta-theta term of the error bound.
//
// record.loss is the exact energy E_t = L(theta_t), record.grad_norm the norm
// of the gradient the update actually used, record.lipschitz_est the local
// estimates from those same observed gradients. The exact_* series hold their
// unperturbed counterparts: the descent inequality
//   E_{t+1} <= E_t - eta/4 * ||grad L(theta_t)||^2
// is only provable from the exact gradient, outside the region, while
// ||delta theta|| <= 2^-11 ||theta|| holds, so tests gate on in_region_exact
// and delta_ratio. in_region uses the observed gradient and the true L: it is
// what a training loop can see, and on coarse-grained binary16 it is entered
// through underflow of the observed gradient rather than by ||grad|| genuinely
// tracking ||theta|| downward.
struct TestbedRun {
    TestbedConfig config;
    TrainRecord record;
    std::vector<double> eigenvalues;
    std::vector<double> exact_grad_norm;   // ||A theta_t||, no rounding
    std::vector<double> exact_lipschitz;   // quotients from the exact gradients
    std::vector<double> threshold;         // theorem_constant() * L * ||theta_t||
    std::vector<std::uint8_t> in_region;        // observed gradient below threshold
    std::vector<std::uint8_t> in_region_exact;  // exact gradient below threshold
    std::vector<double> delta_ratio;       // ||round16(theta) - theta|| / ||theta||
    std::vector<std::uint8_t> all_normal;  // every |theta_i| inside the binary16 normal range
    double alpha = 0;                      // max{8 ||theta_1||^2 / eta, E_1}
    std::vector<double> theta_final;
};

// Throws if eta > 1/L (the bound's hypothesis), mu <= 0, mu > L, dim < 2 or
// iters == 0.
TestbedRun quadratic_testbed(const TestbedConfig& cfg);

}  // namespace precis
