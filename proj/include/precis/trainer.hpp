#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "precis/model.hpp"
#include "precis/rng.hpp"
#include "precis/tape.hpp"

namespace precis {

enum class PolicyMode { Oracle64, Full32, Pure16, Mixed };

PolicyMode parse_policy(const std::string& name);
const char* policy_name(PolicyMode m);

// Training precision regime. Mixed keeps a binary32 master copy and runs the
// forward/backward graph in binary16; loss_scale (power of two) shifts
// gradient magnitudes away from binary16 underflow and is divided back out
// before the optimizer sees them.
struct PrecisionPolicy {
    PolicyMode mode = PolicyMode::Full32;
    double loss_scale = 1.0;

    Format compute_format() const;
    Format master_format() const;
    bool is_mixed() const { return mode == PolicyMode::Mixed; }

    static PrecisionPolicy oracle64() { return {PolicyMode::Oracle64, 1.0}; }
    static PrecisionPolicy full32() { return {PolicyMode::Full32, 1.0}; }
    static PrecisionPolicy pure16() { return {PolicyMode::Pure16, 1.0}; }
    static PrecisionPolicy mixed(double scale = 1.0) { return {PolicyMode::Mixed, scale}; }
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 0.0;  // 0 = policy default: 1e-7 full32/oracle64, 1e-5 pure16/mixed
};

// ---- loss builders (nodes on an existing tape) ----

// mean of squared errors over all entries
int loss_mse(Tape& t, int pred, int target);

// mean over rows of ||pred - target|| / ||target||. Row norms are computed as
// sqrt(sum((d/s)^2)) * s with s = max|d| held constant, so intermediate
// squares stay in range even when raw differences would overflow binary16.
// Rows whose residual is exactly zero make the norm non-differentiable; the
// all-zero case degrades to a zero loss with zero gradients.
int loss_mean_l2_relative(Tape& t, int pred, int target);

// (a / sqrt(b))^2, the overflow-safe evaluation order for a^2 / b
int stabilize_ratio(Tape& t, int a, int b);

// global L2 relative error in binary64, ||pred - truth|| / ||truth||
double l2_relative_error(const std::vector<double>& pred, const std::vector<double>& truth);

// ---- optimizers (state and arithmetic live in the master format) ----

class Adam {
public:
    Adam(AdamConfig cfg, const PrecisionPolicy& policy, ByteLedger* ledger = nullptr);

    // grads must already be in the master format, one tensor per parameter
    void step(ParameterStore& ps, const std::vector<Tensor>& grads);

    long iteration() const { return t_; }
    double effective_eps() const { return eps_; }

private:
    AdamConfig cfg_;
    Format fmt_;
    double eps_;
    ByteLedger* ledger_;
    std::vector<Tensor> m_, v_;
    long t_ = 0;
};

// plain gradient descent, used by the convergence testbed
class Gd {
public:
    Gd(double lr, Format fmt) : lr_(lr), fmt_(fmt) {}
    void step(ParameterStore& ps, const std::vector<Tensor>& grads);

private:
    double lr_;
    Format fmt_;
};

// ---- the training loop ----

// A task owns the loss graph construction and an independent test metric.
// build_loss returns a scalar node; it sees the per-iteration rng stream for
// batching, and identical (iter, rng) inputs must rebuild the identical batch.
struct TrainTask {
    std::function<int(Tape&, const std::vector<int>& params, long iter, Rng& rng)> build_loss;
    std::function<double(const ParameterStore&)> test_error;  // optional, binary64
};

struct TrainOptions {
    long iters = 1000;
    long eval_every = 100;  // <= 0 disables periodic evaluation (final still runs)
    bool record_lipschitz = true;
    long nonfinite_abort = 200;  // consecutive non-finite losses before aborting
    std::uint64_t seed = 0;
};

struct TrainRecord {
    std::vector<double> loss, grad_norm, theta_norm, stagnation_frac, lipschitz_est;
    std::vector<std::uint8_t> overflow_skip;
    std::vector<long> eval_iters;
    std::vector<double> eval_errors;
    double final_error = std::numeric_limits<double>::quiet_NaN();
    long iters = 0;
    bool aborted = false;
    std::string abort_reason;
    ByteLedger ledger;
};

// One run under a policy: per iteration, sync the binary16 mirrors (Mixed),
// build the loss on a fresh tape in the compute format, backward, cast and
// unscale gradients to the master format, step the optimizer. Mixed skips the
// update when gradients contain Inf/NaN (recorded in overflow_skip); the
// master copy therefore never goes non-finite. Lipschitz estimates use
// binary32 gradient passes when the compute format is narrower.
TrainRecord train(const TrainTask& task, ParameterStore& ps, const PrecisionPolicy& policy,
                  const AdamConfig& adam, const TrainOptions& opts, ByteLedger* ledger = nullptr);

// Build a policy's parameter store from a shared binary32 initialization so
// every policy starts from bitwise-identical values (the binary16 copies are
// the rounded image of the same numbers).
ParameterStore make_policy_params(const std::vector<ParamShape>& shapes,
                                  const ParameterStore& init32, const PrecisionPolicy& policy,
                                  ByteLedger* ledger = nullptr);

}  // namespace precis
