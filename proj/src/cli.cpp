#include "precis/cli.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "precis/problems.hpp"

namespace precis {

namespace {

// ---- binary64 evaluation helpers (test metrics) ----

std::vector<double> fnn_eval64(const FnnConfig& cfg, const ParameterStore& ps,
                               const std::vector<double>& xrows) {
    const int n = int(xrows.size()) / cfg.in_dim;
    const ParameterStore w = cast_weights(ps, Format::Binary64);
    Tape t(Format::Binary64);
    const auto ids = push_params(t, w, false, false);
    const int x = t.constant(Tensor::from_flat(n, cfg.in_dim, Format::Binary64, xrows));
    const int out = Fnn(cfg).forward(t, ids, x);
    std::vector<double> pred(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) pred[std::size_t(r)] = t.val(out).get(r, 0);
    return pred;
}

// mean over functions of the per-function L2 relative error on a shared query grid
double deeponet_grid_error64(const DeepOnetConfig& cfg, const ParameterStore& ps,
                             const std::vector<std::vector<double>>& sensors,
                             const std::vector<double>& qrows, int qdim,
                             const std::vector<std::vector<double>>& targets) {
    const int nf = int(sensors.size());
    const int nq = int(qrows.size()) / qdim;
    std::vector<double> vflat;
    vflat.reserve(std::size_t(nf) * sensors[0].size());
    for (const auto& s : sensors) vflat.insert(vflat.end(), s.begin(), s.end());

    const ParameterStore w = cast_weights(ps, Format::Binary64);
    Tape t(Format::Binary64);
    const auto ids = push_params(t, w, false, false);
    const int v = t.constant(Tensor::from_flat(nf, int(sensors[0].size()), Format::Binary64, vflat));
    const int y = t.constant(Tensor::from_flat(nq, qdim, Format::Binary64, qrows));
    const int grid = DeepOnet(cfg).forward_grid(t, ids, v, y);

    double acc = 0.0;
    std::vector<double> row(static_cast<std::size_t>(nq));
    for (int f = 0; f < nf; ++f) {
        for (int q = 0; q < nq; ++q) row[std::size_t(q)] = t.val(grid).get(f, q);
        acc += l2_relative_error(row, targets[std::size_t(f)]);
    }
    return acc / nf;
}

// mean(square(r)) evaluated as up * mean(square(r * down)) with down a power of
// two, so the pairwise binary16 sum of squares stays inside the finite range
// even for hundreds of thousands of O(1) entries. Exact in wider formats.
int mean_square_scaled(Tape& t, int r, double down) {
    const Tensor& rv = t.val(r);
    const int dn = t.broadcast(t.constant(Tensor::scalar(down, t.format())), rv.rows, rv.cols);
    const int m = t.mean(t.square(t.mul(r, dn)));
    return t.mul(m, t.constant(Tensor::scalar(1.0 / (down * down), t.format())));
}

FnnConfig with_overrides(FnnConfig base, const ExperimentConfig& cfg) {
    if (cfg.depth > 0) base.depth = cfg.depth;
    if (cfg.width > 0) base.width = cfg.width;
    if (!cfg.activation.empty()) base.activation = parse_activation(cfg.activation);
    return base;
}

// ---- regression: fit x sin(5x) from 16 equispaced samples ----

BuiltExperiment build_regression(const ExperimentConfig& cfg, std::uint64_t seed) {
    FnnConfig net = with_overrides({3, 10, Activation::Tanh, 1, 1, seed}, cfg);

    struct Data {
        std::vector<double> xs, ys, test_xs, test_ys;
    };
    auto d = std::make_shared<Data>();
    d->xs = regression_points(16);
    d->test_xs = regression_points(256);
    for (double x : d->xs) d->ys.push_back(regression_target(x));
    for (double x : d->test_xs) d->test_ys.push_back(regression_target(x));

    BuiltExperiment b;
    b.shapes = Fnn(net).shapes();
    b.init32 = Fnn(net).init_params(Format::Binary32, false);
    b.task.build_loss = [net, d](Tape& t, const std::vector<int>& params, long, Rng&) {
        const int x = t.constant(Tensor::from_flat(16, 1, t.format(), d->xs));
        const int y = t.constant(Tensor::from_flat(16, 1, t.format(), d->ys));
        return loss_mse(t, Fnn(net).forward(t, params, x), y);
    };
    b.task.test_error = [net, d](const ParameterStore& ps) {
        return l2_relative_error(fnn_eval64(net, ps, d->test_xs), d->test_ys);
    };
    b.phases = {{10000, AdamConfig{1e-3}}};
    return b;
}

// ---- PINNs: heat, burgers, diffusion-validation ----

enum class PinnKind { Heat, Burgers, DiffusionValidation };

BuiltExperiment build_pinn(PinnKind kind, const ExperimentConfig& cfg, std::uint64_t seed) {
    FnnConfig net{4, 20, Activation::Tanh, 2, 1, seed};
    PinnProblem prob;
    int n_int = 0, n_ic = 0, n_bc = 0;
    long iters = 20000;
    switch (kind) {
        case PinnKind::Heat:
            prob = heat_problem();
            n_int = 2200, n_ic = 180, n_bc = 400;
            break;
        case PinnKind::Burgers:
            prob = burgers_problem();
            net.depth = 3, net.width = 32;
            n_int = 1800, n_ic = 280, n_bc = 160;
            break;
        case PinnKind::DiffusionValidation:
            prob = diffusion_validation_problem();
            net.depth = 4, net.width = 32;
            n_int = 200, n_ic = 30, n_bc = 30;
            iters = 2000;
            break;
    }
    net = with_overrides(net, cfg);

    struct Data {
        PinnPointSet pts;
        std::vector<double> forcing;  // diffusion-validation only
        std::vector<double> test_xy, test_u;
    };
    auto d = std::make_shared<Data>();
    d->pts = sample_points(prob, n_int, n_ic, n_bc, seed * 1000 + 1);
    if (kind == PinnKind::DiffusionValidation)
        for (std::size_t q = 0; q < d->pts.n_interior(); ++q)
            d->forcing.push_back(
                diffusion_validation_forcing(d->pts.interior[2 * q], d->pts.interior[2 * q + 1]));

    if (kind == PinnKind::Burgers) {
        for (int j = 1; j <= 20; ++j)
            for (int i = 0; i <= 40; ++i) {
                const double x = prob.x_lo + (prob.x_hi - prob.x_lo) * i / 40.0;
                const double tt = prob.t_hi * j / 20.0;
                d->test_xy.push_back(x);
                d->test_xy.push_back(tt);
                d->test_u.push_back(burgers_reference(x, tt, prob.nu));
            }
    } else {
        const int g = kind == PinnKind::Heat ? 64 : 50;
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i) {
                const double x = prob.x_lo + (prob.x_hi - prob.x_lo) * i / (g - 1);
                const double tt = prob.t_hi * j / (g - 1);
                d->test_xy.push_back(x);
                d->test_xy.push_back(tt);
                d->test_u.push_back(kind == PinnKind::Heat ? heat_exact(x, tt, prob.alpha)
                                                           : diffusion_validation_exact(x, tt));
            }
    }

    BuiltExperiment b;
    b.shapes = Fnn(net).shapes();
    b.init32 = Fnn(net).init_params(Format::Binary32, false);
    const double alpha = prob.alpha, nu = prob.nu;
    b.task.build_loss = [net, d, kind, alpha, nu](Tape& t, const std::vector<int>& params, long, Rng&) {
        const int ni = int(d->pts.n_interior());
        const int xi = t.constant(Tensor::from_flat(ni, 2, t.format(), d->pts.interior));
        const Jet u = fnn_input_jet(Fnn(net), t, params, xi, 0, 1, 2);
        int r = -1;
        switch (kind) {
            case PinnKind::Heat: r = heat_residual(t, u, alpha); break;
            case PinnKind::Burgers: r = burgers_residual(t, u, nu); break;
            case PinnKind::DiffusionValidation: {
                const int f = t.constant(Tensor::from_flat(ni, 1, t.format(), d->forcing));
                r = diffusion_validation_residual(t, u, f);
                break;
            }
        }
        const int loss_r = t.mean(t.square(r));
        const int nb = int(d->pts.n_icbc());
        const int xb = t.constant(Tensor::from_flat(nb, 2, t.format(), d->pts.icbc));
        const int yb = t.constant(Tensor::from_flat(nb, 1, t.format(), d->pts.icbc_u));
        return t.add(loss_r, loss_mse(t, Fnn(net).forward(t, params, xb), yb));
    };
    b.task.test_error = [net, d](const ParameterStore& ps) {
        return l2_relative_error(fnn_eval64(net, ps, d->test_xy), d->test_u);
    };
    b.phases = {{iters, AdamConfig{1e-3}}};
    return b;
}

// ---- advection: supervised DeepONet on square-wave transport ----

BuiltExperiment build_advection(const ExperimentConfig& cfg, std::uint64_t seed) {
    const int n_train = 300, n_test = 200, n_sens = 100, n_query = 100;
    DeepOnetConfig net{{2, 96, Activation::Relu, n_sens, 96, seed * 1000 + 3},
                       {4, 96, Activation::Relu, 1, 96, seed * 1000 + 4},
                       96};
    if (cfg.depth > 0) net.branch.depth = net.trunk.depth = cfg.depth;
    if (cfg.width > 0) {
        net.branch.width = net.trunk.width = cfg.width;
        net.branch.out_dim = net.trunk.out_dim = net.p = cfg.width;
    }
    if (!cfg.activation.empty())
        net.branch.activation = net.trunk.activation = parse_activation(cfg.activation);

    struct Data {
        OperatorDataset train, test;
        std::vector<double> vflat, tflat, qflat;
    };
    auto d = std::make_shared<Data>();
    d->train = advection_dataset(n_train, n_sens, n_query, seed * 1000 + 1);
    d->test = advection_dataset(n_test, n_sens, n_query, seed * 1000 + 2);
    for (const auto& s : d->train.sensors) d->vflat.insert(d->vflat.end(), s.begin(), s.end());
    for (const auto& u : d->train.targets) d->tflat.insert(d->tflat.end(), u.begin(), u.end());
    d->qflat = d->train.query[0];

    BuiltExperiment b;
    b.shapes = DeepOnet(net).shapes();
    b.init32 = DeepOnet(net).init_params(Format::Binary32, false);
    b.task.build_loss = [net, d, n_train, n_sens, n_query](Tape& t, const std::vector<int>& params,
                                                           long, Rng&) {
        const int v = t.constant(Tensor::from_flat(n_train, n_sens, t.format(), d->vflat));
        const int y = t.constant(Tensor::from_flat(n_query, 1, t.format(), d->qflat));
        const int grid = DeepOnet(net).forward_grid(t, params, v, y);
        const int tgt = t.constant(Tensor::from_flat(n_train, n_query, t.format(), d->tflat));
        return loss_mean_l2_relative(t, grid, tgt);
    };
    b.task.test_error = [net, d](const ParameterStore& ps) {
        return deeponet_grid_error64(net, ps, d->test.sensors, d->test.query[0], 1,
                                     d->test.targets);
    };
    b.phases = {{20000, AdamConfig{3e-3}}};
    return b;
}

// ---- diffusion-reaction: physics-informed DeepONet, GRF sources ----

BuiltExperiment build_diffusion_reaction(const ExperimentConfig& cfg, std::uint64_t seed) {
    const int n_func = 400, n_sens = 100, n_col_side = 30, n_ic = 100, n_bc = 100;
    const int n_col = n_col_side * n_col_side, n_icbc = n_ic + n_bc;
    const double D = 0.01, k = 0.01;
    DeepOnetConfig net{{2, 64, Activation::Tanh, n_sens, 64, seed * 1000 + 3},
                       {2, 64, Activation::Tanh, 2, 64, seed * 1000 + 4},
                       64};
    if (cfg.depth > 0) net.branch.depth = net.trunk.depth = cfg.depth;
    if (cfg.width > 0) {
        net.branch.width = net.trunk.width = cfg.width;
        net.branch.out_dim = net.trunk.out_dim = net.p = cfg.width;
    }
    if (!cfg.activation.empty())
        net.branch.activation = net.trunk.activation = parse_activation(cfg.activation);

    struct Data {
        std::vector<double> vflat;        // n_func x n_sens
        std::vector<double> col_scaled;   // n_col x 2, trunk inputs in [-1,1]
        std::vector<double> icbc_scaled;  // n_icbc x 2
        std::vector<double> vsrc;         // n_func x n_col, source at collocation x
        OperatorDataset test;
        std::vector<double> test_q_scaled;
    };
    auto d = std::make_shared<Data>();
    const auto scale01 = [](double z) { return 2.0 * z - 1.0; };

    const auto grfs = sample_grf(n_func, n_sens, 0.2, seed * 1000 + 1);
    for (const auto& g : grfs) d->vflat.insert(d->vflat.end(), g.begin(), g.end());

    std::vector<double> col_x(static_cast<std::size_t>(n_col));
    for (int j = 0; j < n_col_side; ++j)
        for (int i = 0; i < n_col_side; ++i) {
            const double x = double(i + 1) / (n_col_side + 1);
            const double tt = double(j + 1) / (n_col_side + 1);
            col_x[std::size_t(j) * n_col_side + i] = x;
            d->col_scaled.push_back(scale01(x));
            d->col_scaled.push_back(scale01(tt));
        }
    for (int i = 0; i < n_ic; ++i) {
        d->icbc_scaled.push_back(scale01(double(i) / (n_ic - 1)));
        d->icbc_scaled.push_back(scale01(0.0));
    }
    for (int i = 0; i < n_bc; ++i) {
        d->icbc_scaled.push_back(scale01(i < n_bc / 2 ? 0.0 : 1.0));
        d->icbc_scaled.push_back(scale01(double(i % (n_bc / 2)) / (n_bc / 2 - 1)));
    }

    // sources linearly interpolated from the sensor grid onto collocation x
    for (const auto& g : grfs)
        for (int q = 0; q < n_col; ++q) {
            const double pos = col_x[std::size_t(q)] * (n_sens - 1);
            const int i0 = std::min(int(pos), n_sens - 2);
            const double w = pos - i0;
            d->vsrc.push_back((1 - w) * g[std::size_t(i0)] + w * g[std::size_t(i0) + 1]);
        }

    d->test = diffusion_reaction_dataset(200, n_sens, 26, D, k, seed * 1000 + 2);
    for (std::size_t q = 0; q < d->test.query[0].size(); ++q)
        d->test_q_scaled.push_back(scale01(d->test.query[0][q]));

    BuiltExperiment b;
    b.shapes = DeepOnet(net).shapes();
    b.init32 = DeepOnet(net).init_params(Format::Binary32, false);
    b.task.build_loss = [net, d, n_func, n_sens, n_col, n_icbc, D, k](
                            Tape& t, const std::vector<int>& params, long, Rng&) {
        const int v = t.constant(Tensor::from_flat(n_func, n_sens, t.format(), d->vflat));
        const int yc = t.constant(Tensor::from_flat(n_col, 2, t.format(), d->col_scaled));
        const Jet jy = jet_input(t, yc, 0, 1, true);
        const Jet g = DeepOnet(net).forward_grid_trunk_jet(t, params, v, jy);
        // trunk inputs are the affinely scaled coordinates x' = 2x - 1, so
        // physical derivatives pick up exact powers of two: u_t = 2 u_t',
        // u_xx = 4 u_x'x'
        Jet gp;
        gp.v = g.v;
        gp.dx = g.dx;
        gp.dxx = t.mul(g.dxx, t.broadcast(t.constant(Tensor::scalar(4.0, t.format())), n_func, n_col));
        gp.dt = t.mul(g.dt, t.broadcast(t.constant(Tensor::scalar(2.0, t.format())), n_func, n_col));
        const int src = t.constant(Tensor::from_flat(n_func, n_col, t.format(), d->vsrc));
        const int r = diffusion_reaction_residual(t, gp, src, D, k);
        const int loss_r = mean_square_scaled(t, r, 1.0 / 64.0);
        const int yb = t.constant(Tensor::from_flat(n_icbc, 2, t.format(), d->icbc_scaled));
        const int ub = DeepOnet(net).forward_grid(t, params, v, yb);
        return t.add(loss_r, mean_square_scaled(t, ub, 1.0 / 64.0));
    };
    b.task.test_error = [net, d](const ParameterStore& ps) {
        return deeponet_grid_error64(net, ps, d->test.sensors, d->test_q_scaled, 2,
                                     d->test.targets);
    };
    b.phases = {{9000, AdamConfig{2e-3, 0.9, 0.999, 1e-7}},
                {3000, AdamConfig{5e-4, 0.9, 0.999, 1e-7}}};
    return b;
}

}  // namespace

const std::vector<ProblemInfo>& problem_registry() {
    static const std::vector<ProblemInfo> reg = {
        {"regression", "fnn", 10000, 500, true, "fit x sin(5x) from 16 samples, MSE"},
        {"heat", "fnn", 20000, 1000, false, "heat equation PINN, alpha = 0.4"},
        {"burgers", "fnn", 20000, 1000, false, "viscous Burgers PINN, nu = 0.01/pi"},
        {"diffusion-validation", "fnn", 2000, 100, true,
         "forced diffusion PINN with a closed-form solution"},
        {"advection", "deeponet", 20000, 1000, false,
         "square-wave transport operator, supervised targets"},
        {"diffusion-reaction", "deeponet", 12000, 1000, false,
         "physics-informed source-to-solution operator, Crank-Nicolson test oracle"},
    };
    return reg;
}

const ProblemInfo& problem_info(const std::string& name) {
    for (const auto& p : problem_registry())
        if (p.name == name) return p;
    throw std::invalid_argument("unknown problem: " + name);
}

BuiltExperiment build_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
    const ProblemInfo& info = problem_info(cfg.problem);
    BuiltExperiment b;
    if (cfg.problem == "regression")
        b = build_regression(cfg, seed);
    else if (cfg.problem == "heat")
        b = build_pinn(PinnKind::Heat, cfg, seed);
    else if (cfg.problem == "burgers")
        b = build_pinn(PinnKind::Burgers, cfg, seed);
    else if (cfg.problem == "diffusion-validation")
        b = build_pinn(PinnKind::DiffusionValidation, cfg, seed);
    else if (cfg.problem == "advection")
        b = build_advection(cfg, seed);
    else
        b = build_diffusion_reaction(cfg, seed);

    if (cfg.lr > 0)
        for (auto& ph : b.phases) ph.adam.lr = cfg.lr;
    if (cfg.iters > 0) {
        long total = 0;
        for (const auto& ph : b.phases) total += ph.iters;
        long used = 0;
        for (std::size_t i = 0; i + 1 < b.phases.size(); ++i) {
            b.phases[i].iters = std::max<long>(1, b.phases[i].iters * cfg.iters / total);
            used += b.phases[i].iters;
        }
        b.phases.back().iters = std::max<long>(1, cfg.iters - used);
    }

    b.opts.iters = 0;
    for (const auto& ph : b.phases) b.opts.iters += ph.iters;
    b.opts.eval_every = cfg.eval_every > 0 ? cfg.eval_every : info.default_eval_every;
    b.opts.record_lipschitz = cfg.record_lipschitz || info.default_lipschitz;
    b.opts.seed = seed;
    return b;
}

PrecisionPolicy resolve_policy(const ExperimentConfig& cfg, const BuiltExperiment& built) {
    PrecisionPolicy p = cfg.policy;
    p.loss_scale = p.is_mixed() ? (cfg.loss_scale > 0 ? cfg.loss_scale : built.mixed_loss_scale)
                                : 1.0;
    return p;
}

namespace {

void append_record(TrainRecord& dst, const TrainRecord& src) {
    const long base = dst.iters;
    dst.loss.insert(dst.loss.end(), src.loss.begin(), src.loss.end());
    dst.grad_norm.insert(dst.grad_norm.end(), src.grad_norm.begin(), src.grad_norm.end());
    dst.theta_norm.insert(dst.theta_norm.end(), src.theta_norm.begin(), src.theta_norm.end());
    dst.stagnation_frac.insert(dst.stagnation_frac.end(), src.stagnation_frac.begin(),
                               src.stagnation_frac.end());
    dst.lipschitz_est.insert(dst.lipschitz_est.end(), src.lipschitz_est.begin(),
                             src.lipschitz_est.end());
    dst.overflow_skip.insert(dst.overflow_skip.end(), src.overflow_skip.begin(),
                             src.overflow_skip.end());
    for (long it : src.eval_iters) dst.eval_iters.push_back(base + it);
    dst.eval_errors.insert(dst.eval_errors.end(), src.eval_errors.begin(), src.eval_errors.end());
    dst.final_error = src.final_error;
    dst.iters += src.iters;
    dst.aborted = src.aborted;
    dst.abort_reason = src.abort_reason;
    dst.ledger = src.ledger;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
    BuiltExperiment b = build_experiment(cfg, seed);
    const PrecisionPolicy policy = resolve_policy(cfg, b);

    RunResult res;
    ByteLedger ledger;
    res.params = make_policy_params(b.shapes, b.init32, policy, &ledger);

    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < b.phases.size(); ++i) {
        TrainOptions opts = b.opts;
        opts.iters = b.phases[i].iters;
        const TrainRecord rec = train(b.task, res.params, policy, b.phases[i].adam, opts, &ledger);
        if (i == 0)
            res.record = rec;
        else
            append_record(res.record, rec);
        if (res.record.aborted) break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.seconds = std::chrono::duration<double>(t1 - t0).count();
    res.iters_per_second = res.seconds > 0 ? double(res.record.iters) / res.seconds : 0.0;
    return res;
}

}  // namespace precis
