#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "precis/diagnostics.hpp"
#include "precis/half.hpp"
#include "precis/trainer.hpp"

namespace precis {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// per-operation rounding into the master format
double rnd(Format f, double x) {
    switch (f) {
        case Format::Binary16: return double(round16(float(x)));
        case Format::Binary32: return double(float(x));
        default: return x;
    }
}

double norm_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double grads_norm(const std::vector<Tensor>& grads) {
    double s = 0;
    for (const auto& g : grads)
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.get(i);
            s += x * x;
        }
    return std::sqrt(s);
}

bool grads_finite(const std::vector<Tensor>& grads) {
    for (const auto& g : grads)
        if (!g.all_finite()) return false;
    return true;
}

std::vector<double> flatten_grads(const std::vector<Tensor>& grads) {
    std::vector<double> out;
    for (const auto& g : grads)
        for (std::size_t i = 0; i < g.size(); ++i) out.push_back(g.get(i));
    return out;
}

}  // namespace

PolicyMode parse_policy(const std::string& name) {
    if (name == "oracle64") return PolicyMode::Oracle64;
    if (name == "full32") return PolicyMode::Full32;
    if (name == "pure16") return PolicyMode::Pure16;
    if (name == "mixed") return PolicyMode::Mixed;
    throw std::invalid_argument("unknown policy: " + name);
}

const char* policy_name(PolicyMode m) {
    switch (m) {
        case PolicyMode::Oracle64: return "oracle64";
        case PolicyMode::Full32: return "full32";
        case PolicyMode::Pure16: return "pure16";
        default: return "mixed";
    }
}

Format PrecisionPolicy::compute_format() const {
    switch (mode) {
        case PolicyMode::Oracle64: return Format::Binary64;
        case PolicyMode::Full32: return Format::Binary32;
        default: return Format::Binary16;
    }
}

Format PrecisionPolicy::master_format() const {
    switch (mode) {
        case PolicyMode::Oracle64: return Format::Binary64;
        case PolicyMode::Pure16: return Format::Binary16;
        default: return Format::Binary32;
    }
}

int loss_mse(Tape& t, int pred, int target) {
    const int d = t.sub(pred, target);
    return t.mean(t.square(d));
}

int loss_mean_l2_relative(Tape& t, int pred, int target) {
    // t.val references go stale once new nodes are pushed; read everything first
    require(same_shape(t.val(pred), t.val(target)), "loss_mean_l2_relative: shape mismatch");
    const int n = t.val(target).rows, c = t.val(target).cols;
    double tmax = 0;
    {
        const Tensor& tv = t.val(target);
        for (int r = 0; r < n; ++r) {
            double rn = 0;
            for (int j = 0; j < c; ++j) rn += tv.get(r, j) * tv.get(r, j);
            if (rn == 0) throw std::domain_error("loss_mean_l2_relative: zero-norm target row");
        }
        for (std::size_t i = 0; i < tv.size(); ++i) tmax = std::max(tmax, std::fabs(tv.get(i)));
    }

    const int d = t.sub(pred, target);
    double smax = 0;
    {
        const Tensor& dv = t.val(d);
        for (std::size_t i = 0; i < dv.size(); ++i) smax = std::max(smax, std::fabs(dv.get(i)));
    }
    if (smax == 0) return t.mean(t.square(d));

    const Format f = t.format();
    const int ones = t.constant(Tensor::full(c, 1, f, 1.0));
    auto spread = [&](int s, int r, int cc) { return (r == 1 && cc == 1) ? s : t.broadcast(s, r, cc); };
    auto row_norm = [&](int node, double scale) {
        const int s = t.constant(Tensor::scalar(scale, f));
        const int q = t.square(t.div(node, spread(s, n, c)));
        const int sums = t.matmul(q, ones);  // n x 1
        return t.mul(t.sqrt(sums), spread(s, n, 1));
    };
    const int dn = row_norm(d, smax);
    const int tn = row_norm(target, tmax);
    return t.mean(t.div(dn, tn));
}

int stabilize_ratio(Tape& t, int a, int b) {
    return t.square(t.div(a, t.sqrt(b)));
}

double l2_relative_error(const std::vector<double>& pred, const std::vector<double>& truth) {
    require(pred.size() == truth.size(), "l2_relative_error: length mismatch");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    if (den == 0) throw std::domain_error("l2_relative_error: zero-norm truth");
    return std::sqrt(num / den);
}

Adam::Adam(AdamConfig cfg, const PrecisionPolicy& policy, ByteLedger* ledger)
    : cfg_(cfg), fmt_(policy.master_format()), ledger_(ledger) {
    require(cfg.lr > 0, "adam: lr must be positive");
    require(cfg.beta1 >= 0 && cfg.beta1 < 1, "adam: beta1 out of range");
    require(cfg.beta2 >= 0 && cfg.beta2 < 1, "adam: beta2 out of range");
    require(cfg.eps >= 0, "adam: eps must be nonnegative");
    const bool half_compute = policy.compute_format() == Format::Binary16;
    eps_ = cfg.eps > 0 ? cfg.eps : (half_compute ? 1e-5 : 1e-7);
}

void Adam::step(ParameterStore& ps, const std::vector<Tensor>& grads) {
    require(grads.size() == ps.master.size(), "adam: gradient count mismatch");
    if (m_.empty()) {
        for (const auto& p : ps.master) {
            m_.push_back(Tensor::zeros(p.rows, p.cols, fmt_));
            v_.push_back(Tensor::zeros(p.rows, p.cols, fmt_));
            if (ledger_) {
                ledger_->charge(ByteLedger::kParam, fmt_, p.size());
                ledger_->charge(ByteLedger::kParam, fmt_, p.size());
            }
        }
    }
    ++t_;
    const double b1 = rnd(fmt_, cfg_.beta1), b2 = rnd(fmt_, cfg_.beta2);
    const double ob1 = rnd(fmt_, 1 - cfg_.beta1), ob2 = rnd(fmt_, 1 - cfg_.beta2);
    const double bc1 = rnd(fmt_, 1 - std::pow(cfg_.beta1, double(t_)));
    const double bc2 = rnd(fmt_, 1 - std::pow(cfg_.beta2, double(t_)));
    const double lr = rnd(fmt_, cfg_.lr), eps = rnd(fmt_, eps_);

    for (std::size_t k = 0; k < grads.size(); ++k) {
        Tensor& th = ps.master[k];
        Tensor& m = m_[k];
        Tensor& v = v_[k];
        require(grads[k].format == fmt_, "adam: gradient format mismatch");
        require(same_shape(grads[k], th), "adam: gradient shape mismatch");
        for (std::size_t i = 0; i < th.size(); ++i) {
            const double g = grads[k].get(i);
            const double mi = rnd(fmt_, rnd(fmt_, b1 * m.get(i)) + rnd(fmt_, ob1 * g));
            const double g2 = rnd(fmt_, g * g);
            const double vi = rnd(fmt_, rnd(fmt_, b2 * v.get(i)) + rnd(fmt_, ob2 * g2));
            m.set(i, mi);
            v.set(i, vi);
            const double mh = rnd(fmt_, mi / bc1);
            const double vh = rnd(fmt_, vi / bc2);
            const double den = rnd(fmt_, rnd(fmt_, std::sqrt(vh)) + eps);
            const double delta = rnd(fmt_, lr * rnd(fmt_, mh / den));
            th.set(i, rnd(fmt_, th.get(i) - delta));
        }
    }
}

void Gd::step(ParameterStore& ps, const std::vector<Tensor>& grads) {
    require(grads.size() == ps.master.size(), "gd: gradient count mismatch");
    const double lr = rnd(fmt_, lr_);
    for (std::size_t k = 0; k < grads.size(); ++k) {
        Tensor& th = ps.master[k];
        for (std::size_t i = 0; i < th.size(); ++i) {
            const double delta = rnd(fmt_, lr * grads[k].get(i));
            th.set(i, rnd(fmt_, th.get(i) - delta));
        }
    }
}

ParameterStore make_policy_params(const std::vector<ParamShape>& shapes,
                                  const ParameterStore& init32, const PrecisionPolicy& policy,
                                  ByteLedger* ledger) {
    require(init32.master_format == Format::Binary32, "make_policy_params: init must be binary32");
    ParameterStore ps =
        make_params(shapes, policy.master_format(), policy.is_mixed(), ledger);
    ps.load_flat(init32.flatten());
    if (policy.is_mixed()) ps.sync16();
    return ps;
}

namespace {

// binary32 gradient pass at the current master weights, for the Lipschitz series
std::vector<double> grad32_pass(const TrainTask& task, const ParameterStore& ps, long iter,
                                Rng rng) {
    Tape t(Format::Binary32, nullptr);
    std::vector<int> ids;
    ids.reserve(ps.master.size());
    for (const auto& p : ps.master) ids.push_back(t.leaf(cast(p, Format::Binary32)));
    const int loss = task.build_loss(t, ids, iter, rng);
    t.backward(loss);
    std::vector<double> out;
    for (int id : ids) {
        const Tensor& g = t.grad(id);
        for (std::size_t i = 0; i < g.size(); ++i) out.push_back(g.get(i));
    }
    return out;
}

}  // namespace

TrainRecord train(const TrainTask& task, ParameterStore& ps, const PrecisionPolicy& policy,
                  const AdamConfig& adam, const TrainOptions& opts, ByteLedger* ledger) {
    require(bool(task.build_loss), "train: task has no loss");
    require(opts.iters >= 1, "train: iters must be >= 1");
    require(ps.master_format == policy.master_format(), "train: store/policy format mismatch");
    if (policy.loss_scale != 1.0) {
        require(policy.is_mixed(), "train: loss_scale requires the mixed policy");
        const double l2 = std::log2(policy.loss_scale);
        require(policy.loss_scale > 0 && l2 == std::floor(l2), "train: loss_scale must be a power of two");
    }
    if (policy.is_mixed()) require(!ps.compute16.empty(), "train: mixed policy needs binary16 mirrors");

    const Format cfmt = policy.compute_format();
    const Format mfmt = policy.master_format();
    const bool reuse_grads_for_lip = cfmt != Format::Binary16;

    Adam opt(adam, policy, ledger);
    Rng root(opts.seed);
    TrainRecord rec;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> prev_theta, prev_g;
    bool have_prev = false;
    long consecutive_bad = 0;

    for (long it = 0; it < opts.iters; ++it) {
        if (policy.is_mixed()) ps.sync16();

        Tape t(cfmt, ledger);
        const auto ids = push_params(t, ps, true, policy.is_mixed());
        Rng it_rng = root.derive(std::uint64_t(it));
        const int loss = task.build_loss(t, ids, it, it_rng);
        const double loss_val = t.val(loss).get(0, 0);

        int back = loss;
        if (policy.is_mixed() && policy.loss_scale != 1.0)
            back = t.mul(loss, t.constant(Tensor::scalar(policy.loss_scale, cfmt)));
        t.backward(back);

        std::vector<Tensor> grads;
        grads.reserve(ids.size());
        for (int id : ids) {
            Tensor g = cast(t.grad(id), mfmt);
            if (policy.loss_scale != 1.0)
                for (std::size_t i = 0; i < g.size(); ++i) g.set(i, g.get(i) / policy.loss_scale);
            grads.push_back(std::move(g));
        }

        const std::vector<double> theta_before = ps.flatten();
        rec.loss.push_back(loss_val);
        rec.grad_norm.push_back(grads_norm(grads));
        rec.theta_norm.push_back(norm_of(theta_before));

        if (opts.record_lipschitz) {
            std::vector<double> g_here = reuse_grads_for_lip
                                             ? flatten_grads(grads)
                                             : grad32_pass(task, ps, it, root.derive(std::uint64_t(it)));
            double lip = nan;
            if (have_prev) {
                std::vector<double> dg(g_here.size()), dth(theta_before.size());
                for (std::size_t i = 0; i < g_here.size(); ++i) dg[i] = g_here[i] - prev_g[i];
                for (std::size_t i = 0; i < dth.size(); ++i) dth[i] = theta_before[i] - prev_theta[i];
                const double den = norm_of(dth);
                lip = den > 0 ? norm_of(dg) / den : nan;
            }
            rec.lipschitz_est.push_back(lip);
            prev_g = std::move(g_here);
            prev_theta = theta_before;
            have_prev = true;
        } else {
            rec.lipschitz_est.push_back(nan);
        }

        const bool skip = policy.is_mixed() && !grads_finite(grads);
        if (!skip) opt.step(ps, grads);
        rec.overflow_skip.push_back(skip ? 1 : 0);

        rec.stagnation_frac.push_back(stagnation_fraction(theta_before, ps.flatten()));

        rec.iters = it + 1;
        consecutive_bad = std::isfinite(loss_val) ? 0 : consecutive_bad + 1;
        if (consecutive_bad > opts.nonfinite_abort) {
            rec.aborted = true;
            rec.abort_reason = "loss non-finite for " + std::to_string(consecutive_bad) +
                               " consecutive iterations at iteration " + std::to_string(it);
            break;
        }

        const bool last = it + 1 == opts.iters;
        if (task.test_error &&
            ((opts.eval_every > 0 && (it + 1) % opts.eval_every == 0) || last)) {
            const double e = task.test_error(ps);
            rec.eval_iters.push_back(it + 1);
            rec.eval_errors.push_back(e);
            if (last) rec.final_error = e;
        }
    }

    if (ledger) rec.ledger = *ledger;
    return rec;
}

}  // namespace precis
