#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "precis/model.hpp"
#include "precis/rng.hpp"

using namespace precis;

namespace {

double act_ref(Activation a, double x) {
    switch (a) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Relu: return x > 0 ? x : 0;
        case Activation::Elu: return x > 0 ? x : std::expm1(x);
        case Activation::Swish: return x / (1 + std::exp(-x));
    }
    return 0;
}

// independent plain-loop evaluator over the master tensors
std::vector<double> manual_fnn(const FnnConfig& cfg, const ParameterStore& ps,
                               std::size_t tensor_off, std::vector<double> h) {
    for (int l = 0; l <= cfg.depth; ++l) {
        const Tensor& w = ps.master[tensor_off + std::size_t(2 * l)];
        const Tensor& b = ps.master[tensor_off + std::size_t(2 * l) + 1];
        std::vector<double> nxt(std::size_t(w.cols));
        for (int j = 0; j < w.cols; ++j) {
            double s = b.get(0, j);
            for (int i = 0; i < w.rows; ++i) s += h[std::size_t(i)] * w.get(i, j);
            nxt[std::size_t(j)] = l < cfg.depth ? act_ref(cfg.activation, s) : s;
        }
        h = std::move(nxt);
    }
    return h;
}

int forward_once(const Fnn& net, const ParameterStore& ps, const std::vector<double>& xrow,
                 std::vector<double>& out) {
    Tape t(ps.master_format);
    const auto params = push_params(t, ps, false, false);
    const int x = t.constant(Tensor::from_flat(1, int(xrow.size()), ps.master_format, xrow));
    const int o = net.forward(t, params, x);
    out.clear();
    for (std::size_t i = 0; i < t.val(o).size(); ++i) out.push_back(t.val(o).get(i));
    return o;
}

}  // namespace

TEST_CASE("activation names") {
    CHECK(parse_activation("tanh") == Activation::Tanh);
    CHECK(parse_activation("swish") == Activation::Swish);
    CHECK(std::string(activation_name(Activation::Elu)) == "elu");
    CHECK_THROWS_AS(parse_activation("gelu"), std::invalid_argument);
}

TEST_CASE("zero parameters give zero output") {
    FnnConfig cfg{2, 4, Activation::Tanh, 3, 2, 0};
    Fnn net(cfg);
    ParameterStore ps = make_params(net.shapes(), Format::Binary64, false);
    std::vector<double> out;
    forward_once(net, ps, {0.7, -1.2, 2.5}, out);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("identity-ish single unit") {
    FnnConfig cfg{1, 1, Activation::Tanh, 1, 1, 0};
    Fnn net(cfg);
    ParameterStore ps = make_params(net.shapes(), Format::Binary64, false);
    ps.master[0].set(std::size_t(0), 1.0);  // W1
    ps.master[2].set(std::size_t(0), 1.0);  // Wout
    std::vector<double> out;
    forward_once(net, ps, {0.0}, out);
    CHECK(out[0] == 0.0);
    forward_once(net, ps, {0.5}, out);
    CHECK(out[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
}

TEST_CASE("fnn forward matches an independent evaluator") {
    for (Activation a : {Activation::Tanh, Activation::Relu, Activation::Elu, Activation::Swish}) {
        FnnConfig cfg{3, 8, a, 2, 2, 0};
        Fnn net(cfg);
        ParameterStore ps = net.init_params(Format::Binary64, false);
        Rng rng(77);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> x = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
            std::vector<double> got;
            forward_once(net, ps, x, got);
            const auto want = manual_fnn(cfg, ps, 0, x);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i)
                CHECK(std::fabs(got[i] - want[i]) <= 1e-12 * std::max(1.0, std::fabs(want[i])));
        }
    }
}

TEST_CASE("deeponet pinned contraction") {
    FnnConfig bcfg{1, 2, Activation::Tanh, 3, 1, 0};
    FnnConfig tcfg{1, 2, Activation::Tanh, 1, 1, 0};
    DeepOnet g({bcfg, tcfg, 1});
    ParameterStore ps = make_params(g.shapes(), Format::Binary64, false);
    // zero weights: branch output = its output bias, trunk likewise
    ps.master[3].set(std::size_t(0), 2.0);                   // branch output bias
    ps.master[g.branch_tensor_count() + 3].set(std::size_t(0), 3.0);  // trunk output bias
    ps.master.back().set(std::size_t(0), 1.0);               // b0

    Tape t(Format::Binary64);
    const auto params = push_params(t, ps, false, false);
    const int v = t.constant(Tensor::from_flat(1, 3, Format::Binary64, {0.3, -0.8, 1.4}));
    const int y = t.constant(Tensor::scalar(0.25, Format::Binary64));
    CHECK(t.val(g.forward(t, params, v, y)).get(std::size_t(0)) == 7.0);

    // zero branch entirely: G == b0 regardless of a live trunk
    ParameterStore ps2 = g.init_params(Format::Binary64, false);
    for (std::size_t k = 0; k < g.branch_tensor_count(); ++k)
        for (std::size_t i = 0; i < ps2.master[k].size(); ++i) ps2.master[k].set(i, 0.0);
    ps2.master.back().set(std::size_t(0), 1.5);
    Tape t2(Format::Binary64);
    const auto p2 = push_params(t2, ps2, false, false);
    const int v2 = t2.constant(Tensor::from_flat(1, 3, Format::Binary64, {2, -1, 0.5}));
    const int y2 = t2.constant(Tensor::scalar(-0.7, Format::Binary64));
    CHECK(t2.val(g.forward(t2, p2, v2, y2)).get(std::size_t(0)) == 1.5);
}

TEST_CASE("deeponet forward matches an independent dot-product evaluator") {
    FnnConfig bcfg{2, 6, Activation::Relu, 5, 4, 0};
    FnnConfig tcfg{2, 6, Activation::Tanh, 2, 4, 1};
    DeepOnet g({bcfg, tcfg, 4});
    ParameterStore ps = g.init_params(Format::Binary64, false);
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> v(5), y(2);
        for (auto& e : v) e = rng.uniform(-1, 1);
        for (auto& e : y) e = rng.uniform(-1, 1);
        Tape t(Format::Binary64);
        const auto params = push_params(t, ps, false, false);
        const int vn = t.constant(Tensor::from_flat(1, 5, Format::Binary64, v));
        const int yn = t.constant(Tensor::from_flat(1, 2, Format::Binary64, y));
        const double got = t.val(g.forward(t, params, vn, yn)).get(std::size_t(0));

        const auto bv = manual_fnn(bcfg, ps, 0, v);
        const auto tv = manual_fnn(tcfg, ps, g.branch_tensor_count(), y);
        const double want =
            std::inner_product(bv.begin(), bv.end(), tv.begin(), ps.master.back().get(std::size_t(0)));
        CHECK(std::fabs(got - want) <= 1e-12 * std::max(1.0, std::fabs(want)));
    }
}

TEST_CASE("initialization is deterministic and glorot-bounded") {
    FnnConfig cfg{2, 16, Activation::Tanh, 3, 1, 42};
    Fnn net(cfg);
    ParameterStore a = net.init_params(Format::Binary32, false);
    ParameterStore b = net.init_params(Format::Binary32, false);
    REQUIRE(a.master.size() == b.master.size());
    for (std::size_t k = 0; k < a.master.size(); ++k)
        CHECK(std::memcmp(a.master[k].f.data(), b.master[k].f.data(),
                          a.master[k].size() * sizeof(float)) == 0);

    ParameterStore c = net.init_params(Format::Binary32, false);
    c.master[0].set(std::size_t(0), 123.0);
    CHECK(a.master[0].get(std::size_t(0)) != 123.0);

    // weights inside the glorot bound, biases zero
    const auto shapes = net.shapes();
    for (std::size_t k = 0; k < shapes.size(); k += 2) {
        const double bound = std::sqrt(6.0 / (shapes[k].rows + shapes[k].cols));
        bool nonzero = false;
        for (std::size_t i = 0; i < a.master[k].size(); ++i) {
            CHECK(std::fabs(a.master[k].get(i)) <= bound);
            nonzero = nonzero || a.master[k].get(i) != 0.0;
        }
        CHECK(nonzero);
        for (std::size_t i = 0; i < a.master[k + 1].size(); ++i)
            CHECK(a.master[k + 1].get(i) == 0.0);
    }
}

TEST_CASE("cast_weights") {
    FnnConfig cfg{2, 8, Activation::Tanh, 2, 1, 3};
    Fnn net(cfg);
    ParameterStore ps = net.init_params(Format::Binary32, false);

    ParameterStore h = cast_weights(ps, Format::Binary16);
    CHECK(h.master_format == Format::Binary16);
    ParameterStore hh = cast_weights(h, Format::Binary16);
    double dd = 0, dn = 0, nn = 0;
    for (std::size_t k = 0; k < ps.master.size(); ++k)
        for (std::size_t i = 0; i < ps.master[k].size(); ++i) {
            CHECK(h.master[k].get(i) == hh.master[k].get(i));  // idempotent
            const double diff = h.master[k].get(i) - ps.master[k].get(i);
            dd += diff * diff;
            nn += ps.master[k].get(i) * ps.master[k].get(i);
        }
    dn = std::sqrt(dd);
    CHECK(dn <= std::ldexp(1.0, -11) * std::sqrt(nn));  // unit-roundoff perturbation

    // exactly representable values survive the cast untouched
    ParameterStore pow2 = make_params(net.shapes(), Format::Binary32, false);
    for (auto& t : pow2.master)
        for (std::size_t i = 0; i < t.size(); ++i) t.set(i, 0.25);
    ParameterStore pc = cast_weights(pow2, Format::Binary16);
    for (std::size_t k = 0; k < pc.master.size(); ++k)
        for (std::size_t i = 0; i < pc.master[k].size(); ++i) CHECK(pc.master[k].get(i) == 0.25);
}

TEST_CASE("parameter store plumbing") {
    FnnConfig cfg{1, 4, Activation::Tanh, 2, 1, 9};
    Fnn net(cfg);
    ByteLedger led;
    ParameterStore ps = net.init_params(Format::Binary32, true, &led);
    const std::size_t n = ps.count();
    CHECK(n == 2 * 4 + 4 + 4 * 1 + 1);
    CHECK(led.bytes[ByteLedger::kParam][std::size_t(Format::Binary32)] == 4 * n);
    CHECK(led.bytes[ByteLedger::kParam][std::size_t(Format::Binary16)] == 2 * n);

    // compute copy mirrors the rounded master
    ps.master[0].set(std::size_t(0), 0.1);
    ps.sync16();
    CHECK(ps.compute16[0].get(std::size_t(0)) == 0.0999755859375);

    auto flat = ps.flatten();
    CHECK(flat.size() == n);
    flat[5] = -0.625;
    ps.load_flat(flat);
    CHECK(ps.flatten()[5] == -0.625);
    CHECK_THROWS_AS(ps.load_flat(std::vector<double>(n - 1)), std::invalid_argument);

    ParameterStore no16 = net.init_params(Format::Binary32, false);
    Tape t(Format::Binary16);
    CHECK_THROWS_AS(push_params(t, no16, true, true), std::logic_error);
}

TEST_CASE("forward and forward_jet value channels agree bit-for-bit") {
    FnnConfig cfg{2, 8, Activation::Tanh, 2, 1, 11};
    Fnn net(cfg);
    ParameterStore ps = net.init_params(Format::Binary16, false);
    Tape t(Format::Binary16);
    const auto params = push_params(t, ps, false, false);
    const int x = t.constant(Tensor::from_flat(3, 2, Format::Binary16, {0.1, 0.8, -0.4, 0.2, 0.9, -0.7}));
    const int direct = net.forward(t, params, x);
    const Jet j = fnn_input_jet(net, t, params, x, 0, -1, 2);
    for (std::size_t i = 0; i < t.val(direct).size(); ++i)
        CHECK(float(t.val(direct).get(i)) == float(t.val(j.v).get(i)));
    CHECK(j.dxx >= 0);
    CHECK(j.dt == -1);

    CHECK_THROWS_AS(fnn_input_jet(net, t, params, x, 0, -1, 3), std::invalid_argument);
    const Jet j1 = fnn_input_jet(net, t, params, x, 0, -1, 1);
    CHECK(j1.dxx == -1);
}

TEST_CASE("deeponet trunk jet derivatives match finite differences") {
    FnnConfig bcfg{1, 6, Activation::Tanh, 4, 3, 2};
    FnnConfig tcfg{2, 6, Activation::Tanh, 2, 3, 4};
    DeepOnet g({bcfg, tcfg, 3});
    ParameterStore ps = g.init_params(Format::Binary64, false);
    const std::vector<double> v = {0.4, -0.2, 0.8, 0.1};
    const std::vector<double> y0 = {0.3, 0.6};

    auto eval = [&](double x, double tt) {
        Tape t(Format::Binary64);
        const auto params = push_params(t, ps, false, false);
        const int vn = t.constant(Tensor::from_flat(1, 4, Format::Binary64, v));
        const int yn = t.constant(Tensor::from_flat(1, 2, Format::Binary64, {x, tt}));
        return t.val(g.forward(t, params, vn, yn)).get(std::size_t(0));
    };

    Tape t(Format::Binary64);
    const auto params = push_params(t, ps, false, false);
    const int vn = t.constant(Tensor::from_flat(1, 4, Format::Binary64, v));
    const int yn = t.constant(Tensor::from_flat(1, 2, Format::Binary64, y0));
    const Jet jy = jet_input(t, yn, 0, 1, true);
    const Jet out = g.forward_trunk_jet(t, params, vn, jy);

    const double h = 1e-4;
    const double fd_x = (eval(y0[0] + h, y0[1]) - eval(y0[0] - h, y0[1])) / (2 * h);
    const double fd_xx = (eval(y0[0] + h, y0[1]) - 2 * eval(y0[0], y0[1]) + eval(y0[0] - h, y0[1])) / (h * h);
    const double fd_t = (eval(y0[0], y0[1] + h) - eval(y0[0], y0[1] - h)) / (2 * h);
    CHECK(t.val(out.v).get(std::size_t(0)) == doctest::Approx(eval(y0[0], y0[1])).epsilon(1e-12));
    CHECK(t.val(out.dx).get(std::size_t(0)) == doctest::Approx(fd_x).epsilon(1e-6));
    CHECK(t.val(out.dxx).get(std::size_t(0)) == doctest::Approx(fd_xx).epsilon(1e-4));
    CHECK(t.val(out.dt).get(std::size_t(0)) == doctest::Approx(fd_t).epsilon(1e-6));
}

TEST_CASE("neuron groups partition the flat parameter vector") {
    FnnConfig cfg{1, 3, Activation::Tanh, 2, 1, 0};
    Fnn net(cfg);
    const auto groups = neuron_groups(net.shapes());
    // 3 hidden neurons (2 weights + bias) and 1 output neuron (3 weights + bias)
    REQUIRE(groups.size() == 4);
    CHECK(groups[0].size() == 3);
    CHECK(groups[3].size() == 4);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& g : groups)
        for (std::size_t i : g) {
            seen.insert(i);
            ++total;
        }
    std::size_t n = 0;
    for (const auto& s : net.shapes()) n += std::size_t(s.rows) * s.cols;
    CHECK(total == n);
    CHECK(seen.size() == n);
    CHECK(*seen.rbegin() == n - 1);

    // weight column + its bias land in the same group
    CHECK(groups[0] == std::vector<std::size_t>{0, 3, 6});  // W(:,0) at 0,3; b(0) at 6

    // deeponet: trailing 1x1 bias forms its own group
    DeepOnet g2({{1, 2, Activation::Tanh, 3, 2, 0}, {1, 2, Activation::Tanh, 1, 2, 0}, 2});
    const auto dg = neuron_groups(g2.shapes());
    CHECK(dg.back().size() == 1);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(Fnn(FnnConfig{0, 4, Activation::Tanh, 1, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(DeepOnet({{1, 2, Activation::Tanh, 3, 2, 0},
                              {1, 2, Activation::Tanh, 1, 3, 0},
                              2}),
                    std::invalid_argument);
    Fnn net(FnnConfig{1, 2, Activation::Tanh, 2, 1, 0});
    ParameterStore ps = net.init_params(Format::Binary64, false);
    Tape t(Format::Binary64);
    auto params = push_params(t, ps, false, false);
    const int bad = t.constant(Tensor::zeros(1, 3, Format::Binary64));
    CHECK_THROWS_AS(net.forward(t, params, bad), std::invalid_argument);
    params.pop_back();
    const int ok = t.constant(Tensor::zeros(1, 2, Format::Binary64));
    CHECK_THROWS_AS(net.forward(t, params, ok), std::invalid_argument);
}

TEST_CASE("deeponet grid evaluation agrees with row-paired forward") {
    FnnConfig bcfg{2, 6, Activation::Tanh, 5, 4, 9};
    FnnConfig tcfg{2, 6, Activation::Tanh, 2, 4, 10};
    DeepOnet g({bcfg, tcfg, 4});
    Rng rng(31);
    const int nf = 3, nq = 4;
    std::vector<double> vs(std::size_t(nf) * 5), ys(std::size_t(nq) * 2);
    for (auto& e : vs) e = rng.uniform(-1, 1);
    for (auto& e : ys) e = rng.uniform(-1, 1);

    for (Format fmt : {Format::Binary64, Format::Binary16}) {
        ParameterStore ps = cast_weights(g.init_params(Format::Binary64, false), fmt);
        Tape t(fmt);
        const auto params = push_params(t, ps, false, false);
        const int vn = t.constant(Tensor::from_flat(nf, 5, fmt, vs));
        const int yn = t.constant(Tensor::from_flat(nq, 2, fmt, ys));
        const int grid = g.forward_grid(t, params, vn, yn);
        REQUIRE(t.val(grid).rows == nf);
        REQUIRE(t.val(grid).cols == nq);
        const Tensor gv = t.val(grid);

        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nq; ++j) {
                Tape tp(fmt);
                const auto pp = push_params(tp, ps, false, false);
                const int v1 = tp.constant(Tensor::from_flat(1, 5, fmt, {vs[std::size_t(i) * 5], vs[std::size_t(i) * 5 + 1], vs[std::size_t(i) * 5 + 2], vs[std::size_t(i) * 5 + 3], vs[std::size_t(i) * 5 + 4]}));
                const int y1 = tp.constant(Tensor::from_flat(1, 2, fmt, {ys[std::size_t(j) * 2], ys[std::size_t(j) * 2 + 1]}));
                const double want = tp.val(g.forward(tp, pp, v1, y1)).get(std::size_t(0));
                if (fmt == Format::Binary64)
                    CHECK(gv.get(i, j) == doctest::Approx(want).epsilon(1e-12));
                else
                    CHECK(gv.get(i, j) == want);  // same per-MAC order, bit-identical
            }
    }
}

TEST_CASE("deeponet grid trunk jet matches row-paired jet channels") {
    FnnConfig bcfg{1, 5, Activation::Tanh, 4, 3, 2};
    FnnConfig tcfg{2, 5, Activation::Tanh, 2, 3, 4};
    DeepOnet g({bcfg, tcfg, 3});
    ParameterStore ps = g.init_params(Format::Binary64, false);
    Rng rng(8);
    const int nf = 2, nq = 3;
    std::vector<double> vs(std::size_t(nf) * 4), ys(std::size_t(nq) * 2);
    for (auto& e : vs) e = rng.uniform(-1, 1);
    for (auto& e : ys) e = rng.uniform(-1, 1);

    Tape t(Format::Binary64);
    const auto params = push_params(t, ps, false, false);
    const int vn = t.constant(Tensor::from_flat(nf, 4, Format::Binary64, vs));
    const int yn = t.constant(Tensor::from_flat(nq, 2, Format::Binary64, ys));
    const Jet jy = jet_input(t, yn, 0, 1, true);
    const Jet grid = g.forward_grid_trunk_jet(t, params, vn, jy);
    REQUIRE(t.val(grid.v).rows == nf);
    REQUIRE(t.val(grid.v).cols == nq);

    for (int i = 0; i < nf; ++i)
        for (int j = 0; j < nq; ++j) {
            Tape tp(Format::Binary64);
            const auto pp = push_params(tp, ps, false, false);
            const int v1 = tp.constant(Tensor::from_flat(1, 4, Format::Binary64, {vs[std::size_t(i) * 4], vs[std::size_t(i) * 4 + 1], vs[std::size_t(i) * 4 + 2], vs[std::size_t(i) * 4 + 3]}));
            const int y1 = tp.constant(Tensor::from_flat(1, 2, Format::Binary64, {ys[std::size_t(j) * 2], ys[std::size_t(j) * 2 + 1]}));
            const Jet j1 = jet_input(tp, y1, 0, 1, true);
            const Jet o = g.forward_trunk_jet(tp, pp, v1, j1);
            CHECK(t.val(grid.v).get(i, j) == doctest::Approx(tp.val(o.v).get(std::size_t(0))).epsilon(1e-12));
            CHECK(t.val(grid.dx).get(i, j) == doctest::Approx(tp.val(o.dx).get(std::size_t(0))).epsilon(1e-12));
            CHECK(t.val(grid.dxx).get(i, j) == doctest::Approx(tp.val(o.dxx).get(std::size_t(0))).epsilon(1e-10));
            CHECK(t.val(grid.dt).get(i, j) == doctest::Approx(tp.val(o.dt).get(std::size_t(0))).epsilon(1e-12));
        }

    // grid channels stay differentiable w.r.t. the parameters
    Tape tg(Format::Binary64);
    const auto pg = push_params(tg, ps, true, false);
    const int vg = tg.constant(Tensor::from_flat(nf, 4, Format::Binary64, vs));
    const int yg = tg.constant(Tensor::from_flat(nq, 2, Format::Binary64, ys));
    const Jet gj = g.forward_grid_trunk_jet(tg, pg, vg, jet_input(tg, yg, 0, 1, true));
    tg.backward(tg.mean(tg.square(gj.dxx)));
    double gn = 0;
    for (int id : pg) gn += norm64(tg.grad(id));
    CHECK(gn > 0);
}
