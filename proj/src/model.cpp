#include "precis/model.hpp"

#include <cmath>
#include <stdexcept>

#include "precis/rng.hpp"

namespace precis {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Elu: return "elu";
        case Activation::Swish: return "swish";
    }
    return "?";
}

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "elu") return Activation::Elu;
    if (name == "swish") return Activation::Swish;
    throw std::invalid_argument("unknown activation: " + name);
}

std::size_t ParameterStore::count() const {
    std::size_t n = 0;
    for (const auto& t : master) n += t.size();
    return n;
}

std::vector<double> ParameterStore::flatten() const {
    std::vector<double> out;
    out.reserve(count());
    for (const auto& t : master)
        for (std::size_t i = 0; i < t.size(); ++i) out.push_back(t.get(i));
    return out;
}

void ParameterStore::load_flat(const std::vector<double>& vals) {
    if (vals.size() != count()) throw std::invalid_argument("load_flat: length mismatch");
    std::size_t k = 0;
    for (auto& t : master)
        for (std::size_t i = 0; i < t.size(); ++i) t.set(i, vals[k++]);
}

void ParameterStore::sync16() {
    for (std::size_t k = 0; k < compute16.size(); ++k) compute16[k] = cast(master[k], Format::Binary16);
}

ParameterStore make_params(const std::vector<ParamShape>& shapes, Format master_fmt,
                           bool with_compute16, ByteLedger* ledger) {
    ParameterStore ps;
    ps.master_format = master_fmt;
    for (const auto& s : shapes) {
        ps.master.push_back(Tensor::zeros(s.rows, s.cols, master_fmt));
        if (ledger) ledger->charge(ByteLedger::kParam, master_fmt, ps.master.back().size());
        if (with_compute16) {
            ps.compute16.push_back(Tensor::zeros(s.rows, s.cols, Format::Binary16));
            if (ledger) ledger->charge(ByteLedger::kParam, Format::Binary16, ps.compute16.back().size());
        }
    }
    return ps;
}

ParameterStore cast_weights(const ParameterStore& ps, Format target) {
    ParameterStore out;
    out.master_format = target;
    for (const auto& t : ps.master) out.master.push_back(cast(t, target));
    return out;
}

std::vector<int> push_params(Tape& t, const ParameterStore& ps, bool as_leaf, bool use_compute16) {
    const auto& src = use_compute16 ? ps.compute16 : ps.master;
    if (use_compute16 && src.empty()) throw std::logic_error("push_params: no compute copy allocated");
    std::vector<int> ids;
    ids.reserve(src.size());
    for (const auto& p : src) ids.push_back(as_leaf ? t.leaf(p) : t.constant(p));
    return ids;
}

namespace {

// Glorot-uniform on weight matrices, zero biases; (W, b) pairs are detected
// by a 1-row tensor whose width matches the preceding matrix.
void fill_glorot(std::vector<Tensor>& tensors, std::size_t lo, std::size_t hi, std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t k = lo; k < hi; ++k) {
        Tensor& w = tensors[k];
        const bool has_bias = k + 1 < hi && tensors[k + 1].rows == 1 && tensors[k + 1].cols == w.cols;
        if (w.rows == 1 && !has_bias) continue;  // a stray bias-like tensor stays zero
        const double bound = std::sqrt(6.0 / double(w.rows + w.cols));
        for (std::size_t i = 0; i < w.size(); ++i) w.set(i, rng.uniform(-bound, bound));
        if (has_bias) ++k;  // skip the zero bias
    }
}

int apply_activation(Tape& t, Activation a, int h) {
    switch (a) {
        case Activation::Tanh: return t.tanh(h);
        case Activation::Relu: return t.relu(h);
        case Activation::Elu: return t.elu(h);
        case Activation::Swish: return t.swish(h);
    }
    throw std::logic_error("unreachable");
}

Jet apply_activation_jet(Tape& t, Activation a, const Jet& h) {
    switch (a) {
        case Activation::Tanh: return jet_tanh(t, h);
        case Activation::Relu: return jet_relu(t, h);
        case Activation::Elu: return jet_elu(t, h);
        case Activation::Swish: return jet_swish(t, h);
    }
    throw std::logic_error("unreachable");
}

int add_bias(Tape& t, int h, int b) {
    const Tensor& hv = t.val(h);
    const Tensor& bv = t.val(b);
    if (hv.rows == bv.rows && hv.cols == bv.cols) return t.add(h, b);
    return t.add(h, t.broadcast(b, hv.rows, hv.cols));
}

}  // namespace

Fnn::Fnn(FnnConfig cfg) : cfg_(cfg) {
    if (cfg_.depth < 1 || cfg_.width < 1 || cfg_.in_dim < 1 || cfg_.out_dim < 1)
        throw std::invalid_argument("fnn config: all sizes must be >= 1");
}

std::vector<ParamShape> Fnn::shapes() const {
    std::vector<ParamShape> s;
    int in = cfg_.in_dim;
    for (int l = 0; l < cfg_.depth; ++l) {
        s.push_back({in, cfg_.width});
        s.push_back({1, cfg_.width});
        in = cfg_.width;
    }
    s.push_back({in, cfg_.out_dim});
    s.push_back({1, cfg_.out_dim});
    return s;
}

ParameterStore Fnn::init_params(Format master_fmt, bool with_compute16, ByteLedger* ledger) const {
    ParameterStore ps = make_params(shapes(), master_fmt, with_compute16, ledger);
    fill_glorot(ps.master, 0, ps.master.size(), cfg_.init_seed);
    ps.sync16();
    return ps;
}

int Fnn::forward(Tape& t, const std::vector<int>& params, int x) const {
    if (int(params.size()) != 2 * (cfg_.depth + 1))
        throw std::invalid_argument("fnn forward: parameter count mismatch");
    if (t.val(x).cols != cfg_.in_dim) throw std::invalid_argument("fnn forward: input dimension mismatch");
    int h = x;
    for (int l = 0; l < cfg_.depth; ++l) {
        h = add_bias(t, t.matmul(h, params[std::size_t(2 * l)]), params[std::size_t(2 * l + 1)]);
        h = apply_activation(t, cfg_.activation, h);
    }
    return add_bias(t, t.matmul(h, params[std::size_t(2 * cfg_.depth)]),
                    params[std::size_t(2 * cfg_.depth + 1)]);
}

Jet Fnn::forward_jet(Tape& t, const std::vector<int>& params, const Jet& x) const {
    if (int(params.size()) != 2 * (cfg_.depth + 1))
        throw std::invalid_argument("fnn forward: parameter count mismatch");
    Jet h = x;
    for (int l = 0; l < cfg_.depth; ++l) {
        h = jet_matmul(t, h, params[std::size_t(2 * l)]);
        const Tensor& hv = t.val(h.v);
        const int b = params[std::size_t(2 * l + 1)];
        h = jet_add_const(t, h, t.val(b).rows == hv.rows ? b : t.broadcast(b, hv.rows, hv.cols));
        h = apply_activation_jet(t, cfg_.activation, h);
    }
    h = jet_matmul(t, h, params[std::size_t(2 * cfg_.depth)]);
    const Tensor& hv = t.val(h.v);
    const int b = params[std::size_t(2 * cfg_.depth + 1)];
    return jet_add_const(t, h, t.val(b).rows == hv.rows ? b : t.broadcast(b, hv.rows, hv.cols));
}

Jet fnn_input_jet(const Fnn& net, Tape& t, const std::vector<int>& params, int x, int dx_col,
                  int dt_col, int max_order) {
    if (max_order < 1 || max_order > 2)
        throw std::invalid_argument("input_jet: unsupported derivative order");
    const Jet jin = jet_input(t, x, dx_col, dt_col, max_order == 2);
    return net.forward_jet(t, params, jin);
}

DeepOnet::DeepOnet(DeepOnetConfig cfg) : cfg_(cfg) {
    if (cfg_.branch.out_dim != cfg_.p || cfg_.trunk.out_dim != cfg_.p)
        throw std::invalid_argument("deeponet config: branch and trunk must end in p outputs");
}

std::size_t DeepOnet::branch_tensor_count() const {
    return std::size_t(2 * (cfg_.branch.depth + 1));
}

std::vector<ParamShape> DeepOnet::shapes() const {
    std::vector<ParamShape> s = Fnn(cfg_.branch).shapes();
    for (const auto& ts : Fnn(cfg_.trunk).shapes()) s.push_back(ts);
    s.push_back({1, 1});  // b0
    return s;
}

ParameterStore DeepOnet::init_params(Format master_fmt, bool with_compute16, ByteLedger* ledger) const {
    ParameterStore ps = make_params(shapes(), master_fmt, with_compute16, ledger);
    const std::size_t nb = branch_tensor_count();
    fill_glorot(ps.master, 0, nb, cfg_.branch.init_seed);
    fill_glorot(ps.master, nb, ps.master.size() - 1, cfg_.trunk.init_seed);
    ps.sync16();
    return ps;
}

namespace {

// row-wise dot of two (n x p) nodes via matmul with a ones column
int row_dot(Tape& t, int a, int b) {
    const int prod = t.mul(a, b);
    const int ones = t.constant(Tensor::full(t.val(a).cols, 1, t.format(), 1.0));
    return t.matmul(prod, ones);
}

}  // namespace

int DeepOnet::forward(Tape& t, const std::vector<int>& params, int v, int y) const {
    if (params.size() != shapes().size())
        throw std::invalid_argument("deeponet forward: parameter count mismatch");
    const std::size_t nb = branch_tensor_count();
    const std::vector<int> bp(params.begin(), params.begin() + long(nb));
    const std::vector<int> tp(params.begin() + long(nb), params.end() - 1);
    const int bout = Fnn(cfg_.branch).forward(t, bp, v);
    const int tout = Fnn(cfg_.trunk).forward(t, tp, y);
    const int dot = row_dot(t, bout, tout);
    return add_bias(t, dot, params.back());
}

Jet DeepOnet::forward_trunk_jet(Tape& t, const std::vector<int>& params, int v, const Jet& y) const {
    if (params.size() != shapes().size())
        throw std::invalid_argument("deeponet forward: parameter count mismatch");
    const std::size_t nb = branch_tensor_count();
    const std::vector<int> bp(params.begin(), params.begin() + long(nb));
    const std::vector<int> tp(params.begin() + long(nb), params.end() - 1);
    const int bout = Fnn(cfg_.branch).forward(t, bp, v);
    const Jet tout = Fnn(cfg_.trunk).forward_jet(t, tp, y);
    Jet g;
    g.v = add_bias(t, row_dot(t, bout, tout.v), params.back());
    g.dx = row_dot(t, bout, tout.dx);
    if (tout.dxx >= 0) g.dxx = row_dot(t, bout, tout.dxx);
    if (tout.dt >= 0) g.dt = row_dot(t, bout, tout.dt);
    return g;
}

int DeepOnet::forward_grid(Tape& t, const std::vector<int>& params, int v, int y) const {
    if (params.size() != shapes().size())
        throw std::invalid_argument("deeponet forward: parameter count mismatch");
    const std::size_t nb = branch_tensor_count();
    const std::vector<int> bp(params.begin(), params.begin() + long(nb));
    const std::vector<int> tp(params.begin() + long(nb), params.end() - 1);
    const int bout = Fnn(cfg_.branch).forward(t, bp, v);
    const int tout = Fnn(cfg_.trunk).forward(t, tp, y);
    return add_bias(t, t.matmul(bout, t.transpose(tout)), params.back());
}

Jet DeepOnet::forward_grid_trunk_jet(Tape& t, const std::vector<int>& params, int v, const Jet& y) const {
    if (params.size() != shapes().size())
        throw std::invalid_argument("deeponet forward: parameter count mismatch");
    const std::size_t nb = branch_tensor_count();
    const std::vector<int> bp(params.begin(), params.begin() + long(nb));
    const std::vector<int> tp(params.begin() + long(nb), params.end() - 1);
    const int bout = Fnn(cfg_.branch).forward(t, bp, v);
    const Jet tout = Fnn(cfg_.trunk).forward_jet(t, tp, y);
    Jet g;
    g.v = add_bias(t, t.matmul(bout, t.transpose(tout.v)), params.back());
    g.dx = t.matmul(bout, t.transpose(tout.dx));
    if (tout.dxx >= 0) g.dxx = t.matmul(bout, t.transpose(tout.dxx));
    if (tout.dt >= 0) g.dt = t.matmul(bout, t.transpose(tout.dt));
    return g;
}

std::vector<std::vector<std::size_t>> neuron_groups(const std::vector<ParamShape>& shapes) {
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> offsets(shapes.size());
    std::size_t off = 0;
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        offsets[k] = off;
        off += std::size_t(shapes[k].rows) * std::size_t(shapes[k].cols);
    }
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        const auto& w = shapes[k];
        const bool paired = k + 1 < shapes.size() && shapes[k + 1].rows == 1 &&
                            shapes[k + 1].cols == w.cols;
        for (int j = 0; j < w.cols; ++j) {
            std::vector<std::size_t> g;
            for (int i = 0; i < w.rows; ++i) g.push_back(offsets[k] + std::size_t(i) * w.cols + std::size_t(j));
            if (paired) g.push_back(offsets[k + 1] + std::size_t(j));
            groups.push_back(std::move(g));
        }
        if (paired) ++k;
    }
    return groups;
}

}  // namespace precis
