#include "precis/tape.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "kernels.hpp"
#include "precis/half.hpp"

namespace precis {

namespace {

using MapF = Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MapCF = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MapD = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MapCD = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// one rounded scalar primitive applied elementwise
template <class F>
Tensor map1(Format fmt, const Tensor& a, F fn) {
    Tensor out = Tensor::zeros(a.rows, a.cols, fmt);
    if (fmt == Format::Binary64) {
        for (std::size_t i = 0; i < a.size(); ++i) out.d[i] = fn(a.d[i]);
    } else {
        for (std::size_t i = 0; i < a.size(); ++i) out.f[i] = float(fn(a.f[i]));
        if (fmt == Format::Binary16) kern::table().round_buf(out.f.data(), out.f.data(), out.size());
    }
    return out;
}

template <class F>
Tensor map2(Format fmt, const Tensor& a, const Tensor& b, F fn) {
    require(same_shape(a, b), "elementwise op: shape mismatch");
    Tensor out = Tensor::zeros(a.rows, a.cols, fmt);
    if (fmt == Format::Binary64) {
        for (std::size_t i = 0; i < a.size(); ++i) out.d[i] = fn(a.d[i], b.d[i]);
    } else {
        for (std::size_t i = 0; i < a.size(); ++i) out.f[i] = float(fn(a.f[i], b.f[i]));
        if (fmt == Format::Binary16) kern::table().round_buf(out.f.data(), out.f.data(), out.size());
    }
    return out;
}

Tensor mm(Format fmt, const Tensor& a, const Tensor& b) {
    require(a.cols == b.rows, "matmul: inner dimensions differ");
    Tensor c = Tensor::zeros(a.rows, b.cols, fmt);
    switch (fmt) {
        case Format::Binary64: {
            MapCD ma(a.d.data(), a.rows, a.cols), mb(b.d.data(), b.rows, b.cols);
            MapD mc(c.d.data(), c.rows, c.cols);
            mc.noalias() = ma * mb;
            break;
        }
        case Format::Binary32: {
            MapCF ma(a.f.data(), a.rows, a.cols), mb(b.f.data(), b.rows, b.cols);
            MapF mc(c.f.data(), c.rows, c.cols);
            mc.noalias() = ma * mb;
            break;
        }
        case Format::Binary16:
            kern::table().gemm16(a.f.data(), b.f.data(), c.f.data(), a.rows, a.cols, b.cols);
            break;
    }
    return c;
}

double pw64(const double* x, std::size_t n) {
    if (n == 1) return x[0];
    const std::size_t h = n / 2;
    return pw64(x, h) + pw64(x + h, n - h);
}

float pw32(const float* x, std::size_t n) {
    if (n == 1) return x[0];
    const std::size_t h = n / 2;
    return pw32(x, h) + pw32(x + h, n - h);
}

float pw16(const float* x, std::size_t n) {
    if (n == 1) return x[0];
    const std::size_t h = n / 2;
    return round16(pw16(x, h) + pw16(x + h, n - h));
}

Tensor neg(Format fmt, const Tensor& a) {
    return map1(fmt, a, [](auto v) { return -v; });
}

}  // namespace

int Tape::push(Node n, std::size_t aux_elems) {
    if (ledger_) {
        ledger_->charge(ByteLedger::kActivation, fmt_, n.val.size());
        if (aux_elems) ledger_->charge(ByteLedger::kActivation, fmt_, aux_elems);
    }
    nodes_.push_back(std::move(n));
    return int(nodes_.size()) - 1;
}

int Tape::leaf(Tensor t) {
    require(t.format == fmt_, "leaf: tensor format does not match tape");
    Node n;
    n.op = Op::Leaf;
    n.needs_grad = true;
    n.val = std::move(t);
    return push(std::move(n));
}

int Tape::constant(Tensor t) {
    require(t.format == fmt_, "constant: tensor format does not match tape");
    Node n;
    n.op = Op::Const;
    n.val = std::move(t);
    return push(std::move(n));
}

int Tape::matmul(int a, int b) {
    Node n;
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    n.val = mm(fmt_, nodes_[a].val, nodes_[b].val);
    return push(std::move(n));
}

#define PRECIS_BINOP(NAME, OPK, EXPR)                                     \
    int Tape::NAME(int a, int b) {                                        \
        Node n;                                                           \
        n.op = OPK;                                                       \
        n.a = a;                                                          \
        n.b = b;                                                          \
        n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;      \
        n.val = map2(fmt_, nodes_[a].val, nodes_[b].val,                  \
                     [](auto x, auto y) { return EXPR; });                \
        return push(std::move(n));                                        \
    }

PRECIS_BINOP(add, Op::Add, x + y)
PRECIS_BINOP(sub, Op::Sub, x - y)
PRECIS_BINOP(mul, Op::Mul, x * y)
PRECIS_BINOP(div, Op::Div, x / y)
#undef PRECIS_BINOP

#define PRECIS_UNOP(NAME, OPK, EXPR)                                      \
    int Tape::NAME(int a) {                                               \
        Node n;                                                           \
        n.op = OPK;                                                       \
        n.a = a;                                                          \
        n.needs_grad = nodes_[a].needs_grad;                              \
        n.val = map1(fmt_, nodes_[a].val, [](auto x) { return EXPR; });   \
        return push(std::move(n));                                        \
    }

PRECIS_UNOP(tanh, Op::Tanh, std::tanh(x))
PRECIS_UNOP(relu, Op::Relu, x > 0 ? x : decltype(x)(0))
PRECIS_UNOP(elu, Op::Elu, x > 0 ? x : std::expm1(x))
PRECIS_UNOP(sin, Op::Sin, std::sin(x))
PRECIS_UNOP(cos, Op::Cos, std::cos(x))
PRECIS_UNOP(exp, Op::Exp, std::exp(x))
PRECIS_UNOP(square, Op::Square, x* x)
PRECIS_UNOP(sqrt, Op::Sqrt, std::sqrt(x))
#undef PRECIS_UNOP

int Tape::swish(int a) {
    Node n;
    n.op = Op::Swish;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.aux = map1(fmt_, nodes_[a].val, [](auto x) { return decltype(x)(1) / (decltype(x)(1) + std::exp(-x)); });
    n.val = map2(fmt_, nodes_[a].val, n.aux, [](auto x, auto s) { return x * s; });
    return push(std::move(n), n.aux.size());
}

Tensor Tape::reduce_all(const Tensor& v) const {
    require(v.size() > 0, "reduction: empty tensor");
    Tensor out = Tensor::zeros(1, 1, fmt_);
    if (fmt_ == Format::Binary64)
        out.d[0] = pw64(v.d.data(), v.size());
    else if (fmt_ == Format::Binary32 || accumulate32_)
        out.f[0] = fmt_ == Format::Binary16 ? round16(pw32(v.f.data(), v.size()))
                                            : pw32(v.f.data(), v.size());
    else
        out.f[0] = pw16(v.f.data(), v.size());
    return out;
}

int Tape::sum(int a) {
    Node n;
    n.op = Op::Sum;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = reduce_all(nodes_[a].val);
    return push(std::move(n));
}

int Tape::mean(int a) {
    const std::size_t cnt = nodes_[a].val.size();
    Node n;
    n.op = Op::Mean;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = reduce_all(nodes_[a].val);
    if (fmt_ == Format::Binary64)
        n.val.d[0] /= double(cnt);
    else {
        const float m = n.val.f[0] / float(cnt);
        n.val.f[0] = fmt_ == Format::Binary16 ? round16(m) : m;
    }
    return push(std::move(n));
}

int Tape::concat_rows(int a, int b) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[b].val;
    require(ta.cols == tb.cols, "concat_rows: column mismatch");
    Node n;
    n.op = Op::ConcatRows;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    n.val = Tensor::zeros(ta.rows + tb.rows, ta.cols, fmt_);
    if (fmt_ == Format::Binary64) {
        std::copy(ta.d.begin(), ta.d.end(), n.val.d.begin());
        std::copy(tb.d.begin(), tb.d.end(), n.val.d.begin() + ta.size());
    } else {
        std::copy(ta.f.begin(), ta.f.end(), n.val.f.begin());
        std::copy(tb.f.begin(), tb.f.end(), n.val.f.begin() + ta.size());
    }
    return push(std::move(n));
}

int Tape::slice(int a, int r0, int r1, int c0, int c1) {
    const Tensor& t = nodes_[a].val;
    require(0 <= r0 && r0 < r1 && r1 <= t.rows && 0 <= c0 && c0 < c1 && c1 <= t.cols,
            "slice: bounds out of range");
    Node n;
    n.op = Op::Slice;
    n.a = a;
    n.i0 = r0;
    n.i1 = r1;
    n.i2 = c0;
    n.i3 = c1;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Tensor::zeros(r1 - r0, c1 - c0, fmt_);
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) n.val.set(r - r0, c - c0, t.get(r, c));
    return push(std::move(n));
}

int Tape::transpose(int a) {
    Node n;
    n.op = Op::Transpose;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = precis::transpose(nodes_[a].val);
    return push(std::move(n));
}

int Tape::broadcast(int a, int rows, int cols) {
    const Tensor& t = nodes_[a].val;
    require((t.rows == 1 || t.rows == rows) && (t.cols == 1 || t.cols == cols),
            "broadcast: source must be 1x1, 1xC or Rx1 matching the target");
    require(t.rows != rows || t.cols != cols, "broadcast: shape unchanged");
    Node n;
    n.op = Op::Broadcast;
    n.a = a;
    n.i0 = t.rows;
    n.i1 = t.cols;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Tensor::zeros(rows, cols, fmt_);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            n.val.set(r, c, t.get(t.rows == 1 ? 0 : r, t.cols == 1 ? 0 : c));
    return push(std::move(n));
}

Tensor& Tape::grad_slot(int id) {
    if (grads_.size() < nodes_.size()) grads_.resize(nodes_.size());
    if (grads_[std::size_t(id)].size() == 0) {
        const Tensor& v = nodes_[std::size_t(id)].val;
        grads_[std::size_t(id)] = Tensor::zeros(v.rows, v.cols, fmt_);
        if (ledger_) ledger_->charge(ByteLedger::kGradient, fmt_, v.size());
    }
    return grads_[std::size_t(id)];
}

void Tape::accumulate(int id, const Tensor& c) {
    if (!nodes_[std::size_t(id)].needs_grad) return;
    Tensor& g = grad_slot(id);
    if (fmt_ == Format::Binary64)
        for (std::size_t i = 0; i < g.size(); ++i) g.d[i] += c.d[i];
    else if (fmt_ == Format::Binary32)
        for (std::size_t i = 0; i < g.size(); ++i) g.f[i] += c.f[i];
    else
        for (std::size_t i = 0; i < g.size(); ++i) g.f[i] = round16(g.f[i] + c.f[i]);
}

void Tape::backward(int loss_node) {
    require(nodes_[std::size_t(loss_node)].val.is_scalar(), "backward: loss must be a scalar");
    grads_.assign(nodes_.size(), Tensor());
    ran_backward_ = true;
    grad_slot(loss_node).set(std::size_t(0), 1.0);

    for (int i = loss_node; i >= 0; --i) {
        const Node& n = nodes_[std::size_t(i)];
        if (!n.needs_grad || grads_[std::size_t(i)].size() == 0) continue;
        const Tensor& G = grads_[std::size_t(i)];
        switch (n.op) {
            case Op::Leaf:
            case Op::Const:
                break;
            case Op::MatMul: {
                if (nodes_[n.a].needs_grad) accumulate(n.a, mm(fmt_, G, precis::transpose(nodes_[n.b].val)));
                if (nodes_[n.b].needs_grad) accumulate(n.b, mm(fmt_, precis::transpose(nodes_[n.a].val), G));
                break;
            }
            case Op::Add:
                accumulate(n.a, G);
                accumulate(n.b, G);
                break;
            case Op::Sub:
                accumulate(n.a, G);
                accumulate(n.b, neg(fmt_, G));
                break;
            case Op::Mul:
                accumulate(n.a, map2(fmt_, G, nodes_[n.b].val, [](auto g, auto y) { return g * y; }));
                accumulate(n.b, map2(fmt_, G, nodes_[n.a].val, [](auto g, auto x) { return g * x; }));
                break;
            case Op::Div: {
                accumulate(n.a, map2(fmt_, G, nodes_[n.b].val, [](auto g, auto y) { return g / y; }));
                if (nodes_[n.b].needs_grad) {
                    Tensor gc = map2(fmt_, G, n.val, [](auto g, auto q) { return g * q; });
                    Tensor gb = map2(fmt_, gc, nodes_[n.b].val, [](auto t, auto y) { return t / y; });
                    accumulate(n.b, neg(fmt_, gb));
                }
                break;
            }
            case Op::Tanh: {
                Tensor y2 = map2(fmt_, n.val, n.val, [](auto y, auto z) { return y * z; });
                Tensor s = map1(fmt_, y2, [](auto v) { return decltype(v)(1) - v; });
                accumulate(n.a, map2(fmt_, G, s, [](auto g, auto v) { return g * v; }));
                break;
            }
            case Op::Relu: {
                const Tensor& x = nodes_[n.a].val;
                Tensor out = Tensor::zeros(G.rows, G.cols, fmt_);
                for (std::size_t j = 0; j < G.size(); ++j)
                    if (x.get(j) > 0) out.set(j, G.get(j));
                accumulate(n.a, out);
                break;
            }
            case Op::Elu: {
                const Tensor& x = nodes_[n.a].val;
                Tensor e = map1(fmt_, x, [](auto v) { return std::exp(v); });
                Tensor ge = map2(fmt_, G, e, [](auto g, auto v) { return g * v; });
                Tensor out = Tensor::zeros(G.rows, G.cols, fmt_);
                for (std::size_t j = 0; j < G.size(); ++j)
                    out.set(j, x.get(j) > 0 ? G.get(j) : ge.get(j));
                accumulate(n.a, out);
                break;
            }
            case Op::Swish: {
                const Tensor& x = nodes_[n.a].val;
                Tensor t1 = map1(fmt_, n.aux, [](auto s) { return decltype(s)(1) - s; });
                Tensor t2 = map2(fmt_, x, t1, [](auto a, auto b) { return a * b; });
                Tensor t3 = map1(fmt_, t2, [](auto v) { return decltype(v)(1) + v; });
                Tensor t4 = map2(fmt_, n.aux, t3, [](auto a, auto b) { return a * b; });
                accumulate(n.a, map2(fmt_, G, t4, [](auto g, auto v) { return g * v; }));
                break;
            }
            case Op::Sin: {
                Tensor c = map1(fmt_, nodes_[n.a].val, [](auto v) { return std::cos(v); });
                accumulate(n.a, map2(fmt_, G, c, [](auto g, auto v) { return g * v; }));
                break;
            }
            case Op::Cos: {
                Tensor s = map1(fmt_, nodes_[n.a].val, [](auto v) { return std::sin(v); });
                Tensor gs = map2(fmt_, G, s, [](auto g, auto v) { return g * v; });
                accumulate(n.a, neg(fmt_, gs));
                break;
            }
            case Op::Exp:
                accumulate(n.a, map2(fmt_, G, n.val, [](auto g, auto y) { return g * y; }));
                break;
            case Op::Square: {
                Tensor tx = map1(fmt_, nodes_[n.a].val, [](auto v) { return v + v; });
                accumulate(n.a, map2(fmt_, G, tx, [](auto g, auto v) { return g * v; }));
                break;
            }
            case Op::Sqrt: {
                Tensor ty = map1(fmt_, n.val, [](auto v) { return v + v; });
                accumulate(n.a, map2(fmt_, G, ty, [](auto g, auto v) { return g / v; }));
                break;
            }
            case Op::Sum: {
                Tensor out = Tensor::zeros(nodes_[n.a].val.rows, nodes_[n.a].val.cols, fmt_);
                for (std::size_t j = 0; j < out.size(); ++j) out.set(j, G.get(std::size_t(0)));
                accumulate(n.a, out);
                break;
            }
            case Op::Mean: {
                const Tensor& src = nodes_[n.a].val;
                double gv;
                if (fmt_ == Format::Binary64)
                    gv = G.d[0] / double(src.size());
                else if (fmt_ == Format::Binary32)
                    gv = double(G.f[0] / float(src.size()));
                else
                    gv = double(round16(G.f[0] / float(src.size())));
                Tensor out = Tensor::zeros(src.rows, src.cols, fmt_);
                for (std::size_t j = 0; j < out.size(); ++j) out.set(j, gv);
                accumulate(n.a, out);
                break;
            }
            case Op::ConcatRows: {
                const Tensor& ta = nodes_[n.a].val;
                Tensor ga = Tensor::zeros(ta.rows, ta.cols, fmt_);
                Tensor gb = Tensor::zeros(G.rows - ta.rows, G.cols, fmt_);
                for (std::size_t j = 0; j < ga.size(); ++j) ga.set(j, G.get(j));
                for (std::size_t j = 0; j < gb.size(); ++j) gb.set(j, G.get(j + ga.size()));
                accumulate(n.a, ga);
                accumulate(n.b, gb);
                break;
            }
            case Op::Slice: {
                if (!nodes_[n.a].needs_grad) break;
                Tensor& g = grad_slot(n.a);
                for (int r = 0; r < G.rows; ++r)
                    for (int c = 0; c < G.cols; ++c) {
                        const std::size_t idx = std::size_t(r + n.i0) * g.cols + std::size_t(c + n.i2);
                        if (fmt_ == Format::Binary64)
                            g.d[idx] += G.d[std::size_t(r) * G.cols + c];
                        else if (fmt_ == Format::Binary32)
                            g.f[idx] += G.f[std::size_t(r) * G.cols + c];
                        else
                            g.f[idx] = round16(g.f[idx] + G.f[std::size_t(r) * G.cols + c]);
                    }
                break;
            }
            case Op::Transpose:
                accumulate(n.a, precis::transpose(G));
                break;
            case Op::Broadcast: {
                const int sr = n.i0, sc = n.i1;
                Tensor red = Tensor::zeros(sr, sc, fmt_);
                auto reduce_span = [&](const float* p, const double* pd, std::size_t cnt) -> double {
                    if (fmt_ == Format::Binary64) return pw64(pd, cnt);
                    if (fmt_ == Format::Binary32 || accumulate32_) {
                        const float v = pw32(p, cnt);
                        return fmt_ == Format::Binary16 ? double(round16(v)) : double(v);
                    }
                    return double(pw16(p, cnt));
                };
                if (sr == 1 && sc == 1) {
                    red.set(std::size_t(0),
                            reduce_span(G.f.data(), G.d.data(), G.size()));
                } else if (sr == 1) {
                    std::vector<float> colf(std::size_t(G.rows));
                    std::vector<double> cold(std::size_t(G.rows));
                    for (int c = 0; c < G.cols; ++c) {
                        for (int r = 0; r < G.rows; ++r) {
                            if (fmt_ == Format::Binary64)
                                cold[std::size_t(r)] = G.d[std::size_t(r) * G.cols + c];
                            else
                                colf[std::size_t(r)] = G.f[std::size_t(r) * G.cols + c];
                        }
                        red.set(0, c, reduce_span(colf.data(), cold.data(), std::size_t(G.rows)));
                    }
                } else {
                    for (int r = 0; r < G.rows; ++r)
                        red.set(r, 0,
                                reduce_span(fmt_ == Format::Binary64 ? nullptr : G.f.data() + std::size_t(r) * G.cols,
                                            fmt_ == Format::Binary64 ? G.d.data() + std::size_t(r) * G.cols : nullptr,
                                            std::size_t(G.cols)));
                }
                accumulate(n.a, red);
                break;
            }
        }
    }
}

const Tensor& Tape::grad(int id) {
    if (!ran_backward_) throw std::logic_error("grad: backward has not run");
    return grad_slot(id);
}

// ---- input jets ----

namespace {

int ones_like(Tape& t, int node) {
    const Tensor& v = t.val(node);
    return t.constant(Tensor::full(v.rows, v.cols, t.format(), 1.0));
}

int select_mask(Tape& t, int node, bool positive) {
    const Tensor& v = t.val(node);
    Tensor m = Tensor::zeros(v.rows, v.cols, t.format());
    for (std::size_t i = 0; i < v.size(); ++i)
        m.set(i, (v.get(i) > 0) == positive ? 1.0 : 0.0);
    return t.constant(std::move(m));
}

}  // namespace

Jet jet_input(Tape& t, int x_node, int dx_col, int dt_col, bool second_order) {
    const Tensor& x = t.val(x_node);
    Jet j;
    j.v = x_node;
    Tensor sx = Tensor::zeros(x.rows, x.cols, t.format());
    for (int r = 0; r < x.rows; ++r) sx.set(r, dx_col, 1.0);
    j.dx = t.constant(std::move(sx));
    if (second_order) j.dxx = t.constant(Tensor::zeros(x.rows, x.cols, t.format()));
    if (dt_col >= 0) {
        Tensor st = Tensor::zeros(x.rows, x.cols, t.format());
        for (int r = 0; r < x.rows; ++r) st.set(r, dt_col, 1.0);
        j.dt = t.constant(std::move(st));
    }
    return j;
}

Jet jet_matmul(Tape& t, const Jet& a, int w_node) {
    Jet j;
    j.v = t.matmul(a.v, w_node);
    j.dx = t.matmul(a.dx, w_node);
    if (a.dxx >= 0) j.dxx = t.matmul(a.dxx, w_node);
    if (a.dt >= 0) j.dt = t.matmul(a.dt, w_node);
    return j;
}

Jet jet_add_const(Tape& t, const Jet& a, int c_node) {
    Jet j = a;
    j.v = t.add(a.v, c_node);
    return j;
}

Jet jet_add(Tape& t, const Jet& a, const Jet& b) {
    Jet j;
    j.v = t.add(a.v, b.v);
    j.dx = t.add(a.dx, b.dx);
    if (a.dxx >= 0 && b.dxx >= 0) j.dxx = t.add(a.dxx, b.dxx);
    if (a.dt >= 0 && b.dt >= 0) j.dt = t.add(a.dt, b.dt);
    return j;
}

Jet jet_sub(Tape& t, const Jet& a, const Jet& b) {
    Jet j;
    j.v = t.sub(a.v, b.v);
    j.dx = t.sub(a.dx, b.dx);
    if (a.dxx >= 0 && b.dxx >= 0) j.dxx = t.sub(a.dxx, b.dxx);
    if (a.dt >= 0 && b.dt >= 0) j.dt = t.sub(a.dt, b.dt);
    return j;
}

Jet jet_mul(Tape& t, const Jet& a, const Jet& b) {
    Jet j;
    j.v = t.mul(a.v, b.v);
    j.dx = t.add(t.mul(a.dx, b.v), t.mul(a.v, b.dx));
    if (a.dxx >= 0 && b.dxx >= 0) {
        const int t1 = t.mul(a.dxx, b.v);
        const int t2 = t.mul(a.dx, b.dx);
        const int t3 = t.add(t2, t2);
        const int t4 = t.mul(a.v, b.dxx);
        j.dxx = t.add(t.add(t1, t3), t4);
    }
    if (a.dt >= 0 && b.dt >= 0) j.dt = t.add(t.mul(a.dt, b.v), t.mul(a.v, b.dt));
    return j;
}

// y = f(v): dx -> f'(v) dx, dxx -> f'(v) dxx + f''(v) dx^2, dt -> f'(v) dt
static Jet jet_chain(Tape& t, const Jet& a, int y, int fp, int fpp) {
    Jet j;
    j.v = y;
    j.dx = t.mul(fp, a.dx);
    if (a.dxx >= 0) {
        const int dx2 = t.mul(a.dx, a.dx);
        j.dxx = t.add(t.mul(fp, a.dxx), t.mul(fpp, dx2));
    }
    if (a.dt >= 0) j.dt = t.mul(fp, a.dt);
    return j;
}

Jet jet_tanh(Tape& t, const Jet& a) {
    const int y = t.tanh(a.v);
    const int s = t.sub(ones_like(t, y), t.square(y));  // 1 - y^2
    int fpp = -1;
    if (a.dxx >= 0) {
        const int ys = t.mul(y, s);
        const int two_ys = t.add(ys, ys);
        fpp = t.sub(t.constant(Tensor::zeros(t.val(y).rows, t.val(y).cols, t.format())), two_ys);
    }
    return jet_chain(t, a, y, s, fpp);
}

Jet jet_relu(Tape& t, const Jet& a) {
    const int y = t.relu(a.v);
    const int mask = select_mask(t, a.v, true);
    Jet j;
    j.v = y;
    j.dx = t.mul(mask, a.dx);
    if (a.dxx >= 0) j.dxx = t.mul(mask, a.dxx);
    if (a.dt >= 0) j.dt = t.mul(mask, a.dt);
    return j;
}

Jet jet_elu(Tape& t, const Jet& a) {
    const int y = t.elu(a.v);
    const int pos = select_mask(t, a.v, true);
    const int nonpos = select_mask(t, a.v, false);
    const int e = t.exp(a.v);
    const int fp = t.add(pos, t.mul(nonpos, e));
    const int fpp = t.mul(nonpos, e);
    return jet_chain(t, a, y, fp, a.dxx >= 0 ? fpp : -1);
}

Jet jet_swish(Tape& t, const Jet& a) {
    const int y = t.swish(a.v);
    const int one = ones_like(t, a.v);
    const int sig = t.div(one, t.add(one, t.exp(t.sub(t.constant(Tensor::zeros(
                                                          t.val(a.v).rows, t.val(a.v).cols, t.format())),
                                                      a.v))));
    // f' = sig (1 + v (1 - sig)); f'' = sig (1-sig) (2 + v (1 - 2 sig))
    const int oneminus = t.sub(one, sig);
    const int fp = t.mul(sig, t.add(one, t.mul(a.v, oneminus)));
    int fpp = -1;
    if (a.dxx >= 0) {
        const int two = t.add(one, one);
        const int twosig = t.add(sig, sig);
        const int inner = t.add(two, t.mul(a.v, t.sub(one, twosig)));
        fpp = t.mul(t.mul(sig, oneminus), inner);
    }
    return jet_chain(t, a, y, fp, fpp);
}

Jet jet_sin(Tape& t, const Jet& a) {
    const int y = t.sin(a.v);
    const int fp = t.cos(a.v);
    int fpp = -1;
    if (a.dxx >= 0)
        fpp = t.sub(t.constant(Tensor::zeros(t.val(y).rows, t.val(y).cols, t.format())), y);
    return jet_chain(t, a, y, fp, fpp);
}

Jet jet_exp(Tape& t, const Jet& a) {
    const int y = t.exp(a.v);
    return jet_chain(t, a, y, y, a.dxx >= 0 ? y : -1);
}

Jet jet_square(Tape& t, const Jet& a) {
    const int y = t.square(a.v);
    const int fp = t.add(a.v, a.v);
    Jet j;
    j.v = y;
    j.dx = t.mul(fp, a.dx);
    if (a.dxx >= 0) {
        const int dx2 = t.mul(a.dx, a.dx);
        const int t2 = t.add(dx2, dx2);
        j.dxx = t.add(t.mul(fp, a.dxx), t2);
    }
    if (a.dt >= 0) j.dt = t.mul(fp, a.dt);
    return j;
}

}  // namespace precis
