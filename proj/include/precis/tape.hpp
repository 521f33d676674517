#pragma once

#include <cstddef>
#include <vector>

#include "precis/tensor.hpp"

namespace precis {

enum class Op {
    Leaf,
    Const,
    MatMul,
    Add,
    Sub,
    Mul,
    Div,
    Tanh,
    Relu,
    Elu,
    Swish,
    Sin,
    Cos,
    Exp,
    Square,
    Sqrt,
    Sum,
    Mean,
    ConcatRows,
    Slice,
    Broadcast,
    Transpose,
};

struct Node {
    Op op = Op::Leaf;
    int a = -1;
    int b = -1;
    int i0 = 0, i1 = 0, i2 = 0, i3 = 0;
    bool needs_grad = false;
    Tensor val;
    Tensor aux;
};

// Eager compute graph. Every primitive evaluates immediately in the tape's
// format: binary16 tapes round after each scalar operation (per-MAC inside
// matmul, per-partial-sum inside reductions), binary32/64 tapes use native
// arithmetic. backward() replays the graph in reverse under the same format
// rules. All node values and gradients are charged to the attached ledger.
class Tape {
public:
    explicit Tape(Format fmt, ByteLedger* ledger = nullptr) : fmt_(fmt), ledger_(ledger) {}

    Format format() const { return fmt_; }
    std::size_t size() const { return nodes_.size(); }
    const Tensor& val(int id) const { return nodes_[std::size_t(id)].val; }
    bool needs_grad(int id) const { return nodes_[std::size_t(id)].needs_grad; }

    // opt-in: run binary16 reductions with a binary32 accumulator
    void set_accumulate32(bool on) { accumulate32_ = on; }
    bool accumulate32() const { return accumulate32_; }

    int leaf(Tensor t);      // differentiable input (parameters)
    int constant(Tensor t);  // non-differentiable input (data)

    int matmul(int a, int b);
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);
    int div(int a, int b);

    int tanh(int a);
    int relu(int a);
    int elu(int a);
    int swish(int a);
    int sin(int a);
    int cos(int a);
    int exp(int a);
    int square(int a);
    int sqrt(int a);

    int sum(int a);   // pairwise reduction to 1x1
    int mean(int a);  // pairwise sum, then one division

    int concat_rows(int a, int b);
    int slice(int a, int r0, int r1, int c0, int c1);  // half-open ranges
    int broadcast(int a, int rows, int cols);          // from 1x1, 1xC or Rx1
    int transpose(int a);                              // pure data movement, no rounding

    void backward(int loss_node);
    const Tensor& grad(int id);

private:
    int push(Node n, std::size_t aux_elems = 0);
    void accumulate(int id, const Tensor& contrib);
    Tensor& grad_slot(int id);
    Tensor reduce_all(const Tensor& v) const;

    Format fmt_;
    ByteLedger* ledger_ = nullptr;
    bool accumulate32_ = false;
    bool ran_backward_ = false;
    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
};

// Forward-mode channels rooted at one input coordinate, carried alongside the
// value as ordinary tape nodes so everything stays differentiable w.r.t. the
// parameters. dx/dxx follow the dx_col coordinate (dxx only when second order
// is requested); dt is an optional extra first-order channel for a second
// coordinate. Unused channels hold -1.
struct Jet {
    int v = -1;
    int dx = -1;
    int dxx = -1;
    int dt = -1;
};

Jet jet_input(Tape& t, int x_node, int dx_col, int dt_col, bool second_order);
Jet jet_matmul(Tape& t, const Jet& a, int w_node);
Jet jet_add_const(Tape& t, const Jet& a, int c_node);
Jet jet_add(Tape& t, const Jet& a, const Jet& b);
Jet jet_sub(Tape& t, const Jet& a, const Jet& b);
Jet jet_mul(Tape& t, const Jet& a, const Jet& b);
Jet jet_tanh(Tape& t, const Jet& a);
Jet jet_relu(Tape& t, const Jet& a);
Jet jet_elu(Tape& t, const Jet& a);
Jet jet_swish(Tape& t, const Jet& a);
Jet jet_sin(Tape& t, const Jet& a);
Jet jet_exp(Tape& t, const Jet& a);
Jet jet_square(Tape& t, const Jet& a);

}  // namespace precis
