#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "precis/tape.hpp"
#include "precis/tensor.hpp"

namespace precis {

enum class Activation { Tanh, Relu, Elu, Swish };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct FnnConfig {
    int depth = 1;  // number of hidden layers
    int width = 1;
    Activation activation = Activation::Tanh;
    int in_dim = 1;
    int out_dim = 1;
    std::uint64_t init_seed = 0;
};

struct DeepOnetConfig {
    FnnConfig branch;  // in_dim = sensor count, out_dim = p
    FnnConfig trunk;   // in_dim = query dimension, out_dim = p
    int p = 1;
};

struct ParamShape {
    int rows = 0, cols = 0;
};

// Owner of the parameter vector. `master` holds the training copy in the
// policy's master format; under the mixed policy `compute16` holds binary16
// mirrors refreshed by sync16() before each forward pass. Allocation is
// charged to the ledger once, at construction.
struct ParameterStore {
    Format master_format = Format::Binary32;
    std::vector<Tensor> master;
    std::vector<Tensor> compute16;

    std::size_t count() const;
    std::vector<double> flatten() const;
    void load_flat(const std::vector<double>& vals);
    void sync16();  // compute16[k] := round16(master[k])
};

ParameterStore make_params(const std::vector<ParamShape>& shapes, Format master_fmt,
                           bool with_compute16, ByteLedger* ledger = nullptr);

// every parameter value re-rounded through the target format; shapes unchanged
ParameterStore cast_weights(const ParameterStore& ps, Format target);

// Push parameter tensors onto a tape (leaves when differentiating, constants
// for pure evaluation). use_compute16 selects the binary16 mirrors.
std::vector<int> push_params(Tape& t, const ParameterStore& ps, bool as_leaf, bool use_compute16);

// Feedforward stack: depth hidden affine+activation layers, affine output.
class Fnn {
public:
    explicit Fnn(FnnConfig cfg);

    const FnnConfig& config() const { return cfg_; }
    std::vector<ParamShape> shapes() const;
    ParameterStore init_params(Format master_fmt, bool with_compute16,
                               ByteLedger* ledger = nullptr) const;

    // x: (n x in_dim) node -> (n x out_dim) node
    int forward(Tape& t, const std::vector<int>& params, int x) const;
    Jet forward_jet(Tape& t, const std::vector<int>& params, const Jet& x) const;

private:
    FnnConfig cfg_;
};

// Derivatives of the network output w.r.t. input coordinate dx_col, carried as
// tape nodes (so they remain differentiable w.r.t. the parameters). max_order
// 1 fills v/dx, max_order 2 also fills dxx; dt_col >= 0 adds a first-order
// channel for a second coordinate.
Jet fnn_input_jet(const Fnn& net, Tape& t, const std::vector<int>& params, int x, int dx_col,
                  int dt_col, int max_order);

// G(v)(y) = sum_k b_k(v) t_k(y) + b0
class DeepOnet {
public:
    explicit DeepOnet(DeepOnetConfig cfg);

    const DeepOnetConfig& config() const { return cfg_; }
    std::vector<ParamShape> shapes() const;  // branch tensors, trunk tensors, b0
    ParameterStore init_params(Format master_fmt, bool with_compute16,
                               ByteLedger* ledger = nullptr) const;

    // v: (n x sensors), y: (n x trunk.in_dim) -> (n x 1)
    int forward(Tape& t, const std::vector<int>& params, int v, int y) const;
    // same contraction with jet channels on the trunk input
    Jet forward_trunk_jet(Tape& t, const std::vector<int>& params, int v, const Jet& y) const;

    // all-pairs grid: out[i][j] = G(v_i)(y_j); v: (n x sensors), y: (m x trunk.in_dim) -> (n x m)
    int forward_grid(Tape& t, const std::vector<int>& params, int v, int y) const;
    Jet forward_grid_trunk_jet(Tape& t, const std::vector<int>& params, int v, const Jet& y) const;

    std::size_t branch_tensor_count() const;

private:
    DeepOnetConfig cfg_;
};

// Flat-index groups for filter-normalized landscape directions: one group per
// neuron (a weight column plus its bias entry), biasless tensors grouped per
// column. Indices refer to the flatten() order of the shape list.
std::vector<std::vector<std::size_t>> neuron_groups(const std::vector<ParamShape>& shapes);

}  // namespace precis
