#pragma once

#include <cstdint>
#include <vector>

namespace qconv {

// Dense layers with Lipschitz activations, sized for desk-scale gradient
// verification (<= 3 layers, single-digit widths). Derivatives are reverse
// accumulation written out by hand: the module must be auditable end to end,
// so no autodiff library is involved.

enum class Activation { Identity, Sigmoid, Relu, LeakyRelu, Swish };

double activate(Activation act, double z);
double activate_deriv(Activation act, double z);
// Valid upper bound on sup |act'|; 1 for identity/relu/leaky, 1/4 for
// sigmoid, 1.1 for swish (true sup ~ 1.0998).
double activation_lipschitz(Activation act);

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v; // row-major

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c),
          v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}
    double& at(int r, int c) {
        return v[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)];
    }
    double at(int r, int c) const {
        return v[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)];
    }
};

struct Layer {
    Matrix weight; // out x in
    std::vector<double> bias;
    Activation act = Activation::Identity;
};

struct SmallNet {
    std::vector<Layer> layers;

    int in_dim() const { return layers.front().weight.cols; }
    int out_dim() const { return layers.back().weight.rows; }
};

void validate_net(const SmallNet& net);

std::vector<double> forward(const SmallNet& net, std::vector<double> x);

// Pre-activations per layer, kept for the backward passes.
struct ForwardTrace {
    std::vector<std::vector<double>> inputs; // input of each layer
    std::vector<std::vector<double>> pre;    // z = W x + b per layer
    std::vector<double> output;
};

ForwardTrace forward_trace(const SmallNet& net, std::vector<double> x);

// cotangent^T * d(output)/d(theta), theta = [W0, b0, W1, b1, ...] flattened
// row-major. One reverse sweep.
std::vector<double> vjp_params(const SmallNet& net, const ForwardTrace& trace,
                               std::vector<double> cotangent);

// cotangent^T * d(output)/d(input).
std::vector<double> vjp_input(const SmallNet& net, const ForwardTrace& trace,
                              std::vector<double> cotangent);

std::size_t param_count(const SmallNet& net);
std::vector<double> get_params(const SmallNet& net);
void set_params(SmallNet& net, const std::vector<double>& theta);

// True when some relu/leaky-relu pre-activation sits within tol of its kink.
bool kink_hit(const SmallNet& net, const std::vector<double>& x, double tol);

// Operator 2-norm by power iteration on W^T W, relative tolerance 1e-8.
double operator_norm(const Matrix& w);

// Product over layers of operator norm times activation constant: an upper
// bound on the network's Lipschitz constant via the composition inequality.
double lipschitz_bound(const SmallNet& net);

} // namespace qconv
