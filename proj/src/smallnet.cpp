#include "qconv/smallnet.hpp"

#include <cmath>

#include "qconv/errors.hpp"

namespace qconv {
namespace {

constexpr double kLeakySlope = 0.01;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

double activate(Activation act, double z) {
    switch (act) {
        case Activation::Identity: return z;
        case Activation::Sigmoid: return sigmoid(z);
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::LeakyRelu: return z > 0.0 ? z : kLeakySlope * z;
        default: return z * sigmoid(z); // swish
    }
}

double activate_deriv(Activation act, double z) {
    switch (act) {
        case Activation::Identity: return 1.0;
        case Activation::Sigmoid: {
            double s = sigmoid(z);
            return s * (1.0 - s);
        }
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::LeakyRelu: return z > 0.0 ? 1.0 : kLeakySlope;
        default: {
            double s = sigmoid(z);
            return s + z * s * (1.0 - s);
        }
    }
}

double activation_lipschitz(Activation act) {
    switch (act) {
        case Activation::Identity:
        case Activation::Relu:
        case Activation::LeakyRelu: return 1.0;
        case Activation::Sigmoid: return 0.25;
        default: return 1.1;
    }
}

void validate_net(const SmallNet& net) {
    if (net.layers.empty()) throw ConfigError("network needs at least one layer");
    int prev = net.layers.front().weight.cols;
    for (const auto& layer : net.layers) {
        if (layer.weight.rows < 1 || layer.weight.cols < 1)
            throw DimensionMismatch("layer with empty weight matrix");
        if (layer.weight.cols != prev)
            throw DimensionMismatch("layer input width does not chain");
        if (layer.bias.size() != static_cast<std::size_t>(layer.weight.rows))
            throw DimensionMismatch("bias length does not match layer output");
        for (double v : layer.weight.v)
            if (!std::isfinite(v)) throw NonFiniteValue("non-finite weight");
        for (double v : layer.bias)
            if (!std::isfinite(v)) throw NonFiniteValue("non-finite bias");
        prev = layer.weight.rows;
    }
}

ForwardTrace forward_trace(const SmallNet& net, std::vector<double> x) {
    if (x.size() != static_cast<std::size_t>(net.in_dim()))
        throw DimensionMismatch("input width does not match the network");
    ForwardTrace trace;
    for (const auto& layer : net.layers) {
        trace.inputs.push_back(x);
        std::vector<double> z(static_cast<std::size_t>(layer.weight.rows));
        for (int r = 0; r < layer.weight.rows; ++r) {
            double acc = layer.bias[static_cast<std::size_t>(r)];
            for (int c = 0; c < layer.weight.cols; ++c)
                acc += layer.weight.at(r, c) * x[static_cast<std::size_t>(c)];
            z[static_cast<std::size_t>(r)] = acc;
        }
        trace.pre.push_back(z);
        for (double& zi : z) zi = activate(layer.act, zi);
        x = std::move(z);
    }
    trace.output = x;
    return trace;
}

std::vector<double> forward(const SmallNet& net, std::vector<double> x) {
    return forward_trace(net, std::move(x)).output;
}

std::vector<double> vjp_params(const SmallNet& net, const ForwardTrace& trace,
                               std::vector<double> cotangent) {
    std::vector<double> grad(param_count(net), 0.0);
    // Offsets of each layer's [W, b] block in the flat parameter vector.
    std::vector<std::size_t> offset(net.layers.size());
    std::size_t pos = 0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        offset[l] = pos;
        pos += net.layers[l].weight.v.size() + net.layers[l].bias.size();
    }

    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Layer& layer = net.layers[li];
        const auto& z = trace.pre[li];
        const auto& in = trace.inputs[li];
        // delta = cotangent ⊙ act'(z)
        std::vector<double> delta(cotangent.size());
        for (std::size_t r = 0; r < delta.size(); ++r)
            delta[r] = cotangent[r] * activate_deriv(layer.act, z[r]);
        double* wgrad = grad.data() + offset[li];
        double* bgrad = wgrad + layer.weight.v.size();
        for (int r = 0; r < layer.weight.rows; ++r) {
            for (int c = 0; c < layer.weight.cols; ++c)
                wgrad[static_cast<std::size_t>(r) * layer.weight.cols +
                      static_cast<std::size_t>(c)] +=
                    delta[static_cast<std::size_t>(r)] * in[static_cast<std::size_t>(c)];
            bgrad[r] += delta[static_cast<std::size_t>(r)];
        }
        // push the cotangent through W for the next (earlier) layer
        std::vector<double> prev(static_cast<std::size_t>(layer.weight.cols), 0.0);
        for (int r = 0; r < layer.weight.rows; ++r)
            for (int c = 0; c < layer.weight.cols; ++c)
                prev[static_cast<std::size_t>(c)] +=
                    delta[static_cast<std::size_t>(r)] * layer.weight.at(r, c);
        cotangent = std::move(prev);
    }
    return grad;
}

std::vector<double> vjp_input(const SmallNet& net, const ForwardTrace& trace,
                              std::vector<double> cotangent) {
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Layer& layer = net.layers[li];
        const auto& z = trace.pre[li];
        std::vector<double> delta(cotangent.size());
        for (std::size_t r = 0; r < delta.size(); ++r)
            delta[r] = cotangent[r] * activate_deriv(layer.act, z[r]);
        std::vector<double> prev(static_cast<std::size_t>(layer.weight.cols), 0.0);
        for (int r = 0; r < layer.weight.rows; ++r)
            for (int c = 0; c < layer.weight.cols; ++c)
                prev[static_cast<std::size_t>(c)] +=
                    delta[static_cast<std::size_t>(r)] * layer.weight.at(r, c);
        cotangent = std::move(prev);
    }
    return cotangent;
}

std::size_t param_count(const SmallNet& net) {
    std::size_t n = 0;
    for (const auto& layer : net.layers)
        n += layer.weight.v.size() + layer.bias.size();
    return n;
}

std::vector<double> get_params(const SmallNet& net) {
    std::vector<double> theta;
    theta.reserve(param_count(net));
    for (const auto& layer : net.layers) {
        theta.insert(theta.end(), layer.weight.v.begin(), layer.weight.v.end());
        theta.insert(theta.end(), layer.bias.begin(), layer.bias.end());
    }
    return theta;
}

void set_params(SmallNet& net, const std::vector<double>& theta) {
    if (theta.size() != param_count(net))
        throw DimensionMismatch("parameter vector length mismatch");
    std::size_t pos = 0;
    for (auto& layer : net.layers) {
        for (double& w : layer.weight.v) w = theta[pos++];
        for (double& b : layer.bias) b = theta[pos++];
    }
}

bool kink_hit(const SmallNet& net, const std::vector<double>& x, double tol) {
    ForwardTrace trace = forward_trace(net, x);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        Activation act = net.layers[li].act;
        if (act != Activation::Relu && act != Activation::LeakyRelu) continue;
        for (double z : trace.pre[li])
            if (std::fabs(z) < tol) return true;
    }
    return false;
}

double operator_norm(const Matrix& w) {
    if (w.rows == 0 || w.cols == 0) return 0.0;
    // Power iteration on W^T W with a deterministic start vector.
    std::vector<double> v(static_cast<std::size_t>(w.cols));
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 1.0 + static_cast<double>(i % 3);
    double norm = 0.0;
    double prev = -1.0;
    for (int it = 0; it < 10'000; ++it) {
        std::vector<double> wv(static_cast<std::size_t>(w.rows), 0.0);
        for (int r = 0; r < w.rows; ++r)
            for (int c = 0; c < w.cols; ++c)
                wv[static_cast<std::size_t>(r)] += w.at(r, c) * v[static_cast<std::size_t>(c)];
        std::vector<double> wtwv(static_cast<std::size_t>(w.cols), 0.0);
        for (int r = 0; r < w.rows; ++r)
            for (int c = 0; c < w.cols; ++c)
                wtwv[static_cast<std::size_t>(c)] += w.at(r, c) * wv[static_cast<std::size_t>(r)];
        double len = 0.0;
        for (double x : wtwv) len += x * x;
        len = std::sqrt(len);
        if (len == 0.0) return 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = wtwv[i] / len;
        double num = 0.0;
        for (double x : wv) num += x * x;
        norm = std::sqrt(num);
        if (prev >= 0.0 && std::fabs(norm - prev) <= 1e-8 * std::max(norm, 1.0))
            break;
        prev = norm;
    }
    return norm;
}

double lipschitz_bound(const SmallNet& net) {
    validate_net(net);
    double bound = 1.0;
    for (const auto& layer : net.layers)
        bound *= operator_norm(layer.weight) * activation_lipschitz(layer.act);
    return bound;
}

} // namespace qconv
