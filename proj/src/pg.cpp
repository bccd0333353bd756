#include "qconv/pg.hpp"

#include <cmath>

#include "qconv/errors.hpp"

namespace qconv {
namespace {

constexpr double kKinkTol = 1e-7;
constexpr double kJitter = 1e-6;

std::vector<double> concat(std::span<const double> s, std::span<const double> a) {
    std::vector<double> x;
    x.reserve(s.size() + a.size());
    x.insert(x.end(), s.begin(), s.end());
    x.insert(x.end(), a.begin(), a.end());
    return x;
}

} // namespace

void validate_batch(const StateBatch& batch) {
    if (batch.states.empty() || batch.states.size() != batch.weights.size())
        throw DimensionMismatch("state batch needs matching states and weights");
    double sum = 0.0;
    for (double w : batch.weights) {
        if (!(w >= 0.0)) throw ConfigError("batch weights must be nonnegative");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw ConfigError("batch weights must sum to 1");
    for (const auto& s : batch.states)
        if (s.size() != batch.states.front().size())
            throw DimensionMismatch("states in a batch must share a dimension");
}

double critic_value(const Critic& critic, std::span<const double> s,
                    std::span<const double> a) {
    return std::visit(
        [&](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, QuadraticCritic>) {
                if (s.size() != a.size())
                    throw DimensionMismatch("quadratic critic needs dim(a) == dim(s)");
                double acc = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    double d = a[i] - s[i];
                    acc += d * d;
                }
                return -c.scale * acc;
            } else if constexpr (std::is_same_v<T, ConstantCritic>) {
                return c.value;
            } else {
                if (c.net.out_dim() != 1)
                    throw DimensionMismatch("critic network must be scalar-valued");
                return forward(c.net, concat(s, a))[0];
            }
        },
        critic);
}

std::vector<double> critic_grad_a(const Critic& critic, std::span<const double> s,
                                  std::span<const double> a) {
    return std::visit(
        [&](const auto& c) -> std::vector<double> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, QuadraticCritic>) {
                std::vector<double> g(a.size());
                for (std::size_t i = 0; i < a.size(); ++i)
                    g[i] = -2.0 * c.scale * (a[i] - s[i]);
                return g;
            } else if constexpr (std::is_same_v<T, ConstantCritic>) {
                return std::vector<double>(a.size(), 0.0);
            } else {
                if (c.net.out_dim() != 1)
                    throw DimensionMismatch("critic network must be scalar-valued");
                ForwardTrace trace = forward_trace(c.net, concat(s, a));
                std::vector<double> gin = vjp_input(c.net, trace, {1.0});
                return std::vector<double>(gin.begin() + static_cast<long>(s.size()),
                                           gin.end());
            }
        },
        critic);
}

double policy_value(const SmallNet& policy, const Critic& critic,
                    const StateBatch& batch) {
    validate_batch(batch);
    double j = 0.0;
    for (std::size_t i = 0; i < batch.states.size(); ++i) {
        std::vector<double> a = forward(policy, batch.states[i]);
        j += batch.weights[i] * critic_value(critic, batch.states[i], a);
    }
    return j;
}

PolicyGradResult policy_grad_analytic(const SmallNet& policy, const Critic& critic,
                                      const StateBatch& batch) {
    validate_batch(batch);
    validate_net(policy);
    PolicyGradResult res;
    res.grad.assign(param_count(policy), 0.0);
    for (std::size_t i = 0; i < batch.states.size(); ++i) {
        std::vector<double> s = batch.states[i];
        if (kink_hit(policy, s, kKinkTol)) {
            for (double& c : s) c += kJitter;
            res.jittered_states.push_back(static_cast<int>(i));
            if (kink_hit(policy, s, kKinkTol))
                throw NonSmoothAtPoint(
                    "relu pre-activation on a kink even after jitter");
        }
        ForwardTrace trace = forward_trace(policy, s);
        std::vector<double> cot = critic_grad_a(critic, s, trace.output);
        std::vector<double> g = vjp_params(policy, trace, std::move(cot));
        for (std::size_t p = 0; p < g.size(); ++p)
            res.grad[p] += batch.weights[i] * g[p];
    }
    return res;
}

std::vector<double> policy_grad_fd(const SmallNet& policy, const Critic& critic,
                                   const StateBatch& batch, double h) {
    if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
    SmallNet net = policy;
    std::vector<double> theta = get_params(net);
    std::vector<double> grad(theta.size());
    for (std::size_t p = 0; p < theta.size(); ++p) {
        double keep = theta[p];
        theta[p] = keep + h;
        set_params(net, theta);
        double plus = policy_value(net, critic, batch);
        theta[p] = keep - h;
        set_params(net, theta);
        double minus = policy_value(net, critic, batch);
        theta[p] = keep;
        grad[p] = (plus - minus) / (2.0 * h);
    }
    set_params(net, theta);
    return grad;
}

GradCheckReport grad_check(const SmallNet& policy, const Critic& critic,
                           const StateBatch& batch, double h) {
    GradCheckReport report;
    PolicyGradResult analytic = policy_grad_analytic(policy, critic, batch);
    report.analytic = std::move(analytic.grad);
    report.jittered_states = std::move(analytic.jittered_states);
    report.fd = policy_grad_fd(policy, critic, batch, h);
    report.rel_err.resize(report.analytic.size());
    for (std::size_t p = 0; p < report.analytic.size(); ++p) {
        double denom = std::max({std::fabs(report.analytic[p]),
                                 std::fabs(report.fd[p]), 1e-8});
        report.rel_err[p] = std::fabs(report.analytic[p] - report.fd[p]) / denom;
        report.max_rel_err = std::max(report.max_rel_err, report.rel_err[p]);
    }
    return report;
}

DistGradResult distributional_grad(const SmallNet& znet, const SmallNet& policy,
                                   const StateBatch& batch,
                                   std::uint64_t n_samples, Rng& rng) {
    validate_batch(batch);
    if (n_samples < 1000)
        throw ConfigError("distributional_grad needs n_samples >= 1e3");
    if (znet.out_dim() != 1)
        throw DimensionMismatch("Z network must have scalar output");
    const std::size_t ds = batch.states.front().size();
    const std::size_t da = static_cast<std::size_t>(policy.out_dim());
    if (static_cast<std::size_t>(znet.in_dim()) < ds + da)
        throw DimensionMismatch("Z network input must fit (s, a, omega)");
    const std::size_t noise_dim = static_cast<std::size_t>(znet.in_dim()) - ds - da;

    DistGradResult res;
    const std::size_t np = param_count(policy);
    res.grad.assign(np, 0.0);
    std::vector<double> var(np, 0.0);
    res.n_samples = n_samples;

    std::vector<double> sum(np), sum_sq(np);
    for (std::size_t i = 0; i < batch.states.size(); ++i) {
        const auto& s = batch.states[i];
        ForwardTrace ptrace = forward_trace(policy, s);
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(sum_sq.begin(), sum_sq.end(), 0.0);
        std::vector<double> input(ds + da + noise_dim);
        for (std::uint64_t k = 0; k < n_samples; ++k) {
            std::copy(s.begin(), s.end(), input.begin());
            std::copy(ptrace.output.begin(), ptrace.output.end(),
                      input.begin() + static_cast<long>(ds));
            for (std::size_t w = 0; w < noise_dim; ++w)
                input[ds + da + w] = rng.normal();
            ForwardTrace ztrace = forward_trace(znet, input);
            std::vector<double> gin = vjp_input(znet, ztrace, {1.0});
            std::vector<double> dzda(gin.begin() + static_cast<long>(ds),
                                     gin.begin() + static_cast<long>(ds + da));
            std::vector<double> g = vjp_params(policy, ptrace, std::move(dzda));
            for (std::size_t p = 0; p < np; ++p) {
                sum[p] += g[p];
                sum_sq[p] += g[p] * g[p];
            }
        }
        const double n = static_cast<double>(n_samples);
        for (std::size_t p = 0; p < np; ++p) {
            double mean = sum[p] / n;
            double v = std::max(0.0, sum_sq[p] / n - mean * mean);
            res.grad[p] += batch.weights[i] * mean;
            var[p] += batch.weights[i] * batch.weights[i] * v / n;
        }
    }
    res.se.resize(np);
    for (std::size_t p = 0; p < np; ++p) res.se[p] = std::sqrt(var[p]);
    return res;
}

double empirical_lipschitz(const SmallNet& net, int n_pairs, double lo,
                           double hi, Rng& rng) {
    validate_net(net);
    const std::size_t din = static_cast<std::size_t>(net.in_dim());
    double worst = 0.0;
    std::vector<double> x(din), y(din);
    for (int k = 0; k < n_pairs; ++k) {
        for (std::size_t i = 0; i < din; ++i) {
            x[i] = rng.uniform(lo, hi);
            y[i] = rng.uniform(lo, hi);
        }
        double dx = 0.0;
        for (std::size_t i = 0; i < din; ++i) dx += (x[i] - y[i]) * (x[i] - y[i]);
        if (dx == 0.0) continue;
        std::vector<double> fx = forward(net, x);
        std::vector<double> fy = forward(net, y);
        double df = 0.0;
        for (std::size_t i = 0; i < fx.size(); ++i)
            df += (fx[i] - fy[i]) * (fx[i] - fy[i]);
        worst = std::max(worst, std::sqrt(df / dx));
    }
    return worst;
}

} // namespace qconv
