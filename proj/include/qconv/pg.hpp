#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "qconv/rng.hpp"
#include "qconv/smallnet.hpp"

namespace qconv {

// Finite weighted batch of states standing in for the sampling distribution
// rho ("memory data"): expectations become exact finite sums.
struct StateBatch {
    std::vector<std::vector<double>> states;
    std::vector<double> weights; // nonnegative, summing to 1
};

void validate_batch(const StateBatch& batch);

// Critics. None of them depends on the policy parameters (the theorem assumes
// the critic is detached). QuadraticCritic is Q(s,a) = -scale * ||a - s||^2;
// NetCritic evaluates a smooth network on concat(s, a).
struct QuadraticCritic {
    double scale = 1.0;
};
struct ConstantCritic {
    double value = 0.0;
};
struct NetCritic {
    SmallNet net; // scalar output
};

using Critic = std::variant<QuadraticCritic, ConstantCritic, NetCritic>;

double critic_value(const Critic& critic, std::span<const double> s,
                    std::span<const double> a);
std::vector<double> critic_grad_a(const Critic& critic, std::span<const double> s,
                                  std::span<const double> a);

// J(theta) = sum_i rho_i Q(s_i, pi_theta(s_i)).
double policy_value(const SmallNet& policy, const Critic& critic,
                    const StateBatch& batch);

struct PolicyGradResult {
    std::vector<double> grad;
    // States whose relu pre-activation sat on a kink and were jittered by
    // 1e-6 before differentiating; a jitter that still hits a kink throws
    // NonSmoothAtPoint.
    std::vector<int> jittered_states;
};

// Chain-rule gradient: rho-weighted sum over states of
// (d pi / d theta)^T (d Q / d a) at a = pi(s), via reverse accumulation.
PolicyGradResult policy_grad_analytic(const SmallNet& policy, const Critic& critic,
                                      const StateBatch& batch);

// Central finite differences on the flattened parameters, the independent
// oracle for the gradient identity.
std::vector<double> policy_grad_fd(const SmallNet& policy, const Critic& critic,
                                   const StateBatch& batch, double h = 1e-5);

struct GradCheckReport {
    std::vector<double> analytic;
    std::vector<double> fd;
    std::vector<double> rel_err; // per parameter, denominator max(|a|,|f|,1e-8)
    double max_rel_err = 0.0;
    std::vector<int> jittered_states;
};

GradCheckReport grad_check(const SmallNet& policy, const Critic& critic,
                           const StateBatch& batch, double h = 1e-5);

struct DistGradResult {
    std::vector<double> grad;
    std::vector<double> se; // Monte-Carlo standard error per coordinate
    std::uint64_t n_samples = 0;
};

// Distributional form: Z(s, a, omega) is a stochastic-output network taking
// concat(s, a, omega) with omega ~ N(0, I). The pathwise derivative d Z / d a
// is averaged over n_samples draws and substituted into the chain rule.
DistGradResult distributional_grad(const SmallNet& znet, const SmallNet& policy,
                                   const StateBatch& batch,
                                   std::uint64_t n_samples, Rng& rng);

// max over random input pairs of ||f(x)-f(y)|| / ||x-y|| with coordinates
// drawn uniformly from [lo, hi]; never exceeds lipschitz_bound(net).
double empirical_lipschitz(const SmallNet& net, int n_pairs, double lo,
                           double hi, Rng& rng);

} // namespace qconv
