#include <doctest.h>

#include <cmath>

#include "qconv/errors.hpp"
#include "qconv/pg.hpp"

using namespace qconv;

namespace {

// pi_theta(s) = w * s + b, one input, one output.
SmallNet scalar_policy(double w, double b = 0.0) {
    SmallNet net;
    Layer layer{Matrix(1, 1), {b}, Activation::Identity};
    layer.weight.at(0, 0) = w;
    net.layers.push_back(layer);
    return net;
}

SmallNet sigmoid_policy(Rng& rng) {
    SmallNet net;
    net.layers.push_back({Matrix(4, 2), std::vector<double>(4, 0.0),
                          Activation::Sigmoid});
    net.layers.push_back({Matrix(2, 4), std::vector<double>(2, 0.0),
                          Activation::Identity});
    std::vector<double> theta(param_count(net));
    for (double& v : theta) v = rng.uniform(-1.0, 1.0);
    set_params(net, theta);
    return net;
}

StateBatch single_state() { return {{{1.0}}, {1.0}}; }

} // namespace

TEST_CASE("policy_value on the quadratic textbook case") {
    Critic critic = QuadraticCritic{1.0};
    // J(theta) = -(theta - 1)^2 at rho = {s = 1}
    CHECK(policy_value(scalar_policy(2.0), critic, single_state()) == -1.0);
    CHECK(policy_value(scalar_policy(1.0), critic, single_state()) == 0.0);

    StateBatch two = {{{1.0}, {2.0}}, {0.5, 0.5}};
    double j = policy_value(scalar_policy(0.0), critic, two);
    // brute-force: 0.5*(-(0-1)^2) + 0.5*(-(0-2)^2) = -2.5
    CHECK(j == -2.5);
}

TEST_CASE("analytic gradient matches the quadratic derivative") {
    Critic critic = QuadraticCritic{1.0};
    PolicyGradResult g2 = policy_grad_analytic(scalar_policy(2.0), critic,
                                               single_state());
    CHECK(g2.grad[0] == -2.0); // d/dtheta of -(theta-1)^2 at theta=2
    PolicyGradResult g1 = policy_grad_analytic(scalar_policy(1.0), critic,
                                               single_state());
    CHECK(g1.grad[0] == 0.0);
    CHECK(g1.jittered_states.empty());
}

TEST_CASE("finite differences are exact on quadratics and zero on constants") {
    Critic critic = QuadraticCritic{1.0};
    std::vector<double> fd =
        policy_grad_fd(scalar_policy(2.0), critic, single_state(), 1e-5);
    CHECK(std::fabs(fd[0] - (-2.0)) <= 1e-8);

    Critic flat = ConstantCritic{3.0};
    std::vector<double> zero =
        policy_grad_fd(scalar_policy(2.0), flat, single_state(), 1e-5);
    for (double g : zero) CHECK(g == 0.0);
}

TEST_CASE("finite differences improve like O(h^2)") {
    Rng rng(6);
    SmallNet policy = sigmoid_policy(rng);
    StateBatch batch = {{{0.3, -0.2}, {1.0, 0.5}}, {0.5, 0.5}};
    Critic critic = QuadraticCritic{1.0};
    std::vector<double> exact = policy_grad_analytic(policy, critic, batch).grad;
    auto err = [&](double h) {
        std::vector<double> fd = policy_grad_fd(policy, critic, batch, h);
        double worst = 0.0;
        for (std::size_t i = 0; i < fd.size(); ++i)
            worst = std::max(worst, std::fabs(fd[i] - exact[i]));
        return worst;
    };
    double e1 = err(1e-3);
    double e2 = err(5e-4);
    CHECK(e2 <= 0.3 * e1 + 1e-12); // quarter expected, a third with slack
}

TEST_CASE("two-layer sigmoid policies pass the gradient check at 1e-4") {
    StateBatch batch = {{{0.3, -0.2}, {1.0, 0.5}, {-0.7, 0.1}}, {0.5, 0.25, 0.25}};
    Critic critic = QuadraticCritic{1.0};
    for (std::uint64_t draw = 0; draw < 5; ++draw) {
        Rng rng(100 + draw);
        SmallNet policy = sigmoid_policy(rng);
        GradCheckReport report = grad_check(policy, critic, batch, 1e-5);
        CHECK(report.max_rel_err <= 1e-4);
    }
}

TEST_CASE("relu kink handling") {
    SUBCASE("a kink triggers a jitter and still yields a finite gradient") {
        SmallNet net;
        Layer layer{Matrix(1, 2), {0.0}, Activation::Relu};
        layer.weight.at(0, 0) = 1.0;
        layer.weight.at(0, 1) = -1.0;
        net.layers.push_back(layer);
        StateBatch batch = {{{1.0, 1.0}}, {1.0}}; // pre-activation exactly 0
        CHECK(kink_hit(net, batch.states[0], 1e-7));
        Critic critic = QuadraticCritic{1.0};
        // quadratic critic needs dim(a) == dim(s): use a 1d state instead
        SmallNet net1;
        Layer l1{Matrix(1, 1), {0.0}, Activation::Relu};
        l1.weight.at(0, 0) = 1.0;
        net1.layers.push_back(l1);
        StateBatch b1 = {{{0.0}}, {1.0}};
        PolicyGradResult res = policy_grad_analytic(net1, critic, b1);
        CHECK(res.jittered_states.size() == 1);
        CHECK(std::isfinite(res.grad[0]));
    }
    SUBCASE("a kink that survives the jitter throws") {
        SmallNet net;
        Layer layer{Matrix(1, 1), {0.0}, Activation::Relu};
        layer.weight.at(0, 0) = 0.0; // pre-activation 0 for every input
        net.layers.push_back(layer);
        StateBatch batch = {{{0.5}}, {1.0}};
        CHECK_THROWS_AS(
            policy_grad_analytic(net, Critic(QuadraticCritic{1.0}), batch),
            NonSmoothAtPoint);
    }
}

TEST_CASE("distributional gradient with purely additive noise is exact") {
    // Z(s, a, w) = a + 0.5 w: one identity layer
    SmallNet znet;
    Layer layer{Matrix(1, 3), {0.0}, Activation::Identity};
    layer.weight.at(0, 0) = 0.0; // s
    layer.weight.at(0, 1) = 1.0; // a
    layer.weight.at(0, 2) = 0.5; // w
    znet.layers.push_back(layer);

    // critic Q(s,a) = E[Z] = a
    SmallNet qnet;
    Layer qlayer{Matrix(1, 2), {0.0}, Activation::Identity};
    qlayer.weight.at(0, 1) = 1.0;
    qnet.layers.push_back(qlayer);

    SmallNet policy = scalar_policy(0.8, 0.1);
    StateBatch batch = {{{0.4}}, {1.0}};
    Rng rng(17);
    DistGradResult dist = distributional_grad(znet, policy, batch, 2000, rng);
    PolicyGradResult det =
        policy_grad_analytic(policy, Critic(NetCritic{qnet}), batch);
    REQUIRE(dist.grad.size() == det.grad.size());
    for (std::size_t i = 0; i < dist.grad.size(); ++i) {
        // every per-sample pathwise derivative is identical; only the rounding
        // of the n-term mean separates the two estimates
        CHECK(std::fabs(dist.grad[i] - det.grad[i]) <= 1e-12);
        CHECK(dist.se[i] <= 1e-8); // rounding-floor variance only
    }
}

TEST_CASE("zero noise channel reduces exactly to the deterministic gradient") {
    Rng rng(21);
    SmallNet policy = sigmoid_policy(rng);

    SmallNet qnet;
    qnet.layers.push_back({Matrix(3, 4), std::vector<double>(3, 0.0),
                           Activation::Sigmoid});
    qnet.layers.push_back({Matrix(1, 3), std::vector<double>(1, 0.0),
                           Activation::Identity});
    std::vector<double> theta(param_count(qnet));
    for (double& v : theta) v = rng.uniform(-1.0, 1.0);
    set_params(qnet, theta);

    // same net with an extra, silent noise input
    SmallNet znet;
    znet.layers.push_back({Matrix(3, 5), std::vector<double>(3, 0.0),
                           Activation::Sigmoid});
    znet.layers.push_back({Matrix(1, 3), std::vector<double>(1, 0.0),
                           Activation::Identity});
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c)
            znet.layers[0].weight.at(r, c) = qnet.layers[0].weight.at(r, c);
        znet.layers[0].bias[static_cast<std::size_t>(r)] =
            qnet.layers[0].bias[static_cast<std::size_t>(r)];
    }
    znet.layers[1] = qnet.layers[1];

    StateBatch batch = {{{0.3, -0.2}, {1.0, 0.5}}, {0.5, 0.5}};
    Rng noise(3);
    DistGradResult dist = distributional_grad(znet, policy, batch, 1000, noise);
    PolicyGradResult det =
        policy_grad_analytic(policy, Critic(NetCritic{qnet}), batch);
    for (std::size_t i = 0; i < dist.grad.size(); ++i)
        CHECK(std::fabs(dist.grad[i] - det.grad[i]) <= 1e-12);
}

TEST_CASE("scaling the objective scales the FD gradient exactly") {
    Rng rng(31);
    SmallNet policy = sigmoid_policy(rng);
    StateBatch batch = {{{0.3, -0.2}, {1.0, 0.5}}, {0.5, 0.5}};
    std::vector<double> base =
        policy_grad_fd(policy, Critic(QuadraticCritic{1.0}), batch, 1e-4);
    std::vector<double> scaled =
        policy_grad_fd(policy, Critic(QuadraticCritic{4.0}), batch, 1e-4);
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(scaled[i] == 4.0 * base[i]); // power-of-two scale is exact
}

TEST_CASE("lipschitz bounds") {
    SUBCASE("single scalar layer") {
        CHECK(lipschitz_bound(scalar_policy(2.0)) ==
              doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("two relu layers with operator norms 2 and 3") {
        SmallNet net;
        Layer l1{Matrix(2, 2), std::vector<double>(2, 0.0), Activation::Relu};
        l1.weight.at(0, 0) = 2.0;
        l1.weight.at(1, 1) = 1.0;
        Layer l2{Matrix(1, 2), std::vector<double>(1, 0.0), Activation::Relu};
        l2.weight.at(0, 0) = 3.0;
        net.layers.push_back(l1);
        net.layers.push_back(l2);
        CHECK(lipschitz_bound(net) == doctest::Approx(6.0).epsilon(1e-8));
    }
    SUBCASE("operator norm on known matrices") {
        Matrix diag(2, 2);
        diag.at(0, 0) = 3.0;
        diag.at(1, 1) = 4.0;
        CHECK(operator_norm(diag) == doctest::Approx(4.0).epsilon(1e-8));
        Matrix nilpotent(2, 2);
        nilpotent.at(0, 1) = 2.0;
        CHECK(operator_norm(nilpotent) == doctest::Approx(2.0).epsilon(1e-8));
    }
    SUBCASE("random difference quotients never beat the bound") {
        Rng rng(42);
        SmallNet policy = sigmoid_policy(rng);
        double bound = lipschitz_bound(policy);
        Rng pairs(43);
        double emp = empirical_lipschitz(policy, 10'000, -3.0, 3.0, pairs);
        CHECK(emp <= bound + 1e-9);
        CHECK(emp > 0.0);
    }
}

TEST_CASE("vector-valued critic networks are rejected") {
    SmallNet bad;
    bad.layers.push_back({Matrix(2, 2), std::vector<double>(2, 0.0),
                          Activation::Identity});
    StateBatch batch = {{{0.5}}, {1.0}};
    CHECK_THROWS_AS(policy_value(scalar_policy(1.0), Critic(NetCritic{bad}), batch),
                    DimensionMismatch);
}

TEST_CASE("batch validation") {
    CHECK_THROWS_AS(validate_batch(StateBatch{{{1.0}}, {0.5}}), ConfigError);
    CHECK_THROWS_AS(validate_batch(StateBatch{{{1.0}, {2.0}}, {1.0}}),
                    DimensionMismatch);
    CHECK_THROWS_AS(validate_batch(StateBatch{{{1.0}}, {-1.0}}), ConfigError);
    CHECK_NOTHROW(validate_batch(StateBatch{{{1.0}, {2.0}}, {0.25, 0.75}}));
}
