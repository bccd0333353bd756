#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qconv/errors.hpp"
#include "qconv/learn.hpp"
#include "qconv/quadrature.hpp"
#include "qconv/ripple.hpp"

using namespace qconv;

namespace {

ContinuousMdp linear_pair_cmdp(double sigma = 1.0, double gamma = 0.5) {
    ContinuousMdp cmdp;
    cmdp.dim = 1;
    cmdp.n_actions = 2;
    cmdp.mu = MuFamily::LinearPair;
    cmdp.reward_sigma = sigma;
    cmdp.gamma = gamma;
    return cmdp;
}

LearnConfig ripple_config(std::uint64_t horizon, std::uint64_t seed, double c0) {
    LearnConfig cfg;
    cfg.schedule = VisitHarmonic{c0};
    cfg.behavior = UniformRandomPolicy{};
    cfg.horizon = horizon;
    cfg.record_every = 10'000;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("ripple_eval basics") {
    double x[1] = {0.3}, y[1] = {0.4}, z[1] = {0.3};
    std::span<const double> sx(x, 1), sy(y, 1), sz(z, 1);

    CHECK(ripple_eval(RippleKernel(GaussianRBF{0.1}), sx, sz) == 1.0);
    CHECK(ripple_eval(RippleKernel(Triangular{0.2}), sx, sz) == 1.0);
    CHECK(ripple_eval(RippleKernel(IndicatorKernel{0.0}), sx, sz) == 1.0);

    CHECK(ripple_eval(RippleKernel(GaussianRBF{0.1}), sx, sy) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(ripple_eval(RippleKernel(IndicatorKernel{0.0}), sx, sy) == 0.0);
    CHECK(ripple_eval(RippleKernel(Triangular{0.2}), sx, sy) ==
          doctest::Approx(0.5).epsilon(1e-12));
    double far[1] = {0.9};
    CHECK(ripple_eval(RippleKernel(Triangular{0.2}), sx, {far, 1}) == 0.0);

    double bad[1] = {1.5};
    CHECK_THROWS_AS(ripple_eval(RippleKernel(GaussianRBF{0.1}), sx, {bad, 1}),
                    OutOfDomain);

    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        double a[2] = {rng.uniform01(), rng.uniform01()};
        double b[2] = {rng.uniform01(), rng.uniform01()};
        double f = ripple_eval(RippleKernel(GaussianRBF{0.07}), {a, 2}, {b, 2});
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }
}

TEST_CASE("continuous_qstar closed forms") {
    SUBCASE("two-action linear pair") {
        ContinuousQstar qs = continuous_qstar(linear_pair_cmdp());
        CHECK(qs.vbar == doctest::Approx(1.5).epsilon(1e-9));
        double s[1] = {0.2};
        CHECK(qs({s, 1}, 0) == doctest::Approx(0.95).epsilon(1e-9));
        CHECK(qs({s, 1}, 1) == doctest::Approx(1.55).epsilon(1e-9));
    }
    SUBCASE("zero mean function") {
        ContinuousMdp cmdp = linear_pair_cmdp();
        cmdp.mu = MuFamily::Zero;
        cmdp.n_actions = 3;
        ContinuousQstar qs = continuous_qstar(cmdp);
        CHECK(qs.vbar == 0.0);
        double s[1] = {0.7};
        CHECK(qs({s, 1}, 2) == 0.0);
    }
    SUBCASE("sin(pi s) single action with Bellman residual probe") {
        ContinuousMdp cmdp;
        cmdp.n_actions = 1;
        cmdp.mu = MuFamily::SinPi;
        cmdp.gamma = 0.9;
        ContinuousQstar qs = continuous_qstar(cmdp);
        CHECK(qs.vbar == doctest::Approx((2.0 / std::numbers::pi) / 0.1).epsilon(1e-8));
        // residual against an independently quadratured expectation
        double expect_max = integrate(
            [&](double sp) {
                double p[1] = {sp};
                return qs({p, 1}, 0);
            },
            0.0, 1.0, 1e-11);
        for (int i = 0; i <= 1000; ++i) {
            double s[1] = {static_cast<double>(i) / 1000.0};
            double residual = qs({s, 1}, 0) -
                              (std::sin(std::numbers::pi * s[0]) +
                               cmdp.gamma * expect_max);
            CHECK(std::fabs(residual) <= 1e-8);
        }
    }
    SUBCASE("2d domain") {
        ContinuousMdp cmdp = linear_pair_cmdp();
        cmdp.dim = 2;
        ContinuousQstar qs = continuous_qstar(cmdp);
        CHECK(qs.vbar == doctest::Approx(1.5).epsilon(1e-8));
    }
}

TEST_CASE("make_grid geometry") {
    GridQ g = make_grid(linear_pair_cmdp(), 5);
    CHECK(g.n_points == 5);
    CHECK(g.mesh == 0.25);
    CHECK(g.point(0)[0] == 0.0);
    CHECK(g.point(4)[0] == 1.0);

    ContinuousMdp two = linear_pair_cmdp();
    two.dim = 2;
    GridQ g2 = make_grid(two, 7);
    CHECK(g2.n_points == 49);
    CHECK(g2.point(48)[0] == 1.0);
    CHECK(g2.point(48)[1] == 1.0);

    CHECK_THROWS_AS(make_grid(two, 100), ConfigError); // 10000 > 4096
    CHECK_THROWS_AS(make_grid(two, 1), ConfigError);
}

TEST_CASE("induced_mdp restricts the continuous model to the grid") {
    ContinuousMdp cmdp = linear_pair_cmdp(0.5);
    GridQ grid = make_grid(cmdp, 9);
    ValidatedMdp imdp = induced_mdp(cmdp, grid);
    CHECK(imdp.n_states() == 9);
    CHECK(imdp.n_actions() == 2);
    CHECK(imdp.gamma() == 0.5);
    for (int s = 0; s < 9; ++s) {
        for (double p : imdp.trans_row(s, 0))
            CHECK(p == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
        CHECK(imdp.mean_reward(s, 0) == grid.point(s)[0]);
        CHECK(imdp.mean_reward(s, 1) == 1.0 - grid.point(s)[0]);
    }

    ContinuousMdp noiseless = linear_pair_cmdp(0.0);
    ValidatedMdp pm = induced_mdp(noiseless, grid);
    CHECK(std::holds_alternative<PointMass>(pm.reward_dist(3, 0)));
}

TEST_CASE("indicator ripple reproduces tabular q-learning bit for bit") {
    ContinuousMdp cmdp = linear_pair_cmdp(1.0);
    GridQ grid = make_grid(cmdp, 16);
    LearnConfig cfg = ripple_config(20'000, 99, 2.0);

    RippleDiagnostics rip = ripple_q_run(cmdp, IndicatorKernel{0.0}, grid, cfg);

    ValidatedMdp imdp = induced_mdp(cmdp, grid);
    QTable qstar_tab(16, 2, 0.0);
    RunDiagnostics tab = q_learning_run(imdp, qstar_tab, cfg);

    for (int i = 0; i < 16; ++i)
        for (int a = 0; a < 2; ++a)
            CHECK(rip.final_q.at(i, a) == tab.final_q.at(i, a));

    // accumulated indicator mass equals the integer visit counts
    for (int i = 0; i < 16; ++i)
        for (int a = 0; a < 2; ++a)
            CHECK(rip.mass[static_cast<std::size_t>(a) * 16 + i] ==
                  static_cast<double>(tab.visits[static_cast<std::size_t>(i) * 2 + a]));
}

TEST_CASE("zero mean, zero noise, zero init stays identically zero") {
    ContinuousMdp cmdp;
    cmdp.mu = MuFamily::Zero;
    cmdp.n_actions = 2;
    cmdp.reward_sigma = 0.0;
    cmdp.gamma = 0.5;
    GridQ grid = make_grid(cmdp, 8);
    RippleDiagnostics diag =
        ripple_q_run(cmdp, GaussianRBF{0.1}, grid, ripple_config(5'000, 1, 1.0));
    for (const auto& row : diag.rows) {
        CHECK(row.sup_error == 0.0);
        CHECK(row.mean_error == 0.0);
    }
}

TEST_CASE("ripple runs require a visit-harmonic schedule") {
    ContinuousMdp cmdp = linear_pair_cmdp();
    GridQ grid = make_grid(cmdp, 8);
    LearnConfig cfg = ripple_config(100, 1, 1.0);
    cfg.schedule = ConstantStep{0.5};
    CHECK_THROWS_AS(ripple_q_run(cmdp, GaussianRBF{0.1}, grid, cfg), BadSchedule);
}

TEST_CASE("gaussian ripple keeps the learned table nearly as smooth as mu") {
    ContinuousMdp cmdp = linear_pair_cmdp(1.0);
    GridQ grid = make_grid(cmdp, 64);
    RippleDiagnostics diag = ripple_q_run(cmdp, GaussianRBF{0.05}, grid,
                                          ripple_config(200'000, 5, 2.0));
    REQUIRE(!diag.aborted_nonfinite);
    // discrete Lipschitz constant over all grid pairs, per action
    double lip = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 64; ++i)
            for (int j = i + 1; j < 64; ++j) {
                double d = std::fabs(diag.final_q.point(i)[0] -
                                     diag.final_q.point(j)[0]);
                lip = std::max(lip, std::fabs(diag.final_q.at(i, a) -
                                              diag.final_q.at(j, a)) / d);
            }
    CHECK(lip <= mu_lipschitz(cmdp) + 0.5); // slack 0.5 for noise and boundary
}

TEST_CASE("grid refinement does not blow up the final error") {
    ContinuousMdp cmdp = linear_pair_cmdp(1.0);
    auto median_err = [&](int points) {
        std::vector<double> finals;
        for (std::uint64_t s = 0; s < 5; ++s) {
            GridQ grid = make_grid(cmdp, points);
            RippleDiagnostics diag = ripple_q_run(
                cmdp, GaussianRBF{0.05}, grid, ripple_config(200'000, 100 + s, 2.0));
            finals.push_back(diag.final_sup_error);
        }
        std::sort(finals.begin(), finals.end());
        return finals[finals.size() / 2];
    };
    double coarse = median_err(32);
    double fine = median_err(64); // halves the mesh
    CHECK(fine <= 2.0 * coarse);
}
