#include <doctest.h>

#include <cmath>

#include "qconv/learn.hpp"
#include "qconv/solver.hpp"

using namespace qconv;

namespace {

ValidatedMdp point_mass_mdp(double value, double gamma = 0.9) {
    MdpSpec spec;
    spec.n_states = 1;
    spec.n_actions = 1;
    spec.gamma = gamma;
    spec.trans = {{1.0}};
    spec.rewards = {PointMass{value}};
    return validate_mdp(spec);
}

QTable zeros(const ValidatedMdp& mdp) {
    return QTable(mdp.n_states(), mdp.n_actions(), 0.0);
}

} // namespace

TEST_CASE("a single step with alpha = 1 lands exactly on the target") {
    ValidatedMdp mdp = point_mass_mdp(3.0, 0.5);
    LearnConfig cfg;
    cfg.horizon = 1;
    cfg.seed = 4;
    RunDiagnostics diag = q_learning_run(mdp, zeros(mdp), cfg);
    CHECK(diag.final_q.at(0, 0) == 3.0); // r0 + gamma * 0
    CHECK(diag.visits[0] == 1);
}

TEST_CASE("noise-free run converges to the geometric series value") {
    ValidatedMdp mdp = point_mass_mdp(1.0, 0.9);
    SolveResult solved = value_iterate(mdp, 1e-10);
    LearnConfig cfg;
    cfg.schedule = VisitHarmonic{10.0}; // c0 = 1/(1-gamma)
    cfg.horizon = 10'000;
    cfg.record_every = 1000;
    cfg.seed = 1;
    RunDiagnostics diag = q_learning_run(mdp, solved.qstar, cfg);
    CHECK(diag.final_sup_error < 1e-2);
    CHECK(diag.initial_sup_error == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("exactly one cell changes per step") {
    ValidatedMdp mdp = validate_mdp(generate_mdp(4, 3, RewardGen{}, 2));
    LearnConfig cfg;
    cfg.horizon = 500;
    cfg.seed = 9;
    QTable shadow(4, 3, 0.0);
    std::uint64_t checked = 0;
    StepObserver observer = [&](const StepInfo& info, const QTable& q) {
        // the runner's table must equal our shadow that only ever applies
        // single-cell updates
        REQUIRE(q.v == shadow.v);
        double& cell = shadow.at(info.s, info.a);
        cell = (1.0 - info.alpha) * cell + info.alpha * info.target;
        ++checked;
    };
    RunDiagnostics diag = q_learning_run(mdp, zeros(mdp), cfg, observer);
    CHECK(checked == 500);
    CHECK(diag.final_q.v == shadow.v);
}

TEST_CASE("identical seed and config reproduce bit-identical diagnostics") {
    ValidatedMdp mdp = validate_mdp(generate_mdp(5, 3, RewardGen{}, 3));
    LearnConfig cfg;
    cfg.horizon = 20'000;
    cfg.record_every = 500;
    cfg.seed = 31;
    QTable qstar = value_iterate(mdp, 1e-8).qstar;
    RunDiagnostics a = q_learning_run(mdp, qstar, cfg);
    RunDiagnostics b = q_learning_run(mdp, qstar, cfg);
    CHECK(a.final_q.v == b.final_q.v);
    CHECK(a.visits == b.visits);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].sup_error == b.rows[i].sup_error);
        CHECK(a.rows[i].l_t == b.rows[i].l_t);
    }
}

TEST_CASE("range statistic honors L' <= 2L at every recorded step") {
    ValidatedMdp mdp = validate_mdp(generate_mdp(5, 3, RewardGen{}, 8));
    LearnConfig cfg;
    cfg.horizon = 50'000;
    cfg.record_every = 100;
    cfg.seed = 5;
    RunDiagnostics diag = q_learning_run(mdp, zeros(mdp), cfg);
    for (const auto& row : diag.rows) {
        CHECK(row.lprime_t <= 2.0 * row.l_t + 1e-12);
        CHECK(row.min_visits <= row.max_visits);
    }
    std::uint64_t sum = 0;
    for (auto v : diag.visits) sum += v;
    CHECK(sum == cfg.horizon);
}

TEST_CASE("zero rewards and zero init pin the table at zero for both learners") {
    MdpSpec spec = generate_mdp(4, 2, RewardGen{"point_mass"}, 6);
    for (auto& r : spec.rewards) r = PointMass{0.0};
    ValidatedMdp mdp = validate_mdp(spec);
    LearnConfig cfg;
    cfg.horizon = 5000;
    cfg.seed = 10;
    RunDiagnostics ql = q_learning_run(mdp, zeros(mdp), cfg);
    CHECK(ql.final_q.sup_norm() == 0.0);
    cfg.behavior = SoftmaxPolicy{1.0, 1e-3, Decay::None};
    RunDiagnostics sa = sarsa_run(mdp, zeros(mdp), cfg);
    CHECK(sa.final_q.sup_norm() == 0.0);
    for (const auto& row : sa.rows) CHECK(row.l_t == 0.0);
}

TEST_CASE("sarsa equals q-learning on a single-action MDP, bit for bit") {
    MdpSpec spec = generate_mdp(4, 1, RewardGen{}, 12);
    ValidatedMdp mdp = validate_mdp(spec);
    QTable qstar = value_iterate(mdp, 1e-8).qstar;
    LearnConfig cfg;
    cfg.horizon = 10'000;
    cfg.record_every = 250;
    cfg.seed = 77;
    RunDiagnostics ql = q_learning_run(mdp, qstar, cfg);
    RunDiagnostics sa = sarsa_run(mdp, qstar, cfg);
    CHECK(ql.final_q.v == sa.final_q.v);
    CHECK(ql.visits == sa.visits);
    REQUIRE(ql.rows.size() == sa.rows.size());
    for (std::size_t i = 0; i < ql.rows.size(); ++i)
        CHECK(ql.rows[i].sup_error == sa.rows[i].sup_error);
}

TEST_CASE("absorbing zero-reward sink triggers uniform restarts") {
    // s0 -> s1 always (reward 1); s1 is an absorbing PointMass(0) sink.
    MdpSpec spec;
    spec.n_states = 2;
    spec.n_actions = 1;
    spec.gamma = 0.5;
    spec.trans = {{0.0, 1.0}, {0.0, 1.0}};
    spec.rewards = {PointMass{1.0}, PointMass{0.0}};
    ValidatedMdp mdp = validate_mdp(spec);
    CHECK(mdp.is_absorbing_sink(1));
    CHECK(!mdp.is_absorbing_sink(0));

    LearnConfig cfg;
    cfg.horizon = 2000;
    cfg.seed = 3;
    RunDiagnostics diag = q_learning_run(mdp, zeros(mdp), cfg);
    // without restarts the chain would stick in s1 after the first step
    CHECK(diag.visits[0] > 500);
}

TEST_CASE("overflowing table aborts with diagnostics intact") {
    ValidatedMdp mdp = point_mass_mdp(1e308, 0.9);
    LearnConfig cfg;
    cfg.horizon = 1000;
    cfg.q_init = 1e308;
    cfg.seed = 0;
    QTable ref = zeros(mdp);
    RunDiagnostics diag = q_learning_run(mdp, ref, cfg);
    CHECK(diag.aborted_nonfinite);
    CHECK(diag.steps < cfg.horizon);
    CHECK(diag.rows.size() >= 2);
}

TEST_CASE("epsilon and temperature decay floors") {
    EpsilonGreedy glie{1.0, 0.0, Decay::InvSqrtT};
    CHECK(epsilon_at(glie, 0) == 1.0);
    CHECK(epsilon_at(glie, 3) == 0.5);
    EpsilonGreedy floored{1.0, 0.25, Decay::InvSqrtT};
    CHECK(epsilon_at(floored, 1'000'000) == 0.25);
    CHECK(epsilon_at(EpsilonGreedy{0.1, 0.0, Decay::None}, 999) == 0.1);
    SoftmaxPolicy sm{2.0, 1e-3, Decay::InvSqrtT};
    CHECK(temperature_at(sm, 3) == 1.0);
    CHECK(temperature_at(sm, 0) == 2.0);
}
