#include "qconv/learn.hpp"

#include <algorithm>
#include <cmath>

#include "qconv/errors.hpp"

namespace qconv {
namespace {

QTable initial_table(const ValidatedMdp& mdp, const LearnConfig& cfg) {
    if (cfg.q_init_table) {
        if (cfg.q_init_table->n_states != mdp.n_states() ||
            cfg.q_init_table->n_actions != mdp.n_actions())
            throw DimensionMismatch("q_init_table does not match the MDP");
        return *cfg.q_init_table;
    }
    return QTable(mdp.n_states(), mdp.n_actions(), cfg.q_init);
}

struct Recorder {
    const QTable& qstar;
    const std::vector<std::uint64_t>& visits;
    RunDiagnostics& diag;

    void record(std::uint64_t t, const QTable& q) {
        auto [lo, hi] = std::minmax_element(visits.begin(), visits.end());
        diag.rows.push_back({t, q.sup_dist(qstar), q.sup_norm(), q.range(),
                             *lo, *hi});
    }
};

enum class Update { QLearning, Sarsa };

RunDiagnostics run_impl(const ValidatedMdp& mdp, const QTable& qstar,
                        const LearnConfig& cfg, Update kind,
                        const StepObserver& observer) {
    validate_learn_config(cfg);
    if (qstar.n_states != mdp.n_states() || qstar.n_actions != mdp.n_actions())
        throw DimensionMismatch("qstar does not match the MDP");

    Rng rng(cfg.seed);
    QTable q = initial_table(mdp, cfg);
    const double gamma = mdp.gamma();
    const int n_states = mdp.n_states();

    RunDiagnostics diag;
    diag.visits.assign(q.v.size(), 0);
    Recorder rec{qstar, diag.visits, diag};
    rec.record(0, q);
    diag.initial_sup_error = diag.rows.front().sup_error;

    int s = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(n_states)));
    int a = 0;
    if (kind == Update::Sarsa) a = choose_action(cfg.behavior, q, s, 0, rng);

    for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
        if (kind == Update::QLearning) a = choose_action(cfg.behavior, q, s, t, rng);
        Transition tr = mdp.sample_transition(s, a, rng);

        int next_behavior_state =
            mdp.is_absorbing_sink(tr.next_state)
                ? static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(n_states)))
                : tr.next_state;

        double bootstrap;
        int a_next = 0;
        if (kind == Update::QLearning) {
            bootstrap = q.max_row(tr.next_state);
        } else {
            a_next = choose_action(cfg.behavior, q, next_behavior_state, t + 1, rng);
            bootstrap = q.at(next_behavior_state, a_next);
        }
        const double target = tr.reward + gamma * bootstrap;

        const std::size_t cell = static_cast<std::size_t>(mdp.spec().cell(s, a));
        const double alpha =
            step_size(cfg.schedule, t, static_cast<double>(diag.visits[cell]));

        if (observer) observer({t, s, a, tr.reward, tr.next_state, alpha, target}, q);

        double& qsa = q.at(s, a);
        qsa = (1.0 - alpha) * qsa + alpha * target;
        diag.visits[cell] += 1;
        diag.steps = t + 1;

        if (!std::isfinite(qsa)) {
            diag.aborted_nonfinite = true;
            rec.record(t + 1, q);
            break;
        }

        s = next_behavior_state;
        if (kind == Update::Sarsa) a = a_next;

        if ((t + 1) % cfg.record_every == 0 || t + 1 == cfg.horizon)
            rec.record(t + 1, q);
    }

    diag.final_q = std::move(q);
    diag.final_sup_error = diag.rows.back().sup_error;
    return diag;
}

} // namespace

void validate_learn_config(const LearnConfig& cfg) {
    validate_schedule_params(cfg.schedule);
    validate_behavior(cfg.behavior);
    if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (cfg.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (!std::isfinite(cfg.q_init)) throw ConfigError("q_init must be finite");
}

RunDiagnostics q_learning_run(const ValidatedMdp& mdp, const QTable& qstar,
                              const LearnConfig& cfg, const StepObserver& observer) {
    return run_impl(mdp, qstar, cfg, Update::QLearning, observer);
}

RunDiagnostics sarsa_run(const ValidatedMdp& mdp, const QTable& qstar,
                         const LearnConfig& cfg, const StepObserver& observer) {
    return run_impl(mdp, qstar, cfg, Update::Sarsa, observer);
}

} // namespace qconv
