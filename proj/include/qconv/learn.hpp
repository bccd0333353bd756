#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qconv/behavior.hpp"
#include "qconv/mdp.hpp"
#include "qconv/qtable.hpp"
#include "qconv/schedule.hpp"

namespace qconv {

struct LearnConfig {
    StepSchedule schedule = VisitHarmonic{1.0};
    BehaviorPolicy behavior = EpsilonGreedy{0.1, 0.0, Decay::None};
    std::uint64_t horizon = 1'000'000;
    double q_init = 0.0;
    std::optional<QTable> q_init_table; // overrides q_init when present
    std::uint64_t seed = 0;
    std::uint64_t record_every = 1000;
};

void validate_learn_config(const LearnConfig& cfg);

struct DiagRow {
    std::uint64_t t;
    double sup_error; // ||Q_t - Q*||_inf against the supplied reference
    double l_t;       // sup_x |Q_t(x)|
    double lprime_t;  // max_{x,y} |Q_t(x) - Q_t(y)|
    std::uint64_t min_visits;
    std::uint64_t max_visits;
};

struct RunDiagnostics {
    std::vector<DiagRow> rows; // t = 0, every record_every steps, and the final step
    QTable final_q;
    std::vector<std::uint64_t> visits; // per cell, final
    double initial_sup_error = 0.0;
    double final_sup_error = 0.0;
    std::uint64_t steps = 0;
    // Set instead of throwing so the diagnostics collected so far survive; the
    // CLI maps it to a nonzero exit.
    bool aborted_nonfinite = false;
};

// Everything known about one step before the table is touched. `q` is Q_t.
struct StepInfo {
    std::uint64_t t;
    int s;
    int a;
    double reward;
    int next_state;
    double alpha;  // masked step size applied at (s, a)
    double target; // r_t + gamma * bootstrap
};

using StepObserver = std::function<void(const StepInfo&, const QTable& q)>;

// Watkins Q-learning: exactly one cell updated per step,
//   Q_{t+1}(s,a) = (1 - alpha) Q_t(s,a) + alpha (r_t + gamma max_b Q_t(s',b)).
// Deterministic given cfg.seed. `qstar` is only used as the error reference
// in the recorded diagnostics.
RunDiagnostics q_learning_run(const ValidatedMdp& mdp, const QTable& qstar,
                              const LearnConfig& cfg,
                              const StepObserver& observer = nullptr);

// On-policy TD: bootstraps on the action actually taken next,
//   Q_{t+1}(s,a) = (1 - alpha) Q_t(s,a) + alpha (r_t + gamma Q_t(s', a')).
RunDiagnostics sarsa_run(const ValidatedMdp& mdp, const QTable& qstar,
                         const LearnConfig& cfg,
                         const StepObserver& observer = nullptr);

} // namespace qconv
