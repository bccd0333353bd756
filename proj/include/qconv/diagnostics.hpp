#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qconv/learn.hpp"
#include "qconv/mdp.hpp"
#include "qconv/qtable.hpp"
#include "qconv/reward_dist.hpp"
#include "qconv/schedule.hpp"

namespace qconv {

// Materialized internals of the convergence proof along one Q-learning run:
// the error decomposition Delta_t = w_t + delta_t, where delta absorbs the
// contraction part (driven by E[F_t | F_t], computed exactly from the model)
// and w absorbs the martingale noise p_t = F_t - E[F_t | F_t].
struct DecompositionTrace {
    std::vector<std::uint64_t> ts;       // recorded step indices
    std::vector<double> w_norm;          // ||w_t||_inf at recorded steps
    std::vector<double> delta_norm;      // ||delta_t||_inf
    std::vector<double> err_norm;        // ||Delta_t||_inf
    std::vector<double> noise_sum_series; // max-cell running sum of (a_t p_t)^2

    double max_identity_gap = 0.0;    // max |Delta - (w + delta)| seen anywhere
    double max_contraction_gap = 0.0; // max (|E[F_t|F_t]| - gamma ||Delta_t||_inf)
    double peak_w_norm = 0.0;         // per-step exact peak of ||w_t||_inf
    double final_w_norm = 0.0;

    std::vector<double> cell_noise_sum; // final per-cell sums of (a_t p_t)^2
    double max_cell_noise_sum = 0.0;

    QTable w_final;
    QTable delta_final;
    double gamma = 0.0;
    double c_r = 0.0;
    RunDiagnostics run; // the underlying learner diagnostics
};

DecompositionTrace decompose_run(const ValidatedMdp& mdp, const QTable& qstar,
                                 const LearnConfig& cfg);

// Deterministic bound recursion K_{t+1} = max(K_t, K_t + b_t (1 - (1-gamma) K_t))
// with cap K* = max(K_0, 1/(1-gamma) + 1).
struct KtTrace {
    std::vector<double> k; // K_0 .. K_T
    double k_star = 0.0;
    bool capped = true;       // K_t <= K* at every index, exactly
    double max_excess = 0.0;  // max(K_t - K*), <= 0 when capped
};

KtTrace kt_sequence(double k0, std::span<const double> b, double gamma);

// Deterministic per-step envelope of the masked step size for a schedule.
std::vector<double> envelope_sequence(const StepSchedule& schedule,
                                      std::uint64_t T);

// Monte-Carlo check of E[L_t^2] <= K_t^2 C_R across n_runs independent runs.
struct MomentReport {
    std::vector<std::uint64_t> ts;
    std::vector<double> mean_l2;      // empirical E[L_t^2]
    std::vector<double> se_l2;        // standard error of that mean
    std::vector<double> bound;        // K_t^2 * C_R
    double k0 = 1.0;
    double c_r = 0.0;
    bool pass = false; // mean + 3 SE <= bound at every recorded t
};

MomentReport lt_moment_check(const ValidatedMdp& mdp, const LearnConfig& cfg,
                             int n_runs, double k0 = 1.0);

enum class Conditioning { Trivial, Full };

// Empirical check of E[Z^2] <= 4 E[Y^2] for Z = Y - E[Y|G]: the trivial
// sigma-algebra gives Z = Y - E[Y], the full one gives Z = 0.
struct Lemma1Result {
    double lhs = 0.0;  // empirical E[Z^2]
    double rhs = 0.0;  // exact 4 E[Y^2]
    double se3 = 0.0;  // 3 standard errors of the lhs estimate
    bool pass = false;
};

Lemma1Result lemma1_check(const RewardDist& dist, Conditioning cond,
                          std::uint64_t n, std::uint64_t seed);

// Compares the realized max-cell sum of (a_t p_t)^2 against the analytic cap
// 4 M (1 + gamma K*) C_R with M = per-cell sum of b_t^2 in closed form.
struct NoiseSummabilityResult {
    double running_sum = 0.0; // max over cells, end of run
    double bound = 0.0;
    bool finite_bound = false;
    bool pass = false;
    double last_decile_increment_frac = 0.0; // plateau indicator
};

NoiseSummabilityResult noise_summability_check(const DecompositionTrace& trace,
                                               const StepSchedule& schedule,
                                               double k0 = 1.0);

} // namespace qconv
