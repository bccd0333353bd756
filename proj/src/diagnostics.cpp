#include "qconv/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "qconv/errors.hpp"
#include "qconv/solver.hpp"

namespace qconv {

DecompositionTrace decompose_run(const ValidatedMdp& mdp, const QTable& qstar,
                                 const LearnConfig& cfg) {
    DecompositionTrace trace;
    trace.gamma = mdp.gamma();
    trace.c_r = mdp.c_r();
    trace.cell_noise_sum.assign(
        static_cast<std::size_t>(mdp.n_states()) *
            static_cast<std::size_t>(mdp.n_actions()),
        0.0);

    QTable w(mdp.n_states(), mdp.n_actions(), 0.0);
    // delta_0 = Delta_0, w_0 = 0: the split that makes w purely noise-driven.
    QTable delta(mdp.n_states(), mdp.n_actions(), 0.0);
    {
        QTable q0 = cfg.q_init_table
                        ? *cfg.q_init_table
                        : QTable(mdp.n_states(), mdp.n_actions(), cfg.q_init);
        for (std::size_t i = 0; i < delta.v.size(); ++i)
            delta.v[i] = q0.v[i] - qstar.v[i];
    }

    std::vector<double> vmax;
    auto record = [&](std::uint64_t t, double err) {
        trace.ts.push_back(t);
        trace.w_norm.push_back(w.sup_norm());
        trace.delta_norm.push_back(delta.sup_norm());
        trace.err_norm.push_back(err);
        trace.noise_sum_series.push_back(trace.max_cell_noise_sum);
    };
    record(0, delta.sup_norm());

    StepObserver observer = [&](const StepInfo& info, const QTable& q) {
        const std::size_t cell = static_cast<std::size_t>(
            mdp.spec().cell(info.s, info.a));

        const double err_before = q.sup_dist(qstar);
        row_maxes(q, vmax);
        const double ef =
            bellman_cell(mdp, info.s, info.a, vmax) - qstar.at(info.s, info.a);
        const double f = info.target - qstar.at(info.s, info.a);
        const double p = f - ef;

        trace.max_contraction_gap = std::max(
            trace.max_contraction_gap, std::fabs(ef) - trace.gamma * err_before);

        delta.v[cell] = (1.0 - info.alpha) * delta.v[cell] + info.alpha * ef;
        w.v[cell] = (1.0 - info.alpha) * w.v[cell] + info.alpha * p;

        const double ap = info.alpha * p;
        trace.cell_noise_sum[cell] += ap * ap;
        trace.max_cell_noise_sum =
            std::max(trace.max_cell_noise_sum, trace.cell_noise_sum[cell]);

        // Same update expression the runner applies next; checks the
        // elementwise identity Delta = w + delta at the only cell that moves.
        const double q_next =
            (1.0 - info.alpha) * q.v[cell] + info.alpha * info.target;
        const double gap =
            std::fabs((q_next - qstar.v[cell]) - (w.v[cell] + delta.v[cell]));
        trace.max_identity_gap = std::max(trace.max_identity_gap, gap);

        trace.peak_w_norm = std::max(trace.peak_w_norm, w.sup_norm());

        const std::uint64_t t1 = info.t + 1;
        if (t1 % cfg.record_every == 0 || t1 == cfg.horizon) {
            // err_norm of Q_{t+1}: the runner has not applied the update yet,
            // so patch the one moving cell.
            double err_after = 0.0;
            for (std::size_t i = 0; i < q.v.size(); ++i) {
                double qi = (i == cell) ? q_next : q.v[i];
                err_after = std::max(err_after, std::fabs(qi - qstar.v[i]));
            }
            record(t1, err_after);
        }
    };

    trace.run = q_learning_run(mdp, qstar, cfg, observer);

    // Full-table identity check at the end of the run.
    for (std::size_t i = 0; i < w.v.size(); ++i) {
        double gap = std::fabs((trace.run.final_q.v[i] - qstar.v[i]) -
                               (w.v[i] + delta.v[i]));
        trace.max_identity_gap = std::max(trace.max_identity_gap, gap);
    }

    trace.final_w_norm = w.sup_norm();
    trace.w_final = std::move(w);
    trace.delta_final = std::move(delta);
    return trace;
}

KtTrace kt_sequence(double k0, std::span<const double> b, double gamma) {
    if (!(k0 >= 0.0)) throw ConfigError("kt_sequence: k0 must be >= 0");
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw BadGamma("kt_sequence: gamma must lie in (0, 1)");
    KtTrace trace;
    trace.k_star = std::max(k0, 1.0 / (1.0 - gamma) + 1.0);
    trace.k.reserve(b.size() + 1);
    double k = k0;
    trace.k.push_back(k);
    double max_excess = k - trace.k_star;
    for (double bt : b) {
        if (!(bt >= 0.0) || bt > 1.0)
            throw BadSchedule("kt_sequence: b_t must lie in [0, 1]");
        k = std::max(k, k + bt * (1.0 - (1.0 - gamma) * k));
        trace.k.push_back(k);
        max_excess = std::max(max_excess, k - trace.k_star);
    }
    trace.max_excess = max_excess;
    trace.capped = max_excess <= 0.0;
    return trace;
}

std::vector<double> envelope_sequence(const StepSchedule& schedule,
                                      std::uint64_t T) {
    std::vector<double> b(T);
    for (std::uint64_t t = 0; t < T; ++t) b[t] = step_envelope(schedule, t);
    return b;
}

MomentReport lt_moment_check(const ValidatedMdp& mdp, const LearnConfig& cfg,
                             int n_runs, double k0) {
    if (n_runs < 30)
        throw ConfigError("lt_moment_check needs at least 30 replicas");
    MomentReport report;
    report.k0 = k0;
    report.c_r = mdp.c_r();

    const QTable zeros(mdp.n_states(), mdp.n_actions(), 0.0);
    std::vector<std::vector<double>> l2; // per recorded index, across runs
    for (int i = 0; i < n_runs; ++i) {
        LearnConfig rc = cfg;
        rc.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
        RunDiagnostics diag = q_learning_run(mdp, zeros, rc);
        if (report.ts.empty()) {
            for (const auto& row : diag.rows) report.ts.push_back(row.t);
            l2.resize(report.ts.size());
        }
        if (diag.rows.size() != report.ts.size())
            throw NonFiniteValue("lt_moment_check: replica aborted early");
        for (std::size_t r = 0; r < diag.rows.size(); ++r)
            l2[r].push_back(diag.rows[r].l_t * diag.rows[r].l_t);
    }

    KtTrace kt = kt_sequence(k0, envelope_sequence(cfg.schedule, cfg.horizon),
                             mdp.gamma());

    report.pass = true;
    for (std::size_t r = 0; r < report.ts.size(); ++r) {
        double mean = 0.0;
        for (double v : l2[r]) mean += v;
        mean /= static_cast<double>(n_runs);
        double var = 0.0;
        for (double v : l2[r]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n_runs - 1);
        double se = std::sqrt(var / static_cast<double>(n_runs));
        double kt_here = kt.k[static_cast<std::size_t>(report.ts[r])];
        double bound = kt_here * kt_here * report.c_r;
        report.mean_l2.push_back(mean);
        report.se_l2.push_back(se);
        report.bound.push_back(bound);
        if (mean + 3.0 * se > bound) report.pass = false;
    }
    return report;
}

Lemma1Result lemma1_check(const RewardDist& dist, Conditioning cond,
                          std::uint64_t n, std::uint64_t seed) {
    if (n < 10'000) throw ConfigError("lemma1_check needs n >= 1e4");
    validate_dist(dist);
    Moments m = reward_moments(dist);
    Lemma1Result res;
    res.rhs = 4.0 * m.second;
    if (cond == Conditioning::Full) {
        // Z = Y - E[Y | Y] = 0 identically.
        res.lhs = 0.0;
        res.se3 = 0.0;
        res.pass = res.lhs <= res.rhs;
        return res;
    }
    Rng rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        double z = sample_reward(dist, rng) - m.mean;
        double z2 = z * z;
        sum += z2;
        sum_sq += z2 * z2;
    }
    const double nn = static_cast<double>(n);
    res.lhs = sum / nn;
    double var = std::max(0.0, sum_sq / nn - res.lhs * res.lhs);
    res.se3 = 3.0 * std::sqrt(var / nn);
    res.pass = res.lhs <= res.rhs + res.se3;
    return res;
}

NoiseSummabilityResult noise_summability_check(const DecompositionTrace& trace,
                                               const StepSchedule& schedule,
                                               double k0) {
    NoiseSummabilityResult res;
    res.running_sum = trace.max_cell_noise_sum;
    const double m_bound = squared_sum_bound(schedule);
    res.finite_bound = std::isfinite(m_bound);
    const double k_star = std::max(k0, 1.0 / (1.0 - trace.gamma) + 1.0);
    res.bound = 4.0 * m_bound * (1.0 + trace.gamma * k_star) * trace.c_r;
    res.pass = res.finite_bound && res.running_sum <= res.bound;

    if (trace.noise_sum_series.size() >= 10) {
        std::size_t tail =
            trace.noise_sum_series.size() - trace.noise_sum_series.size() / 10;
        double total = trace.noise_sum_series.back();
        double at_tail = trace.noise_sum_series[tail - 1];
        res.last_decile_increment_frac =
            total > 0.0 ? (total - at_tail) / total : 0.0;
    }
    return res;
}

} // namespace qconv
