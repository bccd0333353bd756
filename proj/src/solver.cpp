#include "qconv/solver.hpp"

#include <algorithm>
#include <cmath>

#include "qconv/errors.hpp"
#include "qconv/kernels.hpp"

namespace qconv {

void row_maxes(const QTable& q, std::vector<double>& vmax) {
    vmax.resize(static_cast<std::size_t>(q.n_states));
    for (int s = 0; s < q.n_states; ++s)
        vmax[static_cast<std::size_t>(s)] = q.max_row(s);
}

double bellman_cell(const ValidatedMdp& mdp, int s, int a,
                    const std::vector<double>& vmax) {
    const auto& row = mdp.trans_row(s, a);
    double exp_max = kern::active_ops().dot(row.data(), vmax.data(), row.size());
    return mdp.mean_reward(s, a) + mdp.gamma() * exp_max;
}

QTable bellman_apply(const ValidatedMdp& mdp, const QTable& q) {
    if (q.n_states != mdp.n_states() || q.n_actions != mdp.n_actions())
        throw DimensionMismatch("bellman_apply: table does not match the MDP");
    std::vector<double> vmax;
    row_maxes(q, vmax);
    QTable out(q.n_states, q.n_actions);
    for (int s = 0; s < q.n_states; ++s)
        for (int a = 0; a < q.n_actions; ++a)
            out.at(s, a) = bellman_cell(mdp, s, a, vmax);
    return out;
}

SolveResult value_iterate(const ValidatedMdp& mdp, double tol) {
    if (!(tol > 0.0)) throw ConfigError("value_iterate: tol must be positive");
    const double g = mdp.gamma();
    const double threshold = tol * (1.0 - g) * std::min(1.0, 1.0 / (2.0 * g));
    QTable q(mdp.n_states(), mdp.n_actions(), 0.0);
    constexpr std::uint64_t kMaxIters = 10'000'000;
    for (std::uint64_t it = 1; it <= kMaxIters; ++it) {
        QTable next = bellman_apply(mdp, q);
        double residual = next.sup_dist(q);
        q = std::move(next);
        if (residual <= threshold) return {std::move(q), it};
    }
    throw NonConvergence("value_iterate: iteration cap reached");
}

PolicyTable greedy_policy(const QTable& q) {
    PolicyTable pi(q.n_states, q.n_actions);
    for (int s = 0; s < q.n_states; ++s) pi.at(s, q.argmax_row(s)) = 1.0;
    return pi;
}

std::pair<double, double> contraction_check(const ValidatedMdp& mdp,
                                            const QTable& q1, const QTable& q2) {
    if (!q1.same_shape(q2))
        throw DimensionMismatch("contraction_check: shapes differ");
    QTable t1 = bellman_apply(mdp, q1);
    QTable t2 = bellman_apply(mdp, q2);
    return {t1.sup_dist(t2), mdp.gamma() * q1.sup_dist(q2)};
}

} // namespace qconv
