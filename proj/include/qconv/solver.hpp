#pragma once

#include <cstdint>
#include <utility>

#include "qconv/mdp.hpp"
#include "qconv/qtable.hpp"

namespace qconv {

// One application of the Bellman optimality operator,
//   (T q)(s,a) = E[r(s,a)] + gamma * sum_{s'} p(s'|s,a) * max_b q(s',b),
// computed from closed-form reward means (never from samples).
QTable bellman_apply(const ValidatedMdp& mdp, const QTable& q);

// Same, for a single cell given precomputed row maxes vmax[s'] = max_b q(s',b);
// used by per-step proof diagnostics.
double bellman_cell(const ValidatedMdp& mdp, int s, int a,
                    const std::vector<double>& vmax);

// Fills vmax[s'] = max_b q(s',b).
void row_maxes(const QTable& q, std::vector<double>& vmax);

struct SolveResult {
    QTable qstar;
    std::uint64_t iterations;
};

// Fixed-point iteration of T from the zero table. The stopping threshold on
// the Bellman residual is tol*(1-gamma)*min(1, 1/(2*gamma)), which guarantees
// ||qstar - Q*||_inf <= tol for every gamma in (0,1). Iteration cap 1e7;
// exceeding it throws NonConvergence (a bug, not an expected outcome).
SolveResult value_iterate(const ValidatedMdp& mdp, double tol);

// One-hot greedy policy, ties toward the lowest action index.
PolicyTable greedy_policy(const QTable& q);

// Returns (||Tq1 - Tq2||_inf, gamma * ||q1 - q2||_inf); the first never
// exceeds the second beyond round-off.
std::pair<double, double> contraction_check(const ValidatedMdp& mdp,
                                            const QTable& q1, const QTable& q2);

} // namespace qconv
