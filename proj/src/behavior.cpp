#include "qconv/behavior.hpp"

#include <cmath>
#include <vector>

#include "qconv/errors.hpp"

namespace qconv {

void validate_behavior(const BehaviorPolicy& b) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, EpsilonGreedy>) {
                if (!(p.eps0 >= 0.0) || p.eps0 > 1.0 || !(p.eps_min >= 0.0))
                    throw ConfigError("epsilon-greedy needs eps0 in [0,1], eps_min >= 0");
            } else if constexpr (std::is_same_v<T, SoftmaxPolicy>) {
                if (!(p.temperature > 0.0) || !(p.temp_min > 0.0))
                    throw ConfigError("softmax needs temperature > 0");
            }
        },
        b);
}

double epsilon_at(const EpsilonGreedy& e, std::uint64_t t) {
    if (e.decay == Decay::None) return e.eps0;
    return std::max(e.eps_min, e.eps0 / std::sqrt(static_cast<double>(t) + 1.0));
}

double temperature_at(const SoftmaxPolicy& sm, std::uint64_t t) {
    if (sm.decay == Decay::None) return sm.temperature;
    return std::max(sm.temp_min,
                    sm.temperature / std::sqrt(static_cast<double>(t) + 1.0));
}

namespace {

int argmax_span(std::span<const double> row) {
    int best = 0;
    for (std::size_t a = 1; a < row.size(); ++a)
        if (row[a] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    return best;
}

} // namespace

int choose_action_values(const BehaviorPolicy& b, std::span<const double> q_row,
                         std::uint64_t t, Rng& rng) {
    const auto n_actions = static_cast<std::uint32_t>(q_row.size());
    return std::visit(
        [&](const auto& p) -> int {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, EpsilonGreedy>) {
                double u = rng.uniform01();
                if (u < epsilon_at(p, t))
                    return static_cast<int>(rng.uniform_int(n_actions));
                return argmax_span(q_row);
            } else if constexpr (std::is_same_v<T, SoftmaxPolicy>) {
                const double temp = temperature_at(p, t);
                std::vector<double> probs(q_row.size());
                double hi = q_row[static_cast<std::size_t>(argmax_span(q_row))];
                double z = 0.0;
                for (std::size_t a = 0; a < q_row.size(); ++a) {
                    double w = std::exp((q_row[a] - hi) / temp);
                    probs[a] = w;
                    z += w;
                }
                for (double& w : probs) w /= z;
                return static_cast<int>(rng.categorical(probs));
            } else {
                return static_cast<int>(rng.uniform_int(n_actions));
            }
        },
        b);
}

int choose_action(const BehaviorPolicy& b, const QTable& q, int s,
                  std::uint64_t t, Rng& rng) {
    std::span<const double> row(
        q.v.data() + static_cast<std::size_t>(s) *
                         static_cast<std::size_t>(q.n_actions),
        static_cast<std::size_t>(q.n_actions));
    return choose_action_values(b, row, t, rng);
}

} // namespace qconv
