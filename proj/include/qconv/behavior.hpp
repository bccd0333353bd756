#pragma once

#include <cstdint>
#include <variant>

#include "qconv/qtable.hpp"
#include "qconv/rng.hpp"

namespace qconv {

enum class Decay { None, InvSqrtT };

// Exploration policies generating (s_t, a_t). With InvSqrtT decay the
// epsilon-greedy policy is GLIE: eps_t = max(eps_min, eps0 / sqrt(t+1)).
struct EpsilonGreedy {
    double eps0 = 0.1;
    double eps_min = 0.0;
    Decay decay = Decay::None;
};

struct SoftmaxPolicy {
    double temperature = 1.0;
    double temp_min = 1e-3;
    Decay decay = Decay::None;
};

struct UniformRandomPolicy {};

using BehaviorPolicy =
    std::variant<EpsilonGreedy, SoftmaxPolicy, UniformRandomPolicy>;

void validate_behavior(const BehaviorPolicy& b);

double epsilon_at(const EpsilonGreedy& e, std::uint64_t t);
double temperature_at(const SoftmaxPolicy& sm, std::uint64_t t);

// Acts on the Q values of one state (one entry per action). Greedy choices
// break ties toward the lowest action index.
int choose_action_values(const BehaviorPolicy& b, std::span<const double> q_row,
                         std::uint64_t t, Rng& rng);

int choose_action(const BehaviorPolicy& b, const QTable& q, int s,
                  std::uint64_t t, Rng& rng);

} // namespace qconv
