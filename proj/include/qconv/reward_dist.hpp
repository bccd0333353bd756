#pragma once

#include <string>
#include <variant>

#include "qconv/rng.hpp"

namespace qconv {

// Reward distribution menu. Every family exposes closed-form first and second
// raw moments so bound checks never rely on sampling. All families have a
// finite second moment; StudentT only qualifies for dof > 2 and is rejected
// otherwise.
struct Gaussian {
    double mean;
    double stddev;
};
struct Uniform {
    double lo;
    double hi;
};
struct StudentT {
    double dof;
    double loc;
    double scale;
};
struct ShiftedExponential {
    double rate;
    double shift;
};
struct PointMass {
    double value;
};

using RewardDist =
    std::variant<Gaussian, Uniform, StudentT, ShiftedExponential, PointMass>;

struct Moments {
    double mean;
    double second; // raw second moment E[X^2]
};

// Throws InvalidDistribution when parameters violate the family's invariants.
void validate_dist(const RewardDist& dist);

Moments reward_moments(const RewardDist& dist);

double sample_reward(const RewardDist& dist, Rng& rng);

std::string family_name(const RewardDist& dist);

} // namespace qconv
