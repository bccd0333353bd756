#include "qconv/reward_dist.hpp"

#include <cmath>

#include "qconv/errors.hpp"

namespace qconv {
namespace {

struct Validator {
    void operator()(const Gaussian& g) const {
        if (!(g.stddev > 0.0) || !std::isfinite(g.stddev) || !std::isfinite(g.mean))
            throw InvalidDistribution("Gaussian requires finite mean and stddev > 0");
    }
    void operator()(const Uniform& u) const {
        if (!(u.hi > u.lo) || !std::isfinite(u.lo) || !std::isfinite(u.hi))
            throw InvalidDistribution("Uniform requires finite lo < hi");
    }
    void operator()(const StudentT& t) const {
        if (!(t.dof > 2.0))
            throw InvalidDistribution(
                "StudentT requires dof > 2 (otherwise E[r^2] is infinite)");
        if (!(t.scale > 0.0) || !std::isfinite(t.loc) || !std::isfinite(t.scale))
            throw InvalidDistribution("StudentT requires finite loc and scale > 0");
    }
    void operator()(const ShiftedExponential& e) const {
        if (!(e.rate > 0.0) || !std::isfinite(e.rate) || !std::isfinite(e.shift))
            throw InvalidDistribution("ShiftedExponential requires rate > 0");
    }
    void operator()(const PointMass& p) const {
        if (!std::isfinite(p.value))
            throw InvalidDistribution("PointMass requires a finite value");
    }
};

struct MomentVisitor {
    Moments operator()(const Gaussian& g) const {
        return {g.mean, g.mean * g.mean + g.stddev * g.stddev};
    }
    Moments operator()(const Uniform& u) const {
        double mean = 0.5 * (u.lo + u.hi);
        double second = (u.lo * u.lo + u.lo * u.hi + u.hi * u.hi) / 3.0;
        return {mean, second};
    }
    Moments operator()(const StudentT& t) const {
        double var = t.scale * t.scale * t.dof / (t.dof - 2.0);
        return {t.loc, t.loc * t.loc + var};
    }
    Moments operator()(const ShiftedExponential& e) const {
        double mean = e.shift + 1.0 / e.rate;
        double var = 1.0 / (e.rate * e.rate);
        return {mean, var + mean * mean};
    }
    Moments operator()(const PointMass& p) const {
        return {p.value, p.value * p.value};
    }
};

} // namespace

void validate_dist(const RewardDist& dist) { std::visit(Validator{}, dist); }

Moments reward_moments(const RewardDist& dist) {
    return std::visit(MomentVisitor{}, dist);
}

double sample_reward(const RewardDist& dist, Rng& rng) {
    return std::visit(
        [&rng](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return rng.normal(d.mean, d.stddev);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return rng.uniform(d.lo, d.hi);
            } else if constexpr (std::is_same_v<T, StudentT>) {
                return d.loc + d.scale * rng.student_t(d.dof);
            } else if constexpr (std::is_same_v<T, ShiftedExponential>) {
                return d.shift + rng.exponential(d.rate);
            } else {
                return d.value;
            }
        },
        dist);
}

std::string family_name(const RewardDist& dist) {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gaussian>) return "gaussian";
            else if constexpr (std::is_same_v<T, Uniform>) return "uniform";
            else if constexpr (std::is_same_v<T, StudentT>) return "student_t";
            else if constexpr (std::is_same_v<T, ShiftedExponential>) return "shifted_exponential";
            else return "point_mass";
        },
        dist);
}

} // namespace qconv
