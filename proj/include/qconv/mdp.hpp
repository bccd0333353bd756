#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qconv/reward_dist.hpp"
#include "qconv/rng.hpp"

namespace qconv {

// Plain description of a finite MDP: row-stochastic transition table, one
// reward distribution per (s, a) cell, discount strictly inside (0, 1).
// Rewards are independent of the next state and i.i.d. across time.
struct MdpSpec {
    int n_states = 0;
    int n_actions = 0;
    double gamma = 0.0;
    // cell (s, a) at index s * n_actions + a; each row has n_states entries.
    std::vector<std::vector<double>> trans;
    std::vector<RewardDist> rewards;

    int cell(int s, int a) const { return s * n_actions + a; }
};

struct Transition {
    double reward;
    int next_state;
};

// Sealed, immutable MDP handle produced by validate_mdp. Safe to share across
// concurrent runs; every run owns its private Rng.
class ValidatedMdp {
public:
    const MdpSpec& spec() const { return spec_; }
    int n_states() const { return spec_.n_states; }
    int n_actions() const { return spec_.n_actions; }
    double gamma() const { return spec_.gamma; }

    const std::vector<double>& trans_row(int s, int a) const {
        return spec_.trans[static_cast<std::size_t>(spec_.cell(s, a))];
    }
    const RewardDist& reward_dist(int s, int a) const {
        return spec_.rewards[static_cast<std::size_t>(spec_.cell(s, a))];
    }
    double mean_reward(int s, int a) const {
        return moments_[static_cast<std::size_t>(spec_.cell(s, a))].mean;
    }
    double second_moment(int s, int a) const {
        return moments_[static_cast<std::size_t>(spec_.cell(s, a))].second;
    }

    // max over cells of E[r(s,a)^2]; the uniform second-moment bound C_R.
    double c_r() const { return c_r_; }

    // Absorbing zero-reward sink: every action self-loops with probability one
    // and pays PointMass(0). Learners restart uniformly from such states.
    bool is_absorbing_sink(int s) const {
        return sink_[static_cast<std::size_t>(s)];
    }

    // Draws reward first, then next state (independent draws, fixed order).
    Transition sample_transition(int s, int a, Rng& rng) const;

private:
    friend ValidatedMdp validate_mdp(const MdpSpec& spec);
    MdpSpec spec_;
    std::vector<Moments> moments_;
    std::vector<bool> sink_;
    double c_r_ = 0.0;
};

// Checks all invariants and seals the spec. Throws InvalidDistribution,
// NonStochasticRow, BadGamma or ConfigError (dimension problems).
ValidatedMdp validate_mdp(const MdpSpec& spec);

double compute_cr(const ValidatedMdp& mdp);

// JSON codec. The schema is documented in docs/formats.md; unknown keys are
// rejected everywhere.
MdpSpec mdp_from_json(const nlohmann::json& j);
nlohmann::json mdp_to_json(const MdpSpec& spec);
MdpSpec load_mdp_file(const std::string& path);

// Random benchmark instance: Dirichlet(1) transition rows, reward location
// Uniform(-1, 1) per cell, family-specific noise parameters.
struct RewardGen {
    std::string family = "gaussian"; // gaussian|uniform|student_t|shifted_exponential|point_mass
    double sigma = 1.0;              // gaussian stddev
    double halfwidth = 1.0;          // uniform half-width around the location
    double dof = 3.0;                // student_t
    double scale = 1.0;              // student_t
    double rate = 1.0;               // shifted_exponential
};

MdpSpec generate_mdp(int n_states, int n_actions, const RewardGen& gen,
                     std::uint64_t seed);

} // namespace qconv
