#include "qconv/mdp.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qconv/errors.hpp"

namespace qconv {
namespace {

constexpr double kRowSumTol = 1e-12;

void check_known_keys(const nlohmann::json& j,
                      const std::set<std::string>& allowed,
                      const std::string& where) {
    for (const auto& item : j.items()) {
        if (allowed.count(item.key()) == 0)
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

double get_num(const nlohmann::json& j, const std::string& key,
               const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError("missing or non-numeric '" + key + "' in " + where);
    return j[key].get<double>();
}

} // namespace

ValidatedMdp validate_mdp(const MdpSpec& spec) {
    if (spec.n_states < 1 || spec.n_actions < 1)
        throw ConfigError("MDP needs at least one state and one action");
    if (!(spec.gamma > 0.0) || !(spec.gamma < 1.0))
        throw BadGamma("gamma must lie strictly inside (0, 1)");
    const std::size_t n_cells =
        static_cast<std::size_t>(spec.n_states) * static_cast<std::size_t>(spec.n_actions);
    if (spec.trans.size() != n_cells || spec.rewards.size() != n_cells)
        throw ConfigError("trans/rewards size does not match n_states * n_actions");

    ValidatedMdp out;
    out.spec_ = spec;
    out.moments_.reserve(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        const auto& row = spec.trans[c];
        if (row.size() != static_cast<std::size_t>(spec.n_states))
            throw ConfigError("transition row has wrong length");
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw NonStochasticRow("transition probabilities must be nonnegative");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > kRowSumTol)
            throw NonStochasticRow("transition row sums to " + std::to_string(sum));
        validate_dist(spec.rewards[c]);
        out.moments_.push_back(reward_moments(spec.rewards[c]));
    }
    out.c_r_ = 0.0;
    for (const auto& m : out.moments_) out.c_r_ = std::max(out.c_r_, m.second);

    out.sink_.assign(static_cast<std::size_t>(spec.n_states), false);
    for (int s = 0; s < spec.n_states; ++s) {
        bool sink = true;
        for (int a = 0; a < spec.n_actions && sink; ++a) {
            const auto& row = spec.trans[static_cast<std::size_t>(spec.cell(s, a))];
            if (std::fabs(row[static_cast<std::size_t>(s)] - 1.0) > kRowSumTol) sink = false;
            const auto* pm = std::get_if<PointMass>(
                &spec.rewards[static_cast<std::size_t>(spec.cell(s, a))]);
            if (pm == nullptr || pm->value != 0.0) sink = false;
        }
        out.sink_[static_cast<std::size_t>(s)] = sink;
    }
    return out;
}

double compute_cr(const ValidatedMdp& mdp) { return mdp.c_r(); }

Transition ValidatedMdp::sample_transition(int s, int a, Rng& rng) const {
    if (s < 0 || s >= spec_.n_states || a < 0 || a >= spec_.n_actions)
        throw IndexOutOfRange("sample_transition: state or action out of range");
    double r = sample_reward(reward_dist(s, a), rng);
    std::size_t next = rng.categorical(trans_row(s, a));
    return {r, static_cast<int>(next)};
}

namespace {

RewardDist reward_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError("reward must be an object with a 'family' in " + where);
    const std::string fam = j["family"].get<std::string>();
    if (fam == "gaussian") {
        check_known_keys(j, {"family", "mean", "stddev"}, where);
        return Gaussian{get_num(j, "mean", where), get_num(j, "stddev", where)};
    }
    if (fam == "uniform") {
        check_known_keys(j, {"family", "lo", "hi"}, where);
        return Uniform{get_num(j, "lo", where), get_num(j, "hi", where)};
    }
    if (fam == "student_t") {
        check_known_keys(j, {"family", "dof", "loc", "scale"}, where);
        return StudentT{get_num(j, "dof", where), get_num(j, "loc", where),
                        get_num(j, "scale", where)};
    }
    if (fam == "shifted_exponential") {
        check_known_keys(j, {"family", "rate", "shift"}, where);
        return ShiftedExponential{get_num(j, "rate", where), get_num(j, "shift", where)};
    }
    if (fam == "point_mass") {
        check_known_keys(j, {"family", "value"}, where);
        return PointMass{get_num(j, "value", where)};
    }
    throw ConfigError("unknown reward family '" + fam + "' in " + where);
}

nlohmann::json reward_to_json(const RewardDist& d) {
    nlohmann::json j;
    j["family"] = family_name(d);
    std::visit(
        [&j](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                j["mean"] = v.mean;
                j["stddev"] = v.stddev;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                j["lo"] = v.lo;
                j["hi"] = v.hi;
            } else if constexpr (std::is_same_v<T, StudentT>) {
                j["dof"] = v.dof;
                j["loc"] = v.loc;
                j["scale"] = v.scale;
            } else if constexpr (std::is_same_v<T, ShiftedExponential>) {
                j["rate"] = v.rate;
                j["shift"] = v.shift;
            } else {
                j["value"] = v.value;
            }
        },
        d);
    return j;
}

} // namespace

MdpSpec mdp_from_json(const nlohmann::json& j) {
    check_known_keys(j, {"n_states", "n_actions", "gamma", "cells"}, "mdp");
    MdpSpec spec;
    spec.n_states = static_cast<int>(get_num(j, "n_states", "mdp"));
    spec.n_actions = static_cast<int>(get_num(j, "n_actions", "mdp"));
    spec.gamma = get_num(j, "gamma", "mdp");
    if (spec.n_states < 1 || spec.n_actions < 1)
        throw ConfigError("mdp: n_states and n_actions must be >= 1");
    const std::size_t n_cells =
        static_cast<std::size_t>(spec.n_states) * static_cast<std::size_t>(spec.n_actions);
    spec.trans.assign(n_cells, {});
    spec.rewards.assign(n_cells, PointMass{0.0});
    std::vector<bool> seen(n_cells, false);
    if (!j.contains("cells") || !j["cells"].is_array())
        throw ConfigError("mdp: 'cells' array is required");
    for (const auto& cj : j["cells"]) {
        check_known_keys(cj, {"s", "a", "trans", "reward"}, "mdp cell");
        int s = static_cast<int>(get_num(cj, "s", "mdp cell"));
        int a = static_cast<int>(get_num(cj, "a", "mdp cell"));
        if (s < 0 || s >= spec.n_states || a < 0 || a >= spec.n_actions)
            throw ConfigError("mdp cell index out of range");
        std::size_t c = static_cast<std::size_t>(spec.cell(s, a));
        if (seen[c]) throw ConfigError("duplicate mdp cell");
        seen[c] = true;
        if (!cj.contains("trans") || !cj["trans"].is_array())
            throw ConfigError("mdp cell: 'trans' array is required");
        spec.trans[c] = cj["trans"].get<std::vector<double>>();
        spec.rewards[c] = reward_from_json(cj.at("reward"), "mdp cell");
    }
    for (std::size_t c = 0; c < n_cells; ++c)
        if (!seen[c]) throw ConfigError("mdp: missing cell definition");
    return spec;
}

nlohmann::json mdp_to_json(const MdpSpec& spec) {
    nlohmann::json j;
    j["n_states"] = spec.n_states;
    j["n_actions"] = spec.n_actions;
    j["gamma"] = spec.gamma;
    j["cells"] = nlohmann::json::array();
    for (int s = 0; s < spec.n_states; ++s) {
        for (int a = 0; a < spec.n_actions; ++a) {
            nlohmann::json cj;
            cj["s"] = s;
            cj["a"] = a;
            cj["trans"] = spec.trans[static_cast<std::size_t>(spec.cell(s, a))];
            cj["reward"] = reward_to_json(spec.rewards[static_cast<std::size_t>(spec.cell(s, a))]);
            j["cells"].push_back(cj);
        }
    }
    return j;
}

MdpSpec load_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open MDP file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return mdp_from_json(j);
}

MdpSpec generate_mdp(int n_states, int n_actions, const RewardGen& gen,
                     std::uint64_t seed) {
    if (n_states < 1 || n_actions < 1)
        throw ConfigError("generate_mdp: sizes must be >= 1");
    Rng rng(splitmix64(seed = seed ^ 0x7131D1A0ABB04E5BULL));
    MdpSpec spec;
    spec.n_states = n_states;
    spec.n_actions = n_actions;
    spec.gamma = 0.9;
    const std::size_t n_cells =
        static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions);
    spec.trans.reserve(n_cells);
    spec.rewards.reserve(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        // Dirichlet(1,...,1) row: normalized Exp(1) draws.
        std::vector<double> row(static_cast<std::size_t>(n_states));
        double sum = 0.0;
        for (double& p : row) {
            p = rng.exponential(1.0);
            sum += p;
        }
        for (double& p : row) p /= sum;
        spec.trans.push_back(std::move(row));

        double loc = rng.uniform(-1.0, 1.0);
        if (gen.family == "gaussian") {
            spec.rewards.emplace_back(Gaussian{loc, gen.sigma});
        } else if (gen.family == "uniform") {
            spec.rewards.emplace_back(Uniform{loc - gen.halfwidth, loc + gen.halfwidth});
        } else if (gen.family == "student_t") {
            spec.rewards.emplace_back(StudentT{gen.dof, loc, gen.scale});
        } else if (gen.family == "shifted_exponential") {
            spec.rewards.emplace_back(ShiftedExponential{gen.rate, loc - 1.0 / gen.rate});
        } else if (gen.family == "point_mass") {
            spec.rewards.emplace_back(PointMass{loc});
        } else {
            throw ConfigError("generate_mdp: unknown reward family '" + gen.family + "'");
        }
    }
    return spec;
}

} // namespace qconv
