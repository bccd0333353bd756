#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "qconv/behavior.hpp"
#include "qconv/learn.hpp"
#include "qconv/manifest.hpp"
#include "qconv/mdp.hpp"
#include "qconv/schedule.hpp"

namespace qconv {

// JSON codecs for the pieces experiment configs are made of (schemas in
// docs/formats.md; unknown keys rejected).
StepSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const StepSchedule& s);
BehaviorPolicy behavior_from_json(const nlohmann::json& j);
nlohmann::json behavior_to_json(const BehaviorPolicy& b);
LearnConfig learn_from_json(const nlohmann::json& j);
nlohmann::json learn_to_json(const LearnConfig& cfg);

// Resolves exactly one of "mdp" (inline), "mdp_file" (path) or "generator"
// ({n_states, n_actions, reward{...}, seed, gamma?}).
ValidatedMdp resolve_mdp(const nlohmann::json& config);

struct CliOverrides {
    std::optional<std::uint64_t> seed; // replaces the config's seed list
    std::optional<std::string> out;    // output directory
    int parallel = 1;                  // concurrent replicas
};

// Runs one subcommand (solve, qlearn, sarsa, decompose, bounds, lemmas,
// ripple, pgcheck, report) end to end: reads the config, executes every seed
// (optionally in parallel), writes all artifacts plus manifest.json into the
// output directory. Returns 0 iff every invariant check embedded in the
// selected diagnostics passed. Per-seed failures are recorded in the manifest
// without aborting sibling runs.
int run_experiment(const std::string& subcommand, const std::string& config_path,
                   const CliOverrides& overrides,
                   RunManifest* manifest_out = nullptr);

// The pgcheck case set, exposed for the acceptance suite.
struct PgCheckParams {
    int n_theta = 20;
    double h = 1e-5;
    std::uint64_t n_samples = 10'000;
    std::uint64_t seed = 1;
    double tol = 1e-4;
};

struct PgCheckOutcome {
    double max_rel_err = 0.0;      // analytic vs FD over all theta draws
    int total_jittered = 0;
    // full per-parameter report for the worst theta draw
    nlohmann::json worst_report;
    double additive_max_dev = 0.0; // distributional vs deterministic, additive noise
    bool additive_ok = false;
    double mixing_max_excess = 0.0; // max over coords of |mc - oracle| - 3 SE
    bool mixing_ok = false;
    double lip_bound = 0.0;
    double lip_empirical = 0.0;
    bool lip_ok = false;
    bool pass = false;

    nlohmann::json to_json() const;
};

PgCheckOutcome run_pgcheck(const PgCheckParams& params);

} // namespace qconv
