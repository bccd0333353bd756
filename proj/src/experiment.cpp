#include "qconv/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "qconv/csvio.hpp"
#include "qconv/diagnostics.hpp"
#include "qconv/errors.hpp"
#include "qconv/pg.hpp"
#include "qconv/quadrature.hpp"
#include "qconv/recurrences.hpp"
#include "qconv/ripple.hpp"
#include "qconv/solver.hpp"
#include "qconv/svgplot.hpp"
#include "qconv/version.hpp"

namespace qconv {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

bool log_enabled() {
    const char* lvl = std::getenv("QCONV_LOG");
    return lvl == nullptr || std::string(lvl) != "quiet";
}

void log_info(const std::string& msg) {
    if (log_enabled()) std::cerr << "[qconv] " << msg << '\n';
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& item : j.items())
        if (allowed.count(item.key()) == 0)
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

double num_or(const json& j, const std::string& key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) throw ConfigError("'" + key + "' must be numeric");
    return j[key].get<double>();
}

std::uint64_t uint_or(const json& j, const std::string& key, std::uint64_t dflt) {
    if (!j.contains(key)) return dflt;
    return j[key].get<std::uint64_t>();
}

std::string str_or(const json& j, const std::string& key, const std::string& dflt) {
    if (!j.contains(key)) return dflt;
    return j[key].get<std::string>();
}

Decay decay_from_string(const std::string& s) {
    if (s == "none") return Decay::None;
    if (s == "inv_sqrt_t") return Decay::InvSqrtT;
    throw ConfigError("unknown decay '" + s + "'");
}

const char* decay_to_string(Decay d) {
    return d == Decay::None ? "none" : "inv_sqrt_t";
}

} // namespace

StepSchedule schedule_from_json(const json& j) {
    const std::string family = str_or(j, "family", "visit_harmonic");
    if (family == "visit_harmonic") {
        check_keys(j, {"family", "c0"}, "schedule");
        return VisitHarmonic{num_or(j, "c0", 1.0)};
    }
    if (family == "global_polynomial") {
        check_keys(j, {"family", "c0", "p"}, "schedule");
        return GlobalPolynomial{num_or(j, "c0", 1.0), num_or(j, "p", 1.0)};
    }
    if (family == "constant") {
        check_keys(j, {"family", "c0"}, "schedule");
        return ConstantStep{num_or(j, "c0", 0.5)};
    }
    throw ConfigError("unknown schedule family '" + family + "'");
}

json schedule_to_json(const StepSchedule& s) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, VisitHarmonic>)
                return {{"family", "visit_harmonic"}, {"c0", v.c0}};
            else if constexpr (std::is_same_v<T, GlobalPolynomial>)
                return {{"family", "global_polynomial"}, {"c0", v.c0}, {"p", v.p}};
            else
                return {{"family", "constant"}, {"c0", v.c0}};
        },
        s);
}

BehaviorPolicy behavior_from_json(const json& j) {
    const std::string kind = str_or(j, "kind", "epsilon_greedy");
    if (kind == "epsilon_greedy") {
        check_keys(j, {"kind", "eps0", "eps_min", "decay"}, "behavior");
        return EpsilonGreedy{num_or(j, "eps0", 0.1), num_or(j, "eps_min", 0.0),
                             decay_from_string(str_or(j, "decay", "none"))};
    }
    if (kind == "softmax") {
        check_keys(j, {"kind", "temperature", "temp_min", "decay"}, "behavior");
        return SoftmaxPolicy{num_or(j, "temperature", 1.0),
                             num_or(j, "temp_min", 1e-3),
                             decay_from_string(str_or(j, "decay", "none"))};
    }
    if (kind == "uniform") {
        check_keys(j, {"kind"}, "behavior");
        return UniformRandomPolicy{};
    }
    throw ConfigError("unknown behavior kind '" + kind + "'");
}

json behavior_to_json(const BehaviorPolicy& b) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, EpsilonGreedy>)
                return {{"kind", "epsilon_greedy"},
                        {"eps0", v.eps0},
                        {"eps_min", v.eps_min},
                        {"decay", decay_to_string(v.decay)}};
            else if constexpr (std::is_same_v<T, SoftmaxPolicy>)
                return {{"kind", "softmax"},
                        {"temperature", v.temperature},
                        {"temp_min", v.temp_min},
                        {"decay", decay_to_string(v.decay)}};
            else
                return {{"kind", "uniform"}};
        },
        b);
}

LearnConfig learn_from_json(const json& j) {
    check_keys(j, {"schedule", "behavior", "horizon", "q_init", "record_every"},
               "learn");
    LearnConfig cfg;
    if (j.contains("schedule")) cfg.schedule = schedule_from_json(j["schedule"]);
    if (j.contains("behavior")) cfg.behavior = behavior_from_json(j["behavior"]);
    cfg.horizon = uint_or(j, "horizon", cfg.horizon);
    cfg.q_init = num_or(j, "q_init", cfg.q_init);
    cfg.record_every = uint_or(j, "record_every", cfg.record_every);
    validate_learn_config(cfg);
    return cfg;
}

json learn_to_json(const LearnConfig& cfg) {
    return {{"schedule", schedule_to_json(cfg.schedule)},
            {"behavior", behavior_to_json(cfg.behavior)},
            {"horizon", cfg.horizon},
            {"q_init", cfg.q_init},
            {"record_every", cfg.record_every}};
}

ValidatedMdp resolve_mdp(const json& config) {
    int sources = 0;
    for (const char* key : {"mdp", "mdp_file", "generator"})
        if (config.contains(key)) ++sources;
    if (sources != 1)
        throw ConfigError("config needs exactly one of mdp, mdp_file, generator");
    if (config.contains("mdp")) return validate_mdp(mdp_from_json(config["mdp"]));
    if (config.contains("mdp_file"))
        return validate_mdp(load_mdp_file(config["mdp_file"].get<std::string>()));

    const json& g = config["generator"];
    check_keys(g, {"n_states", "n_actions", "reward", "seed", "gamma"}, "generator");
    RewardGen gen;
    if (g.contains("reward")) {
        const json& r = g["reward"];
        check_keys(r, {"family", "sigma", "halfwidth", "dof", "scale", "rate"},
                   "generator reward");
        gen.family = str_or(r, "family", gen.family);
        gen.sigma = num_or(r, "sigma", gen.sigma);
        gen.halfwidth = num_or(r, "halfwidth", gen.halfwidth);
        gen.dof = num_or(r, "dof", gen.dof);
        gen.scale = num_or(r, "scale", gen.scale);
        gen.rate = num_or(r, "rate", gen.rate);
    }
    MdpSpec spec = generate_mdp(static_cast<int>(num_or(g, "n_states", 5)),
                                static_cast<int>(num_or(g, "n_actions", 3)), gen,
                                uint_or(g, "seed", 0));
    spec.gamma = num_or(g, "gamma", spec.gamma);
    return validate_mdp(spec);
}

namespace {

// ---------------------------------------------------------------------------
// shared runner machinery

struct Session {
    fs::path out_dir;
    RunManifest manifest;
    std::mutex mu;

    explicit Session(const std::string& dir) : out_dir(dir) {
        fs::create_directories(out_dir);
    }

    std::string path(const std::string& name) const {
        return (out_dir / name).string();
    }

    void add_file(const std::string& name) {
        std::lock_guard<std::mutex> lock(mu);
        manifest.files.push_back(name);
    }
    void add_note(const std::string& note) {
        std::lock_guard<std::mutex> lock(mu);
        manifest.notes.push_back(note);
        manifest.checks_passed = false;
    }
    void fail_check(const std::string& why) { add_note(why); }
};

void parallel_over(std::size_t n, int parallel,
                   const std::function<void(std::size_t)>& fn) {
    if (parallel <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(parallel), n);
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

std::vector<std::uint64_t> seed_list(const json& config, const CliOverrides& ov) {
    if (ov.seed) return {*ov.seed};
    if (config.contains("seeds")) {
        auto seeds = config["seeds"].get<std::vector<std::uint64_t>>();
        if (seeds.empty()) throw ConfigError("seed list must be nonempty");
        return seeds;
    }
    return {0};
}

void write_learn_csv(const std::string& path, const RunDiagnostics& diag) {
    CsvWriter csv(path, {"t", "sup_error", "L_t", "Lprime_t", "min_visits",
                         "max_visits"});
    for (const auto& row : diag.rows)
        csv.write_raw_row({std::to_string(row.t), format_double(row.sup_error),
                           format_double(row.l_t), format_double(row.lprime_t),
                           std::to_string(row.min_visits),
                           std::to_string(row.max_visits)});
}

bool learn_invariants_ok(const RunDiagnostics& diag, std::string& why) {
    if (diag.aborted_nonfinite) {
        why = "run aborted on a non-finite Q value";
        return false;
    }
    for (const auto& row : diag.rows)
        if (row.lprime_t > 2.0 * row.l_t + 1e-12) {
            why = "range bound L' <= 2L violated at t=" + std::to_string(row.t);
            return false;
        }
    std::uint64_t total = 0;
    for (std::uint64_t v : diag.visits) total += v;
    if (total != diag.steps) {
        why = "visit counts do not sum to the step count";
        return false;
    }
    return true;
}

json summary_json(std::uint64_t seed, const RunDiagnostics& diag, double wall,
                  const json& config_echo) {
    return {{"seed", seed},
            {"initial_sup_error", diag.initial_sup_error},
            {"final_sup_error", diag.final_sup_error},
            {"steps", diag.steps},
            {"aborted_nonfinite", diag.aborted_nonfinite},
            {"wall_seconds", wall},
            {"config", config_echo}};
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
}

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_solve(const json& config, Session& session) {
    check_keys(config, {"mdp", "mdp_file", "generator", "tol", "out"}, "solve config");
    ValidatedMdp mdp = resolve_mdp(config);
    double tol = num_or(config, "tol", 1e-8);
    SolveResult result = value_iterate(mdp, tol);
    PolicyTable pi = greedy_policy(result.qstar);

    json out;
    out["iterations"] = result.iterations;
    out["gamma"] = mdp.gamma();
    out["tol"] = tol;
    out["qstar"] = json::array();
    out["policy"] = json::array();
    for (int s = 0; s < mdp.n_states(); ++s) {
        json row = json::array();
        for (int a = 0; a < mdp.n_actions(); ++a) row.push_back(result.qstar.at(s, a));
        out["qstar"].push_back(row);
        out["policy"].push_back(result.qstar.argmax_row(s));
    }
    save_json(session.path("solve.json"), out);
    session.add_file("solve.json");
    std::cout << out.dump(2) << std::endl;
    return 0;
}

int cmd_learn(const json& config, Session& session, const CliOverrides& ov,
              bool sarsa) {
    const char* name = sarsa ? "sarsa" : "qlearn";
    check_keys(config,
               {"mdp", "mdp_file", "generator", "learn", "seeds", "solve_tol", "out"},
               std::string(name) + " config");
    ValidatedMdp mdp = resolve_mdp(config);
    LearnConfig base = config.contains("learn") ? learn_from_json(config["learn"])
                                                : LearnConfig{};
    SolveResult solved = value_iterate(mdp, num_or(config, "solve_tol", 1e-8));
    auto seeds = seed_list(config, ov);
    session.manifest.seeds = seeds;
    session.manifest.wall_seconds.assign(seeds.size(), 0.0);

    parallel_over(seeds.size(), ov.parallel, [&](std::size_t i) {
        auto t0 = std::chrono::steady_clock::now();
        LearnConfig cfg = base;
        cfg.seed = seeds[i];
        try {
            RunDiagnostics diag = sarsa ? sarsa_run(mdp, solved.qstar, cfg)
                                        : q_learning_run(mdp, solved.qstar, cfg);
            std::string csv_name =
                std::string(name) + "_seed" + std::to_string(seeds[i]) + ".csv";
            write_learn_csv(session.path(csv_name), diag);
            session.add_file(csv_name);
            std::string sum_name = std::string(name) + "_summary_seed" +
                                   std::to_string(seeds[i]) + ".json";
            double wall = wall_since(t0);
            save_json(session.path(sum_name),
                      summary_json(seeds[i], diag, wall, learn_to_json(cfg)));
            session.add_file(sum_name);
            session.manifest.wall_seconds[i] = wall;
            std::string why;
            if (!learn_invariants_ok(diag, why))
                session.fail_check("seed " + std::to_string(seeds[i]) + ": " + why);
        } catch (const std::exception& e) {
            session.fail_check("seed " + std::to_string(seeds[i]) +
                               " failed: " + e.what());
        }
    });
    return session.manifest.checks_passed ? 0 : 1;
}

int cmd_decompose(const json& config, Session& session, const CliOverrides& ov) {
    check_keys(config,
               {"mdp", "mdp_file", "generator", "learn", "seeds", "solve_tol", "out"},
               "decompose config");
    ValidatedMdp mdp = resolve_mdp(config);
    LearnConfig base = config.contains("learn") ? learn_from_json(config["learn"])
                                                : LearnConfig{};
    SolveResult solved = value_iterate(mdp, num_or(config, "solve_tol", 1e-8));
    auto seeds = seed_list(config, ov);
    session.manifest.seeds = seeds;
    session.manifest.wall_seconds.assign(seeds.size(), 0.0);

    parallel_over(seeds.size(), ov.parallel, [&](std::size_t i) {
        auto t0 = std::chrono::steady_clock::now();
        LearnConfig cfg = base;
        cfg.seed = seeds[i];
        try {
            DecompositionTrace trace = decompose_run(mdp, solved.qstar, cfg);
            std::string csv_name =
                "decompose_seed" + std::to_string(seeds[i]) + ".csv";
            CsvWriter csv(session.path(csv_name),
                          {"t", "w_norm", "delta_norm", "err_norm", "noise_sum"});
            for (std::size_t r = 0; r < trace.ts.size(); ++r)
                csv.write_raw_row({std::to_string(trace.ts[r]),
                                   format_double(trace.w_norm[r]),
                                   format_double(trace.delta_norm[r]),
                                   format_double(trace.err_norm[r]),
                                   format_double(trace.noise_sum_series[r])});
            csv.close();
            session.add_file(csv_name);

            double wall = wall_since(t0);
            session.manifest.wall_seconds[i] = wall;
            json summary = summary_json(seeds[i], trace.run, wall, learn_to_json(cfg));
            summary["max_identity_gap"] = trace.max_identity_gap;
            summary["max_contraction_gap"] = trace.max_contraction_gap;
            summary["peak_w_norm"] = trace.peak_w_norm;
            summary["final_w_norm"] = trace.final_w_norm;
            std::string sum_name =
                "decompose_summary_seed" + std::to_string(seeds[i]) + ".json";
            save_json(session.path(sum_name), summary);
            session.add_file(sum_name);

            std::string why;
            if (!learn_invariants_ok(trace.run, why))
                session.fail_check("seed " + std::to_string(seeds[i]) + ": " + why);
            if (trace.max_identity_gap > 1e-9)
                session.fail_check("seed " + std::to_string(seeds[i]) +
                                   ": decomposition identity gap above 1e-9");
            if (trace.max_contraction_gap > 1e-9)
                session.fail_check("seed " + std::to_string(seeds[i]) +
                                   ": contraction step gap above 1e-9");
        } catch (const std::exception& e) {
            session.fail_check("seed " + std::to_string(seeds[i]) +
                               " failed: " + e.what());
        }
    });
    return session.manifest.checks_passed ? 0 : 1;
}

int cmd_bounds(const json& config, Session& session, const CliOverrides& ov) {
    check_keys(config,
               {"mdp", "mdp_file", "generator", "learn", "seeds", "n_runs", "k0",
                "out"},
               "bounds config");
    ValidatedMdp mdp = resolve_mdp(config);
    LearnConfig base = config.contains("learn") ? learn_from_json(config["learn"])
                                                : LearnConfig{};
    int n_runs = static_cast<int>(num_or(config, "n_runs", 100));
    double k0 = num_or(config, "k0", 1.0);
    QTable qstar = value_iterate(mdp, 1e-8).qstar;
    auto seeds = seed_list(config, ov);
    session.manifest.seeds = seeds;
    session.manifest.wall_seconds.assign(seeds.size(), 0.0);

    parallel_over(seeds.size(), ov.parallel, [&](std::size_t i) {
        auto t0 = std::chrono::steady_clock::now();
        LearnConfig cfg = base;
        cfg.seed = seeds[i];
        try {
            MomentReport report = lt_moment_check(mdp, cfg, n_runs, k0);
            DecompositionTrace trace = decompose_run(mdp, qstar, cfg);
            NoiseSummabilityResult noise =
                noise_summability_check(trace, cfg.schedule, k0);
            KtTrace kt = kt_sequence(
                k0, envelope_sequence(cfg.schedule, cfg.horizon), mdp.gamma());

            json out;
            out["seed"] = seeds[i];
            out["moment_report"] = {{"t", report.ts},
                                    {"empirical", json::array()},
                                    {"mean", report.mean_l2},
                                    {"se", report.se_l2},
                                    {"bound", report.bound},
                                    {"verdict", report.pass ? "pass" : "fail"},
                                    {"k0", report.k0},
                                    {"c_r", report.c_r}};
            for (std::size_t r = 0; r < report.mean_l2.size(); ++r)
                out["moment_report"]["empirical"].push_back(
                    report.mean_l2[r] + 3.0 * report.se_l2[r]);
            out["kt"] = {{"k_star", kt.k_star},
                         {"capped", kt.capped},
                         {"max_excess", kt.max_excess}};
            out["noise_summability"] = {
                {"running_sum", noise.running_sum},
                {"bound", noise.bound},
                {"finite_bound", noise.finite_bound},
                {"pass", noise.pass},
                {"last_decile_increment_frac", noise.last_decile_increment_frac}};
            std::string name = "bounds_seed" + std::to_string(seeds[i]) + ".json";
            save_json(session.path(name), out);
            session.add_file(name);
            session.manifest.wall_seconds[i] = wall_since(t0);

            if (!report.pass)
                session.fail_check("seed " + std::to_string(seeds[i]) +
                                   ": moment bound violated");
            if (!kt.capped)
                session.fail_check("seed " + std::to_string(seeds[i]) +
                                   ": K_t exceeded its cap");
            if (!noise.pass)
                session.fail_check("seed " + std::to_string(seeds[i]) +
                                   ": noise summability bound violated");
        } catch (const std::exception& e) {
            session.fail_check("seed " + std::to_string(seeds[i]) +
                               " failed: " + e.what());
        }
    });
    return session.manifest.checks_passed ? 0 : 1;
}

PowerSchedule power_schedule_from_json(const json& j, const std::string& where) {
    check_keys(j, {"c0", "p"}, where);
    return PowerSchedule{num_or(j, "c0", 1.0), num_or(j, "p", 1.0)};
}

int cmd_lemmas(const json& config, Session& session) {
    check_keys(config, {"cases", "out"}, "lemmas config");
    if (!config.contains("cases") || !config["cases"].is_array() ||
        config["cases"].empty())
        throw ConfigError("lemmas config needs a nonempty 'cases' array");

    json summary = json::array();
    int idx = 0;
    for (const auto& cj : config["cases"]) {
        check_keys(cj,
                   {"lemma", "name", "x0", "gamma", "eps", "a", "c", "n", "stride",
                    "tol"},
                   "lemma case");
        int lemma = static_cast<int>(num_or(cj, "lemma", 0));
        std::string name = str_or(cj, "name", "case" + std::to_string(idx));
        double x0 = num_or(cj, "x0", 1.0);
        double gamma = num_or(cj, "gamma", 0.5);
        PowerSchedule a = cj.contains("a")
                              ? power_schedule_from_json(cj["a"], "lemma schedule")
                              : PowerSchedule{};
        std::uint64_t n = uint_or(cj, "n", 1'000'000);
        std::uint64_t stride = uint_or(cj, "stride", 1000);

        json case_summary;
        case_summary["name"] = name;
        case_summary["lemma"] = lemma;
        bool ok = true;

        auto write_series = [&](const RecurrenceResult& res) {
            std::string csv_name = "lemma" + std::to_string(lemma) + "_" + name + ".csv";
            CsvWriter csv(session.path(csv_name), {"n", "x_n", "oracle_n", "abs_err"});
            for (std::size_t r = 0; r < res.n.size(); ++r)
                csv.write_raw_row({std::to_string(res.n[r]), format_double(res.x[r]),
                                   format_double(res.oracle[r]),
                                   format_double(std::fabs(res.x[r] - res.oracle[r]))});
            csv.close();
            session.add_file(csv_name);
        };

        if (lemma == 3) {
            RecurrenceResult res = recurrence_lemma3(x0, gamma, a, n, stride);
            write_series(res);
            case_summary["final"] = res.limit_estimate;
            case_summary["max_rel_dev"] = res.max_rel_dev;
            double tol = num_or(cj, "tol", 1e-12);
            ok = x0 >= 0.0 ? res.max_rel_dev <= tol : res.max_abs_dev <= 1e-9;
        } else if (lemma == 4) {
            double eps = num_or(cj, "eps", 0.2);
            RecurrenceResult res = recurrence_lemma4(x0, gamma, eps, a, n, stride);
            write_series(res);
            case_summary["final"] = res.limit_estimate;
            case_summary["limit"] = res.limit_analytic;
            double tol = num_or(cj, "tol", 1e-4);
            ok = std::fabs(res.limit_estimate - res.limit_analytic) < tol;
        } else if (lemma == 5) {
            PowerPerturbation c;
            if (cj.contains("c")) {
                check_keys(cj["c"], {"scale", "q"}, "lemma perturbation");
                c = PowerPerturbation{num_or(cj["c"], "scale", 1.0),
                                      num_or(cj["c"], "q", 1.0)};
            }
            Lemma5Result res = recurrence_lemma5(x0, gamma, a, c, n, stride);
            write_series(res.base);
            case_summary["final"] = res.base.limit_estimate;
            case_summary["envelope_ok"] = res.envelope_ok;
            json ladder = json::array();
            for (const auto& rung : res.ladder)
                ladder.push_back({{"tol", rung.tol},
                                  {"crossing", rung.first_crossing
                                                   ? json(*rung.first_crossing)
                                                   : json(nullptr)},
                                  {"recrossed", rung.recrossed}});
            case_summary["ladder"] = ladder;
            if (c.q > 0.0) {
                ok = res.envelope_ok;
                for (const auto& rung : res.ladder)
                    ok = ok && rung.first_crossing.has_value() && !rung.recrossed;
            } else {
                // constant-perturbation control: settles at the Lemma 4 level
                double level = c.scale * gamma / (1.0 - gamma);
                double tol = num_or(cj, "tol", 1e-3);
                ok = std::fabs(res.base.limit_estimate - level) < tol;
                case_summary["control_level"] = level;
            }
        } else {
            throw ConfigError("lemma must be 3, 4 or 5");
        }

        case_summary["ok"] = ok;
        if (!ok)
            session.fail_check("lemma case '" + name + "' check failed");
        summary.push_back(case_summary);
        ++idx;
    }
    save_json(session.path("lemmas_summary.json"), {{"cases", summary}});
    session.add_file("lemmas_summary.json");
    return session.manifest.checks_passed ? 0 : 1;
}

ContinuousMdp cmdp_from_json(const json& j) {
    check_keys(j, {"dim", "n_actions", "mu", "reward_sigma", "gamma"}, "cmdp");
    ContinuousMdp cmdp;
    cmdp.dim = static_cast<int>(num_or(j, "dim", 1));
    cmdp.n_actions = static_cast<int>(num_or(j, "n_actions", 2));
    std::string mu = str_or(j, "mu", "linear_pair");
    if (mu == "linear_pair") cmdp.mu = MuFamily::LinearPair;
    else if (mu == "sin_pi") cmdp.mu = MuFamily::SinPi;
    else if (mu == "zero") cmdp.mu = MuFamily::Zero;
    else throw ConfigError("unknown mu family '" + mu + "'");
    cmdp.reward_sigma = num_or(j, "reward_sigma", 1.0);
    cmdp.gamma = num_or(j, "gamma", 0.5);
    validate_cmdp(cmdp);
    return cmdp;
}

RippleKernel kernel_from_json(const json& j) {
    const std::string family = str_or(j, "family", "gaussian_rbf");
    if (family == "gaussian_rbf") {
        check_keys(j, {"family", "sigma"}, "kernel");
        return GaussianRBF{num_or(j, "sigma", 0.1)};
    }
    if (family == "triangular") {
        check_keys(j, {"family", "radius"}, "kernel");
        return Triangular{num_or(j, "radius", 0.1)};
    }
    if (family == "indicator") {
        check_keys(j, {"family", "radius"}, "kernel");
        return IndicatorKernel{num_or(j, "radius", 0.0)};
    }
    throw ConfigError("unknown kernel family '" + family + "'");
}

int cmd_ripple(const json& config, Session& session, const CliOverrides& ov) {
    check_keys(config,
               {"cmdp", "kernel", "grid_points", "learn", "seeds", "sup_error_max",
                "out"},
               "ripple config");
    if (!config.contains("cmdp")) throw ConfigError("ripple config needs 'cmdp'");
    ContinuousMdp cmdp = cmdp_from_json(config["cmdp"]);
    RippleKernel kernel = config.contains("kernel")
                              ? kernel_from_json(config["kernel"])
                              : RippleKernel{GaussianRBF{0.05}};
    int grid_points = static_cast<int>(num_or(config, "grid_points", 64));
    LearnConfig base = config.contains("learn") ? learn_from_json(config["learn"])
                                                : LearnConfig{};
    if (!config.contains("learn") ||
        !config["learn"].contains("behavior"))
        base.behavior = UniformRandomPolicy{};

    auto seeds = seed_list(config, ov);
    session.manifest.seeds = seeds;
    session.manifest.wall_seconds.assign(seeds.size(), 0.0);
    std::optional<double> sup_error_max;
    if (config.contains("sup_error_max"))
        sup_error_max = config["sup_error_max"].get<double>();

    parallel_over(seeds.size(), ov.parallel, [&](std::size_t i) {
        auto t0 = std::chrono::steady_clock::now();
        LearnConfig cfg = base;
        cfg.seed = seeds[i];
        try {
            GridQ grid = make_grid(cmdp, grid_points, cfg.q_init);
            RippleDiagnostics diag = ripple_q_run(cmdp, kernel, grid, cfg);

            std::string csv_name = "ripple_seed" + std::to_string(seeds[i]) + ".csv";
            CsvWriter csv(session.path(csv_name), {"t", "sup_error", "mean_error"});
            for (const auto& row : diag.rows)
                csv.write_raw_row({std::to_string(row.t),
                                   format_double(row.sup_error),
                                   format_double(row.mean_error)});
            csv.close();
            session.add_file(csv_name);

            // final lattice dump for plotting
            std::string grid_name =
                "ripple_grid_seed" + std::to_string(seeds[i]) + ".csv";
            std::vector<std::string> head = {"point"};
            for (int d = 0; d < diag.final_q.dim; ++d)
                head.push_back("coord" + std::to_string(d));
            for (int a = 0; a < diag.final_q.n_actions; ++a)
                head.push_back("q_a" + std::to_string(a));
            CsvWriter gcsv(session.path(grid_name), head);
            for (int p = 0; p < diag.final_q.n_points; ++p) {
                std::vector<std::string> fields = {std::to_string(p)};
                for (double coord : diag.final_q.point(p))
                    fields.push_back(format_double(coord));
                for (int a = 0; a < diag.final_q.n_actions; ++a)
                    fields.push_back(format_double(diag.final_q.at(p, a)));
                gcsv.write_raw_row(fields);
            }
            gcsv.close();
            session.add_file(grid_name);

            double wall = wall_since(t0);
            session.manifest.wall_seconds[i] = wall;
            json summary = {{"seed", seeds[i]},
                            {"initial_sup_error", diag.initial_sup_error},
                            {"final_sup_error", diag.final_sup_error},
                            {"steps", diag.steps},
                            {"aborted_nonfinite", diag.aborted_nonfinite},
                            {"wall_seconds", wall},
                            {"config", learn_to_json(cfg)}};
            std::string sum_name =
                "ripple_summary_seed" + std::to_string(seeds[i]) + ".json";
            save_json(session.path(sum_name), summary);
            session.add_file(sum_name);

            if (diag.aborted_nonfinite)
                session.fail_check("seed " + std::to_string(seeds[i]) +
                                   ": ripple run hit a non-finite value");
            if (sup_error_max && diag.final_sup_error > *sup_error_max)
                session.fail_check("seed " + std::to_string(seeds[i]) +
                                   ": final sup error above the configured cap");
        } catch (const std::exception& e) {
            session.fail_check("seed " + std::to_string(seeds[i]) +
                               " failed: " + e.what());
        }
    });
    return session.manifest.checks_passed ? 0 : 1;
}

int cmd_pgcheck(const json& config, Session& session) {
    check_keys(config, {"n_theta", "h", "n_samples", "seed", "tol", "out"},
               "pgcheck config");
    PgCheckParams params;
    params.n_theta = static_cast<int>(num_or(config, "n_theta", 20));
    params.h = num_or(config, "h", 1e-5);
    params.n_samples = uint_or(config, "n_samples", 10'000);
    params.seed = uint_or(config, "seed", 1);
    params.tol = num_or(config, "tol", 1e-4);
    PgCheckOutcome outcome = run_pgcheck(params);
    save_json(session.path("pgcheck.json"), outcome.to_json());
    session.add_file("pgcheck.json");
    if (!outcome.pass) session.fail_check("pgcheck criteria failed");
    return session.manifest.checks_passed ? 0 : 1;
}

int cmd_report(const json& config, Session& session) {
    check_keys(config, {"csvs", "plot", "out"}, "report config");
    if (!config.contains("csvs"))
        throw ConfigError("report config needs a 'csvs' array");
    auto paths = config["csvs"].get<std::vector<std::string>>();
    std::string plot_name = str_or(config, "plot", "convergence.svg");
    emit_convergence_plot_files(paths, session.path(plot_name));
    session.add_file(plot_name);
    return 0;
}

} // namespace

int run_experiment(const std::string& subcommand, const std::string& config_path,
                   const CliOverrides& overrides, RunManifest* manifest_out) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();

    json config;
    try {
        config = json::parse(bytes);
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON config: " + std::string(e.what()));
    }

    std::string out_dir = overrides.out ? *overrides.out
                                        : str_or(config, "out", "out");
    Session session(out_dir);
    session.manifest.tool_version = kVersion;
    session.manifest.config_hash = hash_hex(fnv1a64(bytes));

    log_info(subcommand + " -> " + out_dir);
    int rc;
    if (subcommand == "solve") rc = cmd_solve(config, session);
    else if (subcommand == "qlearn") rc = cmd_learn(config, session, overrides, false);
    else if (subcommand == "sarsa") rc = cmd_learn(config, session, overrides, true);
    else if (subcommand == "decompose") rc = cmd_decompose(config, session, overrides);
    else if (subcommand == "bounds") rc = cmd_bounds(config, session, overrides);
    else if (subcommand == "lemmas") rc = cmd_lemmas(config, session);
    else if (subcommand == "ripple") rc = cmd_ripple(config, session, overrides);
    else if (subcommand == "pgcheck") rc = cmd_pgcheck(config, session);
    else if (subcommand == "report") rc = cmd_report(config, session);
    else throw ConfigError("unknown subcommand '" + subcommand + "'");

    std::sort(session.manifest.files.begin(), session.manifest.files.end());
    session.manifest.save(session.path("manifest.json"));
    if (manifest_out != nullptr) *manifest_out = session.manifest;
    return rc;
}

// ---------------------------------------------------------------------------
// pgcheck case set

namespace {

SmallNet make_policy_net() {
    SmallNet net;
    net.layers.push_back({Matrix(4, 2), std::vector<double>(4, 0.0),
                          Activation::Sigmoid});
    net.layers.push_back({Matrix(2, 4), std::vector<double>(2, 0.0),
                          Activation::Identity});
    return net;
}

void randomize(SmallNet& net, Rng& rng) {
    std::vector<double> theta(param_count(net));
    for (double& v : theta) v = rng.uniform(-1.0, 1.0);
    set_params(net, theta);
}

StateBatch make_batch() {
    return {{{0.3, -0.2}, {1.0, 0.5}, {-0.7, 0.1}}, {0.5, 0.25, 0.25}};
}

// Hidden net on (s, a) plus a separate noise channel appended at the output:
// Z(s,a,w) = w2 . sigmoid(W1 [s;a] + b1) + c * sigmoid(w) + b2. The gradient
// in a never depends on w, so the distributional estimator must match the
// deterministic one exactly.
std::pair<SmallNet, SmallNet> make_additive_pair(Rng& rng) {
    SmallNet critic;
    critic.layers.push_back({Matrix(4, 4), std::vector<double>(4, 0.0),
                             Activation::Sigmoid});
    critic.layers.push_back({Matrix(1, 4), std::vector<double>(1, 0.0),
                             Activation::Identity});
    randomize(critic, rng);

    SmallNet znet;
    znet.layers.push_back({Matrix(5, 5), std::vector<double>(5, 0.0),
                           Activation::Sigmoid});
    znet.layers.push_back({Matrix(1, 5), std::vector<double>(1, 0.0),
                           Activation::Identity});
    const Layer& c1 = critic.layers[0];
    Layer& z1 = znet.layers[0];
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) z1.weight.at(r, c) = c1.weight.at(r, c);
        z1.bias[static_cast<std::size_t>(r)] = c1.bias[static_cast<std::size_t>(r)];
    }
    z1.weight.at(4, 4) = 1.0; // noise passthrough row
    const Layer& c2 = critic.layers[1];
    Layer& z2 = znet.layers[1];
    for (int c = 0; c < 4; ++c) z2.weight.at(0, c) = c2.weight.at(0, c);
    z2.weight.at(0, 4) = 0.7; // noise amplitude
    z2.bias[0] = c2.bias[0];
    return {znet, critic};
}

// Noise mixed into the hidden layer: the pathwise derivative genuinely
// depends on w, so the Monte-Carlo mean is compared against Gauss-density
// quadrature.
SmallNet make_mixing_znet(Rng& rng) {
    SmallNet znet;
    znet.layers.push_back({Matrix(4, 5), std::vector<double>(4, 0.0),
                           Activation::Sigmoid});
    znet.layers.push_back({Matrix(1, 4), std::vector<double>(1, 0.0),
                           Activation::Identity});
    randomize(znet, rng);
    return znet;
}

} // namespace

json PgCheckOutcome::to_json() const {
    return {{"max_rel_err", max_rel_err},
            {"total_jittered", total_jittered},
            {"worst_grad_check", worst_report},
            {"additive_max_dev", additive_max_dev},
            {"additive_ok", additive_ok},
            {"mixing_max_excess", mixing_max_excess},
            {"mixing_ok", mixing_ok},
            {"lip_bound", lip_bound},
            {"lip_empirical", lip_empirical},
            {"lip_ok", lip_ok},
            {"pass", pass}};
}

PgCheckOutcome run_pgcheck(const PgCheckParams& params) {
    PgCheckOutcome outcome;
    StateBatch batch = make_batch();
    Critic quad = QuadraticCritic{1.0};

    // analytic vs central differences over random parameter draws
    SmallNet policy = make_policy_net();
    for (int k = 0; k < params.n_theta; ++k) {
        Rng rng = Rng::substream(params.seed, static_cast<std::uint64_t>(k));
        randomize(policy, rng);
        GradCheckReport report = grad_check(policy, quad, batch, params.h);
        if (k == 0 || report.max_rel_err > outcome.max_rel_err)
            outcome.worst_report = {{"theta_draw", k},
                                    {"analytic", report.analytic},
                                    {"fd", report.fd},
                                    {"rel_err", report.rel_err},
                                    {"max_rel_err", report.max_rel_err}};
        outcome.max_rel_err = std::max(outcome.max_rel_err, report.max_rel_err);
        outcome.total_jittered += static_cast<int>(report.jittered_states.size());
    }

    // distributional form, additive noise: must match the deterministic
    // gradient exactly (the estimator has zero variance).
    Rng rng = Rng::substream(params.seed, 1000);
    randomize(policy, rng);
    auto [znet_add, critic_net] = make_additive_pair(rng);
    {
        Rng noise_rng = Rng::substream(params.seed, 2000);
        DistGradResult dist =
            distributional_grad(znet_add, policy, batch, params.n_samples, noise_rng);
        PolicyGradResult det =
            policy_grad_analytic(policy, Critic{NetCritic{critic_net}}, batch);
        outcome.additive_ok = true;
        for (std::size_t p = 0; p < dist.grad.size(); ++p) {
            double dev = std::fabs(dist.grad[p] - det.grad[p]);
            outcome.additive_max_dev = std::max(outcome.additive_max_dev, dev);
            if (dev > 3.0 * dist.se[p] + 1e-12) outcome.additive_ok = false;
        }
    }

    // distributional form, mixed noise: Monte Carlo against quadrature.
    {
        SmallNet znet = make_mixing_znet(rng);
        Rng noise_rng = Rng::substream(params.seed, 3000);
        DistGradResult dist =
            distributional_grad(znet, policy, batch, params.n_samples, noise_rng);

        std::vector<double> oracle(param_count(policy), 0.0);
        const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < batch.states.size(); ++i) {
            const auto& s = batch.states[i];
            ForwardTrace ptrace = forward_trace(policy, s);
            std::vector<double> mean_dzda(2, 0.0);
            for (std::size_t j = 0; j < 2; ++j) {
                mean_dzda[j] = integrate(
                    [&](double w) {
                        std::vector<double> input = {s[0], s[1], ptrace.output[0],
                                                     ptrace.output[1], w};
                        ForwardTrace ztrace = forward_trace(znet, input);
                        std::vector<double> gin = vjp_input(znet, ztrace, {1.0});
                        double phi = inv_sqrt_2pi * std::exp(-0.5 * w * w);
                        return phi * gin[2 + j];
                    },
                    -10.0, 10.0, 1e-10);
            }
            std::vector<double> g = vjp_params(policy, ptrace, std::move(mean_dzda));
            for (std::size_t p = 0; p < g.size(); ++p)
                oracle[p] += batch.weights[i] * g[p];
        }
        outcome.mixing_ok = true;
        double max_excess = -1e300;
        for (std::size_t p = 0; p < dist.grad.size(); ++p) {
            double excess =
                std::fabs(dist.grad[p] - oracle[p]) - 3.0 * dist.se[p] - 1e-9;
            max_excess = std::max(max_excess, excess);
            if (excess > 0.0) outcome.mixing_ok = false;
        }
        outcome.mixing_max_excess = max_excess;
    }

    // Lipschitz composition bound against random difference quotients.
    {
        outcome.lip_bound = lipschitz_bound(policy);
        Rng pair_rng = Rng::substream(params.seed, 4000);
        outcome.lip_empirical =
            empirical_lipschitz(policy, 10'000, -3.0, 3.0, pair_rng);
        outcome.lip_ok = outcome.lip_empirical <= outcome.lip_bound + 1e-9;
    }

    outcome.pass = outcome.max_rel_err <= params.tol && outcome.additive_ok &&
                   outcome.mixing_ok && outcome.lip_ok;
    return outcome;
}

} // namespace qconv
