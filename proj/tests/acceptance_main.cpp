// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every tolerance below is pinned in code; nothing is calibrated at runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qconv/diagnostics.hpp"
#include "qconv/experiment.hpp"
#include "qconv/learn.hpp"
#include "qconv/recurrences.hpp"
#include "qconv/ripple.hpp"
#include "qconv/solver.hpp"

using namespace qconv;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string id;
    bool pass;
    std::string detail;
};

std::vector<Criterion> g_results;

void report(const std::string& id, bool pass, const std::string& detail) {
    g_results.push_back({id, pass, detail});
    std::printf("%-4s %s  %s\n", id.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

// The benchmark instance shared by A1, A2 and A9: 5 states, 3 actions,
// Gaussian(mean in [-1,1], sigma 1) rewards, gamma 0.9.
ValidatedMdp benchmark_mdp() {
    return validate_mdp(generate_mdp(5, 3, RewardGen{}, 7));
}

LearnConfig benchmark_config() {
    LearnConfig cfg;
    cfg.schedule = VisitHarmonic{10.0}; // c0 = 1/(1-gamma)
    cfg.behavior = EpsilonGreedy{0.1, 0.0, Decay::None};
    cfg.horizon = 2'000'000;
    cfg.record_every = 1000;
    return cfg;
}

double row_error_at(const RunDiagnostics& diag, std::uint64_t t) {
    for (const auto& row : diag.rows)
        if (row.t == t) return row.sup_error;
    return std::nan("");
}

void criterion_a1() {
    ValidatedMdp mdp = benchmark_mdp();
    QTable qstar = value_iterate(mdp, 1e-8).qstar;
    LearnConfig cfg = benchmark_config();

    const std::vector<std::uint64_t> checkpoints = {2'000, 20'000, 200'000,
                                                    2'000'000};
    std::vector<double> finals;
    std::vector<std::vector<double>> at_checkpoint(checkpoints.size());
    double initial = 0.0;
    double max_wall = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        cfg.seed = seed;
        auto t0 = std::chrono::steady_clock::now();
        RunDiagnostics diag = q_learning_run(mdp, qstar, cfg);
        max_wall = std::max(
            max_wall,
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count());
        initial = diag.initial_sup_error;
        finals.push_back(diag.final_sup_error);
        for (std::size_t c = 0; c < checkpoints.size(); ++c)
            at_checkpoint[c].push_back(row_error_at(diag, checkpoints[c]));
    }
    double med_final = median(finals);
    bool converged = med_final < 0.1 * initial;
    bool monotone = true;
    double prev = 1e300;
    std::string curve;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        double m = median(at_checkpoint[c]);
        monotone = monotone && m <= prev;
        prev = m;
        curve += (c ? ", " : "") + fmt(m);
    }
    bool in_budget = max_wall <= 120.0;
    report("A1", converged && monotone && in_budget,
           "q-learning median final " + fmt(med_final) + " vs 0.1 x initial " +
               fmt(initial) + "; checkpoint medians [" + curve +
               "] nonincreasing=" + (monotone ? "yes" : "no") + "; " +
               fmt(max_wall) + " s/seed");
}

void criterion_a2() {
    ValidatedMdp mdp = benchmark_mdp();
    QTable qstar = value_iterate(mdp, 1e-8).qstar;
    LearnConfig cfg = benchmark_config();
    cfg.behavior = EpsilonGreedy{1.0, 0.0, Decay::InvSqrtT}; // GLIE

    std::vector<double> finals;
    double initial = 0.0;
    double max_wall = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        cfg.seed = seed;
        auto t0 = std::chrono::steady_clock::now();
        RunDiagnostics diag = sarsa_run(mdp, qstar, cfg);
        max_wall = std::max(
            max_wall,
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count());
        initial = diag.initial_sup_error;
        finals.push_back(diag.final_sup_error);
    }
    double med_final = median(finals);
    bool pass = med_final < 0.15 * initial && max_wall <= 120.0;
    report("A2", pass,
           "sarsa (GLIE) median final " + fmt(med_final) + " vs 0.15 x initial " +
               fmt(initial) + "; " + fmt(max_wall) + " s/seed");
}

void criterion_a3() {
    // moment bound, 100 replicas on a zero-mean Gaussian MDP
    MdpSpec spec = generate_mdp(5, 3, RewardGen{}, 7);
    for (auto& r : spec.rewards) r = Gaussian{0.0, 1.0};
    ValidatedMdp mdp = validate_mdp(spec);
    LearnConfig cfg;
    cfg.schedule = VisitHarmonic{1.0};
    cfg.behavior = EpsilonGreedy{0.1, 0.0, Decay::None};
    cfg.horizon = 100'000;
    cfg.record_every = 1000;
    cfg.q_init = 0.0;
    cfg.seed = 100;
    MomentReport moments = lt_moment_check(mdp, cfg, 100, /*k0=*/1.0);

    // deterministic K_t cap over a (K_0, gamma, schedule) grid, tolerance 0
    bool kt_ok = true;
    double worst_excess = -1e300;
    for (double k0 : {0.0, 1.0, 20.0})
        for (double gamma : {0.5, 0.9, 0.99})
            for (const StepSchedule& sched :
                 {StepSchedule(VisitHarmonic{1.0}),
                  StepSchedule(GlobalPolynomial{1.0, 0.7}),
                  StepSchedule(GlobalPolynomial{0.5, 1.0}),
                  StepSchedule(ConstantStep{0.5})}) {
                KtTrace kt =
                    kt_sequence(k0, envelope_sequence(sched, 100'000), gamma);
                kt_ok = kt_ok && kt.capped;
                worst_excess = std::max(worst_excess, kt.max_excess);
            }
    report("A3", moments.pass && kt_ok,
           std::string("E[L_t^2] bound ") + (moments.pass ? "held" : "broke") +
               " at all " + fmt(static_cast<double>(moments.ts.size())) +
               " recorded t over 100 replicas; K_t cap exact over 36-point grid "
               "(max excess " +
               fmt(worst_excess) + ")");
}

void criterion_a4() {
    int violations = 0;
    double worst_gap = -1e300;
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
        Rng pick(trial);
        int ns = 2 + static_cast<int>(pick.uniform_int(5));
        int na = 2 + static_cast<int>(pick.uniform_int(3));
        ValidatedMdp mdp = validate_mdp(generate_mdp(ns, na, RewardGen{}, trial));
        QTable q1(ns, na), q2(ns, na);
        for (double& v : q1.v) v = pick.uniform(-10.0, 10.0);
        for (double& v : q2.v) v = pick.uniform(-10.0, 10.0);
        auto [lhs, rhs] = contraction_check(mdp, q1, q2);
        worst_gap = std::max(worst_gap, lhs - rhs);
        if (lhs > rhs + 1e-9) ++violations;
    }
    report("A4", violations == 0,
           "contraction held on 1000 random (MDP, q1, q2) triples; worst "
           "lhs - rhs = " +
               fmt(worst_gap));
}

void criterion_a5() {
    ContinuousMdp cmdp;
    cmdp.dim = 1;
    cmdp.n_actions = 2;
    cmdp.mu = MuFamily::LinearPair;
    cmdp.reward_sigma = 1.0;
    cmdp.gamma = 0.5;

    LearnConfig cfg;
    cfg.schedule = VisitHarmonic{2.0}; // c0 = 1/(1-gamma)
    cfg.behavior = UniformRandomPolicy{};
    cfg.horizon = 1'000'000;
    cfg.record_every = 10'000;

    ContinuousQstar qs = continuous_qstar(cmdp);
    bool vbar_ok = std::fabs(qs.vbar - 1.5) < 1e-9;

    std::vector<double> finals;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        cfg.seed = seed;
        GridQ grid = make_grid(cmdp, 64);
        RippleDiagnostics diag = ripple_q_run(cmdp, GaussianRBF{0.05}, grid, cfg);
        finals.push_back(diag.final_sup_error);
    }
    double med = median(finals);

    // Indicator(0) kernel == tabular Q-learning with a shared seed, bit-exact
    LearnConfig red_cfg = cfg;
    red_cfg.seed = 99;
    red_cfg.horizon = 20'000;
    GridQ grid = make_grid(cmdp, 64);
    RippleDiagnostics rip = ripple_q_run(cmdp, IndicatorKernel{0.0}, grid, red_cfg);
    ValidatedMdp imdp = induced_mdp(cmdp, grid);
    RunDiagnostics tab =
        q_learning_run(imdp, QTable(64, 2, 0.0), red_cfg);
    bool bit_exact = true;
    for (int i = 0; i < 64 && bit_exact; ++i)
        for (int a = 0; a < 2; ++a)
            bit_exact = bit_exact && rip.final_q.at(i, a) == tab.final_q.at(i, a);

    report("A5", vbar_ok && med < 0.1 && bit_exact,
           "ripple median final sup error " + fmt(med) +
               " < 0.1 against the closed-form oracle (vbar = " + fmt(qs.vbar) +
               "); indicator reduction bit-exact=" + (bit_exact ? "yes" : "no"));
}

void criterion_a6() {
    RecurrenceResult l3 =
        recurrence_lemma3(1.0, 0.5, PowerSchedule{1.0, 1.0}, 1'000'000);
    bool l3_ok = l3.max_rel_dev <= 1e-12 && l3.limit_estimate < 1e-2;

    bool l4_ok = true;
    double l4_worst = 0.0;
    for (double gamma : {0.5, 0.9})
        for (double eps : {0.2, 1.0}) {
            RecurrenceResult r = recurrence_lemma4(1.0, gamma, eps,
                                                   PowerSchedule{1.0, 0.6},
                                                   1'000'000);
            double dev = std::fabs(r.limit_estimate - r.limit_analytic);
            l4_worst = std::max(l4_worst, dev);
            l4_ok = l4_ok && dev < 1e-4;
        }

    Lemma5Result l5 = recurrence_lemma5(1.0, 0.5, PowerSchedule{1.0, 0.6},
                                        PowerPerturbation{1.0, 1.0}, 1'000'000,
                                        10'000);
    bool l5_ok = l5.envelope_ok;
    for (const auto& rung : l5.ladder)
        l5_ok = l5_ok && rung.first_crossing.has_value() && !rung.recrossed;

    Lemma5Result control =
        recurrence_lemma5(1.0, 0.5, PowerSchedule{1.0, 0.6},
                          PowerPerturbation{0.3, 0.0}, 200'000, 10'000);
    double level = 0.3 * 0.5 / (1.0 - 0.5);
    bool control_ok = std::fabs(control.base.limit_estimate - level) < 1e-3 &&
                      control.base.limit_estimate > 0.1;

    report("A6", l3_ok && l4_ok && l5_ok && control_ok,
           "lemma3 rel dev " + fmt(l3.max_rel_dev) + ", final " +
               fmt(l3.limit_estimate) + "; lemma4 worst |x_N - limit| " +
               fmt(l4_worst) + "; lemma5 ladder+envelope ok=" +
               (l5_ok ? "yes" : "no") + "; constant-c control settled at " +
               fmt(control.base.limit_estimate) + " (level " + fmt(level) + ")");
}

void criterion_a7() {
    struct Case {
        const char* name;
        RewardDist dist;
    };
    const std::vector<Case> cases = {
        {"gaussian", Gaussian{0.5, 1.2}},
        {"uniform", Uniform{-1.0, 2.0}},
        {"student_t", StudentT{3.0, 0.0, 1.0}},
        {"shifted_exponential", ShiftedExponential{1.5, -0.5}},
        {"point_mass", PointMass{1.3}},
    };
    bool all = true;
    std::string detail = "E[Z^2] <= 4 E[Y^2] + 3 SE at n = 1e6:";
    std::uint64_t seed = 1;
    for (const auto& c : cases) {
        Lemma1Result r =
            lemma1_check(c.dist, Conditioning::Trivial, 1'000'000, seed++);
        all = all && r.pass;
        detail += std::string(" ") + c.name + "=" + fmt(r.lhs) + "/" + fmt(r.rhs);
    }
    report("A7", all, detail);
}

void criterion_a8() {
    PgCheckParams params; // n_theta 20, h 1e-5, n 1e4, tol 1e-4
    PgCheckOutcome outcome = run_pgcheck(params);
    report("A8", outcome.pass,
           "gradient max rel err " + fmt(outcome.max_rel_err) +
               " <= 1e-4 over 20 draws; additive-noise match dev " +
               fmt(outcome.additive_max_dev) + "; mixed-noise within 3 SE (excess " +
               fmt(outcome.mixing_max_excess) + "); Lipschitz " +
               fmt(outcome.lip_empirical) + " <= bound " + fmt(outcome.lip_bound));
}

void criterion_a9() {
    ValidatedMdp mdp = benchmark_mdp();
    QTable qstar = value_iterate(mdp, 1e-8).qstar;
    LearnConfig cfg = benchmark_config();
    cfg.schedule = ConstantStep{0.5};

    std::vector<double> tail_medians;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        cfg.seed = seed;
        RunDiagnostics diag = q_learning_run(mdp, qstar, cfg);
        std::vector<double> tail;
        for (const auto& row : diag.rows)
            if (row.t >= cfg.horizon - cfg.horizon / 10)
                tail.push_back(row.sup_error);
        tail_medians.push_back(median(tail));
    }
    double med = median(tail_medians);
    bool control_ok = med > 1e-3;

    bool rejected = false;
    try {
        MdpSpec spec;
        spec.n_states = 1;
        spec.n_actions = 1;
        spec.gamma = 0.9;
        spec.trans = {{1.0}};
        spec.rewards = {StudentT{2.0, 0.0, 1.0}};
        validate_mdp(spec);
    } catch (const InvalidDistribution&) {
        rejected = true;
    }
    report("A9", control_ok && rejected,
           "constant-step control stuck at final-decile median " + fmt(med) +
               " > 1e-3; StudentT(dof=2) spec rejected=" +
               (rejected ? "yes" : "no"));
}

void criterion_a10() {
    fs::path dir = fs::temp_directory_path() / "qconv_acceptance_a10";
    fs::remove_all(dir);
    fs::create_directories(dir);

    nlohmann::json config = {
        {"generator",
         {{"n_states", 4}, {"n_actions", 2}, {"seed", 3}, {"gamma", 0.9},
          {"reward", {{"family", "gaussian"}, {"sigma", 1.0}}}}},
        {"learn",
         {{"schedule", {{"family", "visit_harmonic"}, {"c0", 1.0}}},
          {"behavior", {{"kind", "epsilon_greedy"}, {"eps0", 0.2}}},
          {"horizon", 20'000},
          {"record_every", 500}}},
        {"seeds", {5, 6}},
    };
    std::string cfg_path = (dir / "cfg.json").string();
    {
        std::ofstream out(cfg_path);
        out << config.dump(2);
    }
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    bool identical = true;
    for (const char* sub : {"qlearn", "sarsa"}) {
        CliOverrides ov1, ov2;
        ov1.out = (dir / (std::string(sub) + "1")).string();
        ov2.out = (dir / (std::string(sub) + "2")).string();
        RunManifest m1;
        run_experiment(sub, cfg_path, ov1, &m1);
        run_experiment(sub, cfg_path, ov2, nullptr);
        for (const auto& f : m1.files) {
            if (f.find(".csv") == std::string::npos) continue;
            identical = identical &&
                        slurp(*ov1.out + "/" + f) == slurp(*ov2.out + "/" + f);
        }
    }
    fs::remove_all(dir);
    report("A10", identical,
           std::string("rerun of (config, seed) produced byte-identical CSVs: ") +
               (identical ? "yes" : "no"));
}

} // namespace

int main() {
    std::printf("qconv acceptance suite\n");
    criterion_a1();
    criterion_a2();
    criterion_a3();
    criterion_a4();
    criterion_a5();
    criterion_a6();
    criterion_a7();
    criterion_a8();
    criterion_a9();
    criterion_a10();

    int passed = 0;
    for (const auto& c : g_results) passed += c.pass ? 1 : 0;
    std::printf("ACCEPTANCE: %d/%zu criteria passed\n", passed,
                g_results.size());
    return passed == static_cast<int>(g_results.size()) ? 0 : 1;
}
