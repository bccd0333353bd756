#include "qconv/ripple.hpp"

#include <cmath>
#include <numbers>

#include "qconv/errors.hpp"
#include "qconv/kernels.hpp"
#include "qconv/quadrature.hpp"

namespace qconv {

void validate_kernel(const RippleKernel& k) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GaussianRBF>) {
                if (!(v.sigma > 0.0)) throw ConfigError("GaussianRBF needs sigma > 0");
            } else if constexpr (std::is_same_v<T, Triangular>) {
                if (!(v.radius > 0.0)) throw ConfigError("Triangular needs radius > 0");
            } else {
                if (!(v.radius >= 0.0)) throw ConfigError("Indicator needs radius >= 0");
            }
        },
        k);
}

namespace {

void check_point(std::span<const double> x) {
    for (double c : x)
        if (!(c >= 0.0) || !(c <= 1.0))
            throw OutOfDomain("point outside [0,1]^d");
}

double dist(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace

double ripple_eval(const RippleKernel& k, std::span<const double> x,
                   std::span<const double> y) {
    if (x.size() != y.size())
        throw DimensionMismatch("ripple_eval: point dimensions differ");
    check_point(x);
    check_point(y);
    const double d = dist(x, y);
    return std::visit(
        [d](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GaussianRBF>) {
                return std::exp(-0.5 * (d / v.sigma) * (d / v.sigma));
            } else if constexpr (std::is_same_v<T, Triangular>) {
                return std::max(0.0, 1.0 - d / v.radius);
            } else {
                return d <= v.radius ? 1.0 : 0.0;
            }
        },
        k);
}

void validate_cmdp(const ContinuousMdp& cmdp) {
    if (cmdp.dim != 1 && cmdp.dim != 2)
        throw ConfigError("ContinuousMdp supports dim 1 or 2");
    if (!(cmdp.gamma > 0.0) || !(cmdp.gamma < 1.0))
        throw BadGamma("ContinuousMdp gamma must lie inside (0, 1)");
    if (!(cmdp.reward_sigma >= 0.0))
        throw ConfigError("reward_sigma must be >= 0");
    switch (cmdp.mu) {
        case MuFamily::LinearPair:
            if (cmdp.n_actions != 2)
                throw ConfigError("LinearPair mu needs exactly 2 actions");
            break;
        case MuFamily::SinPi:
            if (cmdp.n_actions != 1)
                throw ConfigError("SinPi mu needs exactly 1 action");
            break;
        case MuFamily::Zero:
            if (cmdp.n_actions < 1) throw ConfigError("need at least one action");
            break;
    }
}

double mu_eval(const ContinuousMdp& cmdp, std::span<const double> s, int a) {
    switch (cmdp.mu) {
        case MuFamily::LinearPair:
            return a == 0 ? s[0] : 1.0 - s[0];
        case MuFamily::SinPi:
            return std::sin(std::numbers::pi * s[0]);
        default:
            return 0.0;
    }
}

double mu_lipschitz(const ContinuousMdp& cmdp) {
    switch (cmdp.mu) {
        case MuFamily::LinearPair: return 1.0;
        case MuFamily::SinPi: return std::numbers::pi;
        default: return 0.0;
    }
}

GridQ make_grid(const ContinuousMdp& cmdp, int points_per_axis, double fill) {
    validate_cmdp(cmdp);
    if (points_per_axis < 2) throw ConfigError("grid needs >= 2 points per axis");
    GridQ g;
    g.dim = cmdp.dim;
    g.n_actions = cmdp.n_actions;
    g.points_per_axis = points_per_axis;
    g.n_points = cmdp.dim == 1 ? points_per_axis : points_per_axis * points_per_axis;
    if (g.n_points > 4096) throw ConfigError("grid exceeds 4096 points");
    g.mesh = 1.0 / (points_per_axis - 1);
    g.coords.reserve(static_cast<std::size_t>(g.n_points) * static_cast<std::size_t>(g.dim));
    if (cmdp.dim == 1) {
        for (int i = 0; i < points_per_axis; ++i)
            g.coords.push_back(static_cast<double>(i) / (points_per_axis - 1));
    } else {
        for (int i = 0; i < points_per_axis; ++i)
            for (int j = 0; j < points_per_axis; ++j) {
                g.coords.push_back(static_cast<double>(i) / (points_per_axis - 1));
                g.coords.push_back(static_cast<double>(j) / (points_per_axis - 1));
            }
    }
    g.values.assign(static_cast<std::size_t>(g.n_points) *
                        static_cast<std::size_t>(g.n_actions),
                    fill);
    return g;
}

ContinuousQstar continuous_qstar(const ContinuousMdp& cmdp) {
    validate_cmdp(cmdp);
    if (cmdp.transition != TransitionKind::UniformIid)
        throw UnsupportedTransition(
            "closed-form Q* needs uniform state-independent transitions");
    auto max_mu = [&cmdp](std::span<const double> s) {
        double m = mu_eval(cmdp, s, 0);
        for (int a = 1; a < cmdp.n_actions; ++a)
            m = std::max(m, mu_eval(cmdp, s, a));
        return m;
    };
    double integral;
    if (cmdp.dim == 1) {
        integral = integrate(
            [&](double x) {
                double p[1] = {x};
                return max_mu(std::span<const double>(p, 1));
            },
            0.0, 1.0, 1e-10);
    } else {
        integral = integrate2d(
            [&](double x, double y) {
                double p[2] = {x, y};
                return max_mu(std::span<const double>(p, 2));
            },
            0.0, 1.0, 0.0, 1.0, 1e-10);
    }
    ContinuousQstar qs;
    qs.cmdp = cmdp;
    qs.vbar = integral / (1.0 - cmdp.gamma);
    return qs;
}

GridQ qstar_on_grid(const ContinuousQstar& qstar, const GridQ& like) {
    GridQ g = like;
    for (int i = 0; i < g.n_points; ++i)
        for (int a = 0; a < g.n_actions; ++a) g.at(i, a) = qstar(g.point(i), a);
    return g;
}

ValidatedMdp induced_mdp(const ContinuousMdp& cmdp, const GridQ& grid) {
    validate_cmdp(cmdp);
    MdpSpec spec;
    spec.n_states = grid.n_points;
    spec.n_actions = grid.n_actions;
    spec.gamma = cmdp.gamma;
    std::vector<double> uniform_row(static_cast<std::size_t>(grid.n_points),
                                    1.0 / grid.n_points);
    const std::size_t n_cells = static_cast<std::size_t>(grid.n_points) *
                                static_cast<std::size_t>(grid.n_actions);
    spec.trans.assign(n_cells, uniform_row);
    spec.rewards.reserve(n_cells);
    for (int i = 0; i < grid.n_points; ++i)
        for (int a = 0; a < grid.n_actions; ++a) {
            double m = mu_eval(cmdp, grid.point(i), a);
            if (cmdp.reward_sigma > 0.0)
                spec.rewards.emplace_back(Gaussian{m, cmdp.reward_sigma});
            else
                spec.rewards.emplace_back(PointMass{m});
        }
    return validate_mdp(spec);
}

RippleDiagnostics ripple_q_run(const ContinuousMdp& cmdp, const RippleKernel& kernel,
                               const GridQ& grid, const LearnConfig& cfg) {
    validate_cmdp(cmdp);
    validate_kernel(kernel);
    validate_learn_config(cfg);
    const auto* harmonic = std::get_if<VisitHarmonic>(&cfg.schedule);
    if (harmonic == nullptr)
        throw BadSchedule(
            "ripple_q_run indexes steps by accumulated ripple mass; use VisitHarmonic");
    if (grid.dim != cmdp.dim || grid.n_actions != cmdp.n_actions)
        throw DimensionMismatch("grid does not match the continuous MDP");

    const int n = grid.n_points;
    const int n_actions = grid.n_actions;
    const double c0 = harmonic->c0;
    const double gamma = cmdp.gamma;
    const auto& ops = kern::active_ops();

    // f(x_i, x_j) rows; samples land on grid points so the full matrix covers
    // every query (at most 4096^2 entries).
    std::vector<double> kmat(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double f = ripple_eval(kernel, grid.point(i), grid.point(j));
            kmat[static_cast<std::size_t>(i) * n + j] = f;
            kmat[static_cast<std::size_t>(j) * n + i] = f;
        }

    ValidatedMdp imdp = induced_mdp(cmdp, grid);
    ContinuousQstar qstar = continuous_qstar(cmdp);
    GridQ ref = qstar_on_grid(qstar, grid);

    RippleDiagnostics diag;
    GridQ q = grid;
    diag.mass.assign(q.values.size(), 0.0);

    const std::size_t total = q.values.size();
    auto record = [&](std::uint64_t t) {
        diag.rows.push_back(
            {t, ops.max_abs_diff(q.values.data(), ref.values.data(), total),
             ops.sum_abs_diff(q.values.data(), ref.values.data(), total) /
                 static_cast<double>(total)});
    };
    record(0);
    diag.initial_sup_error = diag.rows.front().sup_error;

    Rng rng(cfg.seed);
    int s = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(n)));
    std::vector<double> action_buf(static_cast<std::size_t>(n_actions));

    for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
        for (int a = 0; a < n_actions; ++a)
            action_buf[static_cast<std::size_t>(a)] = q.at(s, a);
        int a = choose_action_values(cfg.behavior, action_buf, t, rng);

        Transition tr = imdp.sample_transition(s, a, rng);
        double bootstrap = q.at(tr.next_state, 0);
        for (int b = 1; b < n_actions; ++b)
            bootstrap = std::max(bootstrap, q.at(tr.next_state, b));
        const double target = tr.reward + gamma * bootstrap;

        double* plane = q.values.data() + static_cast<std::size_t>(a) * n;
        double* mass_plane = diag.mass.data() + static_cast<std::size_t>(a) * n;
        const double* f_row = kmat.data() + static_cast<std::size_t>(s) * n;
        ops.ripple_blend(plane, mass_plane, f_row, static_cast<std::size_t>(n),
                         c0, target);
        diag.steps = t + 1;

        if (!std::isfinite(q.at(s, a))) {
            diag.aborted_nonfinite = true;
            record(t + 1);
            break;
        }
        s = tr.next_state;
        if ((t + 1) % cfg.record_every == 0 || t + 1 == cfg.horizon) record(t + 1);
    }

    diag.final_q = std::move(q);
    diag.final_sup_error = diag.rows.back().sup_error;
    return diag;
}

} // namespace qconv
