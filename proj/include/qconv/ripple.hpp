#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "qconv/learn.hpp"
#include "qconv/mdp.hpp"

namespace qconv {

// Continuity weight f(x, y) on [0,1]^d with f(x,x) = 1 exactly and values in
// [0,1]. The indicator kernel is discontinuous and admitted only as the
// tabular-reduction control.
struct GaussianRBF {
    double sigma = 0.1;
};
struct Triangular {
    double radius = 0.1;
};
struct IndicatorKernel {
    double radius = 0.0;
};

using RippleKernel = std::variant<GaussianRBF, Triangular, IndicatorKernel>;

void validate_kernel(const RippleKernel& k);

// Points must lie in [0,1]^d (throws OutOfDomain) and have equal dimension.
double ripple_eval(const RippleKernel& k, std::span<const double> x,
                   std::span<const double> y);

// Mean-reward shapes with closed-form Lipschitz constants. LinearPair is the
// two-action pair mu(s, 0) = s_0, mu(s, 1) = 1 - s_0; SinPi the single-action
// sin(pi s_0); Zero is identically zero for any action count.
enum class MuFamily { LinearPair, SinPi, Zero };

enum class TransitionKind { UniformIid };

// Continuous-domain MDP on [0,1]^d (d in {1,2}) with a finite action set,
// Gaussian reward noise around mu(s,a) and next states drawn uniformly on the
// domain independent of (s,a) — the family whose Q* has a closed form.
struct ContinuousMdp {
    int dim = 1;
    int n_actions = 2;
    MuFamily mu = MuFamily::LinearPair;
    double reward_sigma = 1.0;
    double gamma = 0.5;
    TransitionKind transition = TransitionKind::UniformIid;
};

void validate_cmdp(const ContinuousMdp& cmdp);
double mu_eval(const ContinuousMdp& cmdp, std::span<const double> s, int a);
double mu_lipschitz(const ContinuousMdp& cmdp);

// Uniform lattice over [0,1]^d including the endpoints; values stored as one
// contiguous plane per action so a ripple update touches a single plane.
struct GridQ {
    int dim = 1;
    int n_actions = 1;
    int points_per_axis = 2;
    int n_points = 2;
    double mesh = 1.0;                // per-axis spacing
    std::vector<double> coords;       // n_points * dim
    std::vector<double> values;       // action-major: a * n_points + i

    std::span<const double> point(int i) const {
        return {coords.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
    double& at(int i, int a) {
        return values[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_points) +
                      static_cast<std::size_t>(i)];
    }
    double at(int i, int a) const {
        return values[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_points) +
                      static_cast<std::size_t>(i)];
    }
};

// points_per_axis^dim must stay <= 4096 (desk scale).
GridQ make_grid(const ContinuousMdp& cmdp, int points_per_axis, double fill = 0.0);

// Closed-form optimal value: Q*(s,a) = mu(s,a) + gamma * vbar with
// vbar = integral of max_b mu(s',b) over the domain, divided by (1 - gamma).
// The integral is evaluated by adaptive quadrature to 1e-10.
struct ContinuousQstar {
    ContinuousMdp cmdp;
    double vbar = 0.0;
    double operator()(std::span<const double> s, int a) const {
        return mu_eval(cmdp, s, a) + cmdp.gamma * vbar;
    }
};

ContinuousQstar continuous_qstar(const ContinuousMdp& cmdp);
GridQ qstar_on_grid(const ContinuousQstar& qstar, const GridQ& like);

// Finite MDP obtained by restricting the continuous model to the grid:
// uniform transition rows over grid points, Gaussian(mu(x_i,a), sigma) cells
// (PointMass when sigma = 0). The ripple runner samples through this MDP, so
// the Indicator(0) kernel reproduces tabular Q-learning bit-exactly.
ValidatedMdp induced_mdp(const ContinuousMdp& cmdp, const GridQ& grid);

struct RippleRow {
    std::uint64_t t;
    double sup_error;  // max over grid and actions of |Q_t - Q*|
    double mean_error; // mean over grid and actions of |Q_t - Q*|
};

struct RippleDiagnostics {
    std::vector<RippleRow> rows;
    GridQ final_q;
    std::vector<double> mass; // accumulated ripple mass per (action, point)
    double initial_sup_error = 0.0;
    double final_sup_error = 0.0;
    std::uint64_t steps = 0;
    bool aborted_nonfinite = false;
};

// One observed transition updates every grid cell of the visited action's
// plane with weight f(x, x_t) * alpha(x), where alpha is the harmonic step in
// the cell's accumulated ripple mass. Only VisitHarmonic schedules are
// accepted. `grid` supplies geometry and the initial values.
RippleDiagnostics ripple_q_run(const ContinuousMdp& cmdp, const RippleKernel& kernel,
                               const GridQ& grid, const LearnConfig& cfg);

} // namespace qconv
