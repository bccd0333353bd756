#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace qconv {

// Step sequence a_n = c0 / (n+1)^p, used unclamped by the deterministic
// recurrences; emitted values must already lie in [0, 1] or the run throws
// BadSchedule. p in (0.5, 1] gives a Robbins-Monro sequence; p > 1 (summable)
// and p = 0 (constant) are admitted as controls.
struct PowerSchedule {
    double c0 = 1.0;
    double p = 1.0;
};

// Perturbation c_n = scale / (n+1)^q, q >= 0. q = 0 is the declared
// non-vanishing control; a q > 0 family that has not decayed below the
// vanishing tolerance by step N throws NonVanishingPerturbation.
struct PowerPerturbation {
    double scale = 1.0;
    double q = 1.0;
};

double power_schedule_at(const PowerSchedule& a, std::uint64_t n);
double power_perturbation_at(const PowerPerturbation& c, std::uint64_t n);

struct RecurrenceResult {
    std::vector<std::uint64_t> n;  // recorded indices, always including 0 and N
    std::vector<double> x;         // iterate at recorded indices
    std::vector<double> oracle;    // closed-form oracle at recorded indices
    double limit_estimate = 0.0;   // x_N
    double limit_analytic = 0.0;   // 0 (Lemma 3) or eps*gamma/(1-gamma) (Lemma 4)
    // First step with |x_n - limit_analytic| < mark_tol, none if never.
    std::optional<std::uint64_t> n_at_tolerance;
    double max_abs_dev = 0.0;      // max |x_n - oracle_n| over all steps
    double max_rel_dev = 0.0;      // same, relative to max(|oracle_n|, 1e-300)
    bool monotone_nonincreasing = true; // x_{n+1} <= x_n at every step
    // Steps for which the oracle's derivation hypothesis held (Lemma 4 needs
    // x_n + eps >= 0); equal to N when it never failed.
    std::uint64_t oracle_valid_through = 0;
};

// x_{n+1} = (1 - a_n) x_n + gamma a_n |x_n|, against the product oracle
// x0 * prod(1 - a_i(1-gamma)) (piecewise through sign events for x0 < 0).
// Iterated in long double so the 1e6-step comparison stays honest.
RecurrenceResult recurrence_lemma3(double x0, double gamma,
                                   const PowerSchedule& a, std::uint64_t N,
                                   std::uint64_t stride = 1000,
                                   double mark_tol = 1e-2);

// x_{n+1} = (1 - a_n) x_n + gamma a_n |x_n + eps|; converges to
// eps*gamma/(1-gamma). Oracle via the shifted variable y_n = x_n - limit,
// y_{n+1} = (1 - a_n(1-gamma)) y_n, valid while x_n + eps >= 0.
RecurrenceResult recurrence_lemma4(double x0, double gamma, double eps,
                                   const PowerSchedule& a, std::uint64_t N,
                                   std::uint64_t stride = 1000,
                                   double mark_tol = 1e-2);

struct LadderCrossing {
    double tol;
    std::optional<std::uint64_t> first_crossing;
    bool recrossed = false; // |x_n| >= tol again after the first crossing
};

struct Lemma5Result {
    RecurrenceResult base;
    std::array<LadderCrossing, 3> ladder; // tolerances 0.1, 0.01, 0.001
    bool perturbation_vanished = false;   // c_N below the vanishing tolerance
    // Comparison process z restarted at n1 = N/2 with eps1 = c_{n1+1}:
    // z dominates |x| pointwise afterwards.
    std::uint64_t n1 = 0;
    double eps1 = 0.0;
    bool envelope_ok = true;
    double envelope_min_margin = 0.0; // min over n > n1 of z_n - |x_n|
};

// x_{n+1} = (1 - a_n) x_n + gamma a_n |x_n + c_n| with c_n -> 0; verifies the
// tolerance ladder and the Lemma-4 comparison envelope. The oracle column of
// the result holds the envelope where defined (x itself before n1).
Lemma5Result recurrence_lemma5(double x0, double gamma, const PowerSchedule& a,
                               const PowerPerturbation& c, std::uint64_t N,
                               std::uint64_t stride = 1000);

} // namespace qconv
