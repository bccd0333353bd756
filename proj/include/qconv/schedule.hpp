#pragma once

#include <cstdint>
#include <variant>

namespace qconv {

// Robbins-Monro step-size families. VisitHarmonic is indexed by the per-cell
// visit count k (under persistent exploration every cell's subsequence then
// satisfies the RM conditions); GlobalPolynomial runs on the global clock t;
// Constant deliberately violates square summability and exists as a control.
struct VisitHarmonic {
    double c0 = 1.0;
};
struct GlobalPolynomial {
    double c0 = 1.0;
    double p = 1.0;
};
struct ConstantStep {
    double c0 = 0.5;
};

using StepSchedule = std::variant<VisitHarmonic, GlobalPolynomial, ConstantStep>;

// Throws BadSchedule on invalid parameters (c0 < 0 or p <= 0).
void validate_schedule_params(const StepSchedule& schedule);

// Emitted value, always clamped into [0, 1]. `t` is the global step count,
// `k` the visit count (or accumulated ripple mass) of the updated cell.
double step_size(const StepSchedule& schedule, std::uint64_t t, double k);

// Deterministic per-step upper bound on the masked step size actually applied
// at step t, whatever the trajectory (a first visit can occur at any t).
double step_envelope(const StepSchedule& schedule, std::uint64_t t);

// Upper bound on M = sum_t b_t^2 along one cell's update subsequence, closed
// form where available (pi^2/6 for the harmonic family with c0 = 1). Returns
// +infinity for non-square-summable families.
double squared_sum_bound(const StepSchedule& schedule);

enum class ScheduleVerdict {
    Satisfies,
    ViolatesDivergence,
    ViolatesSquareSummability,
};

const char* to_string(ScheduleVerdict v);

struct ScheduleReport {
    double partial_sum = 0.0;      // sum of c_t over the horizon
    double partial_sum_sq = 0.0;   // sum of c_t^2 over the horizon
    ScheduleVerdict verdict;       // finite-horizon numeric heuristic
    ScheduleVerdict analytic;      // exact classification of the family
};

// Numerically probes the RM conditions over a finite horizon (>= 1e3) and
// reports the analytic verdict alongside.
ScheduleReport validate_schedule(const StepSchedule& schedule,
                                 std::uint64_t horizon);

} // namespace qconv
