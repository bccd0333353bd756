#include "qconv/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qconv/errors.hpp"

namespace qconv {
namespace {

double clamp01(double x) { return std::min(std::max(x, 0.0), 1.0); }

} // namespace

void validate_schedule_params(const StepSchedule& schedule) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if (!(s.c0 >= 0.0) || !std::isfinite(s.c0))
                throw BadSchedule("schedule c0 must be finite and >= 0");
            if constexpr (std::is_same_v<T, GlobalPolynomial>) {
                if (!(s.p > 0.0) || !std::isfinite(s.p))
                    throw BadSchedule("polynomial schedule needs p > 0");
            }
        },
        schedule);
}

double step_size(const StepSchedule& schedule, std::uint64_t t, double k) {
    return std::visit(
        [t, k](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, VisitHarmonic>) {
                return clamp01(s.c0 / (k + 1.0));
            } else if constexpr (std::is_same_v<T, GlobalPolynomial>) {
                return clamp01(s.c0 / std::pow(static_cast<double>(t) + 1.0, s.p));
            } else {
                return clamp01(s.c0);
            }
        },
        schedule);
}

double step_envelope(const StepSchedule& schedule, std::uint64_t t) {
    return std::visit(
        [t](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GlobalPolynomial>) {
                return clamp01(s.c0 / std::pow(static_cast<double>(t) + 1.0, s.p));
            } else {
                return clamp01(s.c0);
            }
        },
        schedule);
}

double squared_sum_bound(const StepSchedule& schedule) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, VisitHarmonic>) {
                return s.c0 * s.c0 * std::numbers::pi * std::numbers::pi / 6.0;
            } else if constexpr (std::is_same_v<T, GlobalPolynomial>) {
                if (!(2.0 * s.p > 1.0)) return kInf;
                // zeta(2p) by direct summation plus an integral tail bound,
                // so the result is an upper bound on the true series.
                const double e = 2.0 * s.p;
                double sum = 0.0;
                const std::uint64_t head = 200'000;
                for (std::uint64_t n = 1; n <= head; ++n)
                    sum += std::pow(static_cast<double>(n), -e);
                sum += std::pow(static_cast<double>(head), 1.0 - e) / (e - 1.0);
                return s.c0 * s.c0 * sum;
            } else {
                return s.c0 == 0.0 ? 0.0 : kInf;
            }
        },
        schedule);
}

const char* to_string(ScheduleVerdict v) {
    switch (v) {
        case ScheduleVerdict::Satisfies: return "satisfies";
        case ScheduleVerdict::ViolatesDivergence: return "violates-divergence";
        default: return "violates-square-summability";
    }
}

namespace {

ScheduleVerdict analytic_verdict(const StepSchedule& schedule) {
    return std::visit(
        [](const auto& s) -> ScheduleVerdict {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, VisitHarmonic>) {
                if (s.c0 == 0.0) return ScheduleVerdict::ViolatesDivergence;
                return ScheduleVerdict::Satisfies;
            } else if constexpr (std::is_same_v<T, GlobalPolynomial>) {
                if (s.c0 == 0.0 || s.p > 1.0) return ScheduleVerdict::ViolatesDivergence;
                if (s.p <= 0.5) return ScheduleVerdict::ViolatesSquareSummability;
                return ScheduleVerdict::Satisfies;
            } else {
                return s.c0 == 0.0 ? ScheduleVerdict::ViolatesDivergence
                                   : ScheduleVerdict::ViolatesSquareSummability;
            }
        },
        schedule);
}

} // namespace

ScheduleReport validate_schedule(const StepSchedule& schedule,
                                 std::uint64_t horizon) {
    validate_schedule_params(schedule);
    if (horizon < 1000)
        throw BadSchedule("validate_schedule needs a horizon of at least 1e3");

    // For the visit-indexed family the probe walks one cell's subsequence,
    // which is the harmonic sequence in its own counter.
    double sum = 0.0, sum_sq = 0.0;
    double last_decile_sum = 0.0, last_decile_sum_sq = 0.0;
    const std::uint64_t tail_start = horizon - horizon / 10;
    for (std::uint64_t t = 0; t < horizon; ++t) {
        double c = step_size(schedule, t, static_cast<double>(t));
        sum += c;
        sum_sq += c * c;
        if (t >= tail_start) {
            last_decile_sum += c;
            last_decile_sum_sq += c * c;
        }
    }

    ScheduleReport report;
    report.partial_sum = sum;
    report.partial_sum_sq = sum_sq;
    report.analytic = analytic_verdict(schedule);

    const bool diverging = sum >= 5.0 && last_decile_sum > 1e-6;
    const bool squares_settled =
        last_decile_sum_sq <= std::max(1e-8, 1e-3 * sum_sq);
    if (!diverging) {
        report.verdict = ScheduleVerdict::ViolatesDivergence;
    } else if (!squares_settled) {
        report.verdict = ScheduleVerdict::ViolatesSquareSummability;
    } else {
        report.verdict = ScheduleVerdict::Satisfies;
    }
    return report;
}

} // namespace qconv
