#include "qconv/recurrences.hpp"

#include <cmath>

#include "qconv/errors.hpp"

namespace qconv {
namespace {

void check_gamma(double gamma) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw BadGamma("recurrence gamma must lie strictly inside (0, 1)");
}

void check_power_schedule(const PowerSchedule& a) {
    // a_n is nonincreasing in n for p >= 0, so a_0 = c0 is the maximum.
    if (!(a.c0 >= 0.0) || a.c0 > 1.0 || !(a.p >= 0.0) || !std::isfinite(a.p))
        throw BadSchedule("power schedule must emit values in [0, 1]");
}

long double schedule_at_l(const PowerSchedule& a, std::uint64_t n) {
    return static_cast<long double>(a.c0) /
           std::pow(static_cast<long double>(n) + 1.0L, static_cast<long double>(a.p));
}

long double perturbation_at_l(const PowerPerturbation& c, std::uint64_t n) {
    return static_cast<long double>(c.scale) /
           std::pow(static_cast<long double>(n) + 1.0L, static_cast<long double>(c.q));
}

struct DevTracker {
    double max_abs = 0.0;
    double max_rel = 0.0;
    void update(long double x, long double o) {
        double dev = static_cast<double>(std::fabs(x - o));
        max_abs = std::max(max_abs, dev);
        double denom = std::max(static_cast<double>(std::fabs(o)), 1e-300);
        max_rel = std::max(max_rel, dev / denom);
    }
};

bool should_record(std::uint64_t n, std::uint64_t N, std::uint64_t stride) {
    return n % stride == 0 || n == N;
}

} // namespace

double power_schedule_at(const PowerSchedule& a, std::uint64_t n) {
    return static_cast<double>(schedule_at_l(a, n));
}

double power_perturbation_at(const PowerPerturbation& c, std::uint64_t n) {
    return static_cast<double>(perturbation_at_l(c, n));
}

RecurrenceResult recurrence_lemma3(double x0, double gamma,
                                   const PowerSchedule& a, std::uint64_t N,
                                   std::uint64_t stride, double mark_tol) {
    check_gamma(gamma);
    check_power_schedule(a);
    const long double g = gamma;

    RecurrenceResult res;
    res.limit_analytic = 0.0;
    long double x = x0;
    long double oracle = x0;
    DevTracker dev;

    res.n.push_back(0);
    res.x.push_back(static_cast<double>(x));
    res.oracle.push_back(static_cast<double>(oracle));
    if (std::fabs(x0) < mark_tol) res.n_at_tolerance = 0;

    for (std::uint64_t n = 0; n < N; ++n) {
        const long double an = schedule_at_l(a, n);
        long double next = (1.0L - an) * x + g * an * std::fabs(x);
        if (next > x) res.monotone_nonincreasing = false;
        x = next;
        // Exact one-multiply form of the same step: the claimed closed form.
        oracle *= (oracle >= 0.0L) ? (1.0L - an * (1.0L - g))
                                   : (1.0L - an * (1.0L + g));
        dev.update(x, oracle);
        if (!res.n_at_tolerance &&
            std::fabs(static_cast<double>(x)) < mark_tol)
            res.n_at_tolerance = n + 1;
        if (should_record(n + 1, N, stride)) {
            res.n.push_back(n + 1);
            res.x.push_back(static_cast<double>(x));
            res.oracle.push_back(static_cast<double>(oracle));
        }
    }
    res.limit_estimate = static_cast<double>(x);
    res.max_abs_dev = dev.max_abs;
    res.max_rel_dev = dev.max_rel;
    res.oracle_valid_through = N;
    return res;
}

RecurrenceResult recurrence_lemma4(double x0, double gamma, double eps,
                                   const PowerSchedule& a, std::uint64_t N,
                                   std::uint64_t stride, double mark_tol) {
    check_gamma(gamma);
    check_power_schedule(a);
    if (!(eps >= 0.0)) throw ConfigError("lemma 4 needs eps >= 0");
    const long double g = gamma;
    const long double limit =
        static_cast<long double>(eps) * g / (1.0L - g);

    RecurrenceResult res;
    res.limit_analytic = static_cast<double>(limit);
    long double x = x0;
    long double y_oracle = static_cast<long double>(x0) - limit;
    bool oracle_valid = true;
    res.oracle_valid_through = N;
    DevTracker dev;

    res.n.push_back(0);
    res.x.push_back(static_cast<double>(x));
    res.oracle.push_back(static_cast<double>(limit + y_oracle));
    if (std::fabs(x0 - res.limit_analytic) < mark_tol) res.n_at_tolerance = 0;

    for (std::uint64_t n = 0; n < N; ++n) {
        const long double an = schedule_at_l(a, n);
        if (x + eps < 0.0L && oracle_valid) {
            oracle_valid = false;
            res.oracle_valid_through = n;
        }
        long double next = (1.0L - an) * x + g * an * std::fabs(x + eps);
        if (next > x) res.monotone_nonincreasing = false;
        x = next;
        y_oracle *= (1.0L - an * (1.0L - g));
        if (oracle_valid) dev.update(x, limit + y_oracle);
        if (!res.n_at_tolerance &&
            std::fabs(static_cast<double>(x) - res.limit_analytic) < mark_tol)
            res.n_at_tolerance = n + 1;
        if (should_record(n + 1, N, stride)) {
            res.n.push_back(n + 1);
            res.x.push_back(static_cast<double>(x));
            res.oracle.push_back(static_cast<double>(limit + y_oracle));
        }
    }
    res.limit_estimate = static_cast<double>(x);
    res.max_abs_dev = dev.max_abs;
    res.max_rel_dev = dev.max_rel;
    return res;
}

Lemma5Result recurrence_lemma5(double x0, double gamma, const PowerSchedule& a,
                               const PowerPerturbation& c, std::uint64_t N,
                               std::uint64_t stride) {
    check_gamma(gamma);
    check_power_schedule(a);
    if (!(c.scale >= 0.0) || !(c.q >= 0.0))
        throw ConfigError("lemma 5 perturbation needs scale >= 0, q >= 0");
    const long double g = gamma;
    constexpr double kVanishTol = 1e-3;

    Lemma5Result out;
    out.ladder = {LadderCrossing{0.1, std::nullopt, false},
                  LadderCrossing{0.01, std::nullopt, false},
                  LadderCrossing{0.001, std::nullopt, false}};
    const bool nominally_vanishing = c.q > 0.0;
    out.perturbation_vanished =
        power_perturbation_at(c, N) <= kVanishTol || c.scale == 0.0;
    if (nominally_vanishing && !out.perturbation_vanished)
        throw NonVanishingPerturbation(
            "perturbation has not decayed below tolerance within N");

    out.n1 = N / 2;
    out.eps1 = nominally_vanishing ? power_perturbation_at(c, out.n1 + 1)
                                   : static_cast<double>(c.scale);

    RecurrenceResult& res = out.base;
    res.limit_analytic = 0.0;
    long double x = x0;
    long double z = 0.0;
    bool z_active = false;
    double min_margin = 0.0;
    bool margin_set = false;

    res.n.push_back(0);
    res.x.push_back(static_cast<double>(x));
    res.oracle.push_back(static_cast<double>(x));
    for (auto& rung : out.ladder)
        if (std::fabs(x0) < rung.tol) rung.first_crossing = 0;

    for (std::uint64_t n = 0; n < N; ++n) {
        const long double an = schedule_at_l(a, n);
        const long double cn = perturbation_at_l(c, n);
        long double next = (1.0L - an) * x + g * an * std::fabs(x + cn);
        if (next > x) res.monotone_nonincreasing = false;
        x = next;

        if (n + 1 == out.n1) {
            z = x;
            z_active = true;
        } else if (z_active) {
            z = (1.0L - an) * z +
                g * an * std::fabs(z + static_cast<long double>(out.eps1));
            double margin = static_cast<double>(z - std::fabs(x));
            if (!margin_set || margin < min_margin) {
                min_margin = margin;
                margin_set = true;
            }
            if (margin < -1e-12) out.envelope_ok = false;
        }

        double ax = std::fabs(static_cast<double>(x));
        for (auto& rung : out.ladder) {
            if (!rung.first_crossing && ax < rung.tol)
                rung.first_crossing = n + 1;
            else if (rung.first_crossing && ax >= rung.tol)
                rung.recrossed = true;
        }

        if (should_record(n + 1, N, stride)) {
            res.n.push_back(n + 1);
            res.x.push_back(static_cast<double>(x));
            res.oracle.push_back(
                static_cast<double>(z_active ? z : x));
        }
    }
    res.limit_estimate = static_cast<double>(x);
    res.oracle_valid_through = N;
    out.envelope_min_margin = margin_set ? min_margin : 0.0;
    return out;
}

} // namespace qconv
