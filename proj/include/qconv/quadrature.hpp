#pragma once

#include <functional>

namespace qconv {

// Adaptive Simpson on [a, b]. Handles integrands with isolated kinks (the
// max over actions of piecewise-smooth means) by recursive bisection down to
// the requested absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol);

// Iterated adaptive Simpson over [ax, bx] x [ay, by].
double integrate2d(const std::function<double(double, double)>& f, double ax,
                   double bx, double ay, double by, double tol);

} // namespace qconv
