#pragma once

// Small independent reference routines used as test oracles. They share no
// code with the library's numerics.

#include <cmath>
#include <functional>

namespace oracle {

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000)
{
    if (n % 2)
        ++n;
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Plain bisection for an increasing or decreasing continuous function.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200)
{
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Lundberg root for G = Exponential(rate). The defining equation
/// rate (1 - e^-(rate - g) t) = rate - g is bisected in the fixed-point form
/// g = rate e^-(rate - g) t, which stays accurate when g is tiny. g = rate is a
/// spurious solution, so the bracket sits on the side where the root lives.
inline double exponential_gamma_root(double rate, double t)
{
    auto phi = [&](double g) { return g - rate * std::exp(-(rate - g) * t); };
    if (rate * t == 1.0)
        return rate;
    if (rate * t > 1.0)
        return bisect(phi, 0.0, rate * (1.0 - 1e-9), 400);
    double hi = 2.0 * rate;
    while (phi(hi) > 0)
        hi *= 2;
    return bisect(phi, rate * (1.0 + 1e-9), hi, 400);
}

}  // namespace oracle
