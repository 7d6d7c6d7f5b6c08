#pragma once

// Numerical building blocks shared by the distribution, Lundberg and
// mixture-tail code. Quadrature and bracketed root finding are thin wrappers
// over Boost.Math so every caller sees one error model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "rtail/error.hpp"

namespace rtail::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadResult
{
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

struct GkPanel
{
    double kronrod, gauss, l1;
};

/// One 31-point Kronrod / 15-point Gauss panel on [a, b].
template <class F>
GkPanel gk31_panel(F& f, double a, double b)
{
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
    using gauss = boost::math::quadrature::gauss<double, 15>;
    const auto& x = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double f0 = f(mid);
    GkPanel p{f0 * wk[0], f0 * wg[0], std::abs(f0) * wk[0]};
    for (std::size_t i = 1; i < x.size(); ++i) {
        double fp = f(mid + half * x[i]), fm = f(mid - half * x[i]);
        p.kronrod += (fp + fm) * wk[i];
        p.l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
        if (i % 2 == 0)
            p.gauss += (fp + fm) * wg[i / 2];
    }
    p.kronrod *= half;
    p.gauss *= half;
    p.l1 *= half;
    return p;
}

template <class F>
double gk31_adaptive(F& f, double a, double b, const GkPanel& panel, double abs_tol,
                     unsigned depth, double& error)
{
    double err = std::abs(panel.kronrod - panel.gauss);
    double floor = 50.0 * std::numeric_limits<double>::epsilon() * panel.l1;
    if (depth == 0 || err <= std::max(abs_tol, floor)) {
        error += err;
        return panel.kronrod;
    }
    double m = 0.5 * (a + b);
    GkPanel left = gk31_panel(f, a, m), right = gk31_panel(f, m, b);
    return gk31_adaptive(f, a, m, left, abs_tol / 2, depth - 1, error) +
           gk31_adaptive(f, m, b, right, abs_tol / 2, depth - 1, error);
}

}  // namespace detail

/**
 * Adaptive Gauss-Kronrod (15/31) on a finite interval [a, b]. Panels are
 * bisected until |K - G| falls below rel_tol times the first estimate of the
 * integral (split evenly between halves) or a roundoff floor.
 */
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 15)
{
    if (!(b > a))
        return {};
    detail::GkPanel top = detail::gk31_panel(f, a, b);
    double scale = std::abs(top.kronrod) > 0.0 ? std::abs(top.kronrod) : top.l1;
    QuadResult r;
    r.value = detail::gk31_adaptive(f, a, b, top, rel_tol * scale, max_depth, r.error);
    return r;
}

/// Double-exponential quadrature; tolerates integrable endpoint singularities.
template <class F>
QuadResult integrate_endpoint_singular(F&& f, double a, double b, double rel_tol = 1e-12)
{
    if (!(b > a))
        return {};
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
    QuadResult r;
    double l1 = 0.0;
    std::size_t levels = 0;
    r.value = integrator.integrate(f, a, b, rel_tol, &r.error, &l1, &levels);
    return r;
}

/**
 * Root of a continuous f on [lo, hi] where f(lo) and f(hi) have opposite
 * signs, refined with TOMS 748 until the bracket is `bits` bits wide.
 */
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double f_lo, double f_hi, int bits = 50,
                       std::uintmax_t max_iter = 200)
{
    if (f_lo == 0.0)
        return lo;
    if (f_hi == 0.0)
        return hi;
    if ((f_lo > 0) == (f_hi > 0))
        throw RootError("solve_bracketed: endpoints do not bracket a root");
    boost::math::tools::eps_tolerance<double> tol(bits);
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, max_iter);
    return 0.5 * (a + b);
}

/// log of the upper incomplete gamma function Gamma(s, x) for any real s and x > 0.
double log_upper_incomplete_gamma(double s, double x);

inline double upper_incomplete_gamma(double s, double x)
{
    return std::exp(log_upper_incomplete_gamma(s, x));
}

/// -expm1(-z)/z, continuous through z = 0.
inline double one_minus_exp_over(double z)
{
    if (std::abs(z) < 1e-8)
        return 1.0 - 0.5 * z + z * z / 6.0;
    return -std::expm1(-z) / z;
}

/**
 * Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
 * Preserves monotonicity of the data; evaluation outside the node range
 * clamps to the end intervals.
 */
class MonotoneCubic
{
  public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;
    bool empty() const noexcept { return x_.size() < 2; }
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

  private:
    std::vector<double> x_, y_, d_;
};

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
template <class Cdf>
double ks_distance(std::vector<double> samples, Cdf&& cdf)
{
    if (samples.empty())
        return 0.0;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return std::clamp(d, 0.0, 1.0);
}

/// Asymptotic Kolmogorov p-value for distance d at sample size n.
double ks_pvalue(double d, std::size_t n);

/// Upper-tail p-value of a chi-square statistic.
double chi_square_pvalue(double statistic, double dof);

/// Two-sided Clopper-Pearson interval for k successes out of n.
std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence);

}  // namespace rtail::numerics
