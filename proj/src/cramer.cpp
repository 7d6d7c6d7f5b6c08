#include "rtail/cramer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

#include "rtail/error.hpp"
#include "rtail/numerics.hpp"
#include "rtail/parallel.hpp"

namespace rtail {

namespace {

constexpr int kTableCells = 4096;
constexpr int kMaxDoublings = 60;

// expm1(z) / z, continuous through 0.
double expm1_over(double z)
{
    if (std::abs(z) < 1e-8)
        return 1.0 + 0.5 * z;
    return std::expm1(z) / z;
}

// (1 - e^-z (1 + z)) / z^2, continuous through 0.
double second_moment_kernel(double z)
{
    if (std::abs(z) < 1e-3)
        return 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0;
    return (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
}

void check_t(const DistributionSpec& G, double t)
{
    if (!(t > 0.0) || !std::isfinite(t))
        throw InvalidArgument("task length t must be positive and finite");
    if (!has_density(G))
        throw InvalidArgument("PointMass not permitted in role G");
}

double uniform_mgf(const Uniform& u, double t, double gamma)
{
    double m = std::min(t, u.upper);
    if (m <= u.lower)
        return 0.0;
    double w = m - u.lower;
    return std::exp(gamma * u.lower) * w * expm1_over(gamma * w) / (u.upper - u.lower);
}

// int_lo^hi h(y) dy over a range that may span many decades. Far from the lower
// end the integral is taken in log y; a lower end at 0 gets its own short piece,
// with double-exponential quadrature when h may be singular there.
template <class H>
double integrate_span(H&& h, double lo, double hi, bool singular_at_zero)
{
    if (!(hi > lo))
        return 0.0;
    double total = 0.0;
    double m = lo;
    if (lo == 0.0) {
        m = hi * 1e-6;
        total += singular_at_zero ? numerics::integrate_endpoint_singular(h, 0.0, m, 1e-13).value
                                  : numerics::integrate(h, 0.0, m, 1e-13).value;
    }
    if (hi / m <= 16.0)
        return total + numerics::integrate(h, m, hi, 1e-13).value;
    auto in_log = [&](double s) {
        double y = std::exp(s);
        return h(y) * y;
    };
    return total + numerics::integrate(in_log, std::log(m), std::log(hi), 1e-13).value;
}

// int_lo^t h(y) g(y) dy with the density route.
template <class H>
double density_integral(const DistributionSpec& G, double t, H&& h)
{
    double lo = support(G).lower;
    double hi = std::min(t, support(G).upper);
    auto integrand = [&](double y) { return h(y) * density(G, y); };
    return integrate_span(integrand, lo, hi, true);
}

}  // namespace

double truncated_mgf(const DistributionSpec& G, double t, double gamma)
{
    check_t(G, t);
    if (!(gamma >= 0.0))
        throw InvalidArgument("truncated_mgf: gamma must be >= 0");
    if (cdf(G, t) <= 0.0)
        throw InvalidArgument("truncated_mgf: G has no mass on (0, t)");
    if (const auto* e = std::get_if<Exponential>(&G.family())) {
        double delta = e->rate - gamma;
        return e->rate * t * numerics::one_minus_exp_over(delta * t);
    }
    if (const auto* u = std::get_if<Uniform>(&G.family()))
        return uniform_mgf(*u, t, gamma);
    return density_integral(G, t, [gamma](double y) { return std::exp(gamma * y); });
}

double truncated_mgf_excess(const DistributionSpec& G, double t, double gamma)
{
    if (const auto* e = std::get_if<Exponential>(&G.family())) {
        // gamma int_0^t e^(-delta y) dy - e^(-delta t)
        double delta = e->rate - gamma;
        return gamma * t * numerics::one_minus_exp_over(delta * t) - std::exp(-delta * t);
    }
    if (const auto* u = std::get_if<Uniform>(&G.family()))
        return uniform_mgf(*u, t, gamma) - 1.0;

    // Integration by parts: gamma int_0^t e^(gamma y) Gbar(y) dy - e^(gamma t) Gbar(t).
    double lo = std::min(support(G).lower, t);
    double head = lo * expm1_over(gamma * lo);
    double body = 0.0;
    if (t > lo) {
        auto integrand = [&](double y) { return std::exp(gamma * y) * tail(G, y); };
        body = integrate_span(integrand, lo, t, false);
    }
    return gamma * (head + body) - std::exp(gamma * t) * tail(G, t);
}

double tilted_first_moment(const DistributionSpec& G, double t, double gamma)
{
    check_t(G, t);
    if (const auto* e = std::get_if<Exponential>(&G.family())) {
        double delta = e->rate - gamma;
        return e->rate * t * t * second_moment_kernel(delta * t);
    }
    if (const auto* u = std::get_if<Uniform>(&G.family())) {
        double m = std::min(t, u->upper);
        if (m <= u->lower)
            return 0.0;
        if (gamma * m > 1e-2) {
            auto antiderivative = [gamma](double y) {
                return std::exp(gamma * y) * (gamma * y - 1.0) / (gamma * gamma);
            };
            return (antiderivative(m) - antiderivative(u->lower)) / (u->upper - u->lower);
        }
        auto integrand = [&](double y) { return y * std::exp(gamma * y); };
        return numerics::integrate(integrand, u->lower, m, 1e-13).value / (u->upper - u->lower);
    }
    return density_integral(G, t, [gamma](double y) { return y * std::exp(gamma * y); });
}

LundbergSolution lundberg_root(const DistributionSpec& G, double t)
{
    check_t(G, t);
    double gbar = tail(G, t);
    if (!(gbar > 0.0))
        throw RootError("Lundberg root does not exist: Gbar(t) = 0 at t = " + format_double(t) +
                        " (use the bounded-support machinery)");
    if (!(gbar < 1.0))
        throw RootError("Lundberg root does not exist: G(t) = 0 at t = " + format_double(t));

    auto f = [&](double g) {
        double v = truncated_mgf_excess(G, t, g);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    double lo = 0.0, f_lo = -gbar;
    double hi = 1.0 / t, f_hi = f(hi);
    int doublings = 0;
    while (f_hi <= 0.0) {
        if (++doublings > kMaxDoublings)
            throw RootError("Lundberg root: no sign change after 60 bracket doublings at t = " +
                            format_double(t));
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi);
    }

    LundbergSolution sol;
    sol.t = t;
    sol.gamma = numerics::solve_bracketed(f, lo, hi, f_lo, f_hi, 52);
    sol.residual = std::abs(truncated_mgf_excess(G, t, sol.gamma));
    sol.B = tilted_first_moment(G, t, sol.gamma);
    sol.C = gbar / (sol.gamma * sol.B);
    if (!(sol.gamma > 0.0 && sol.B > 0.0 && sol.C > 0.0 && std::isfinite(sol.C)))
        throw RootError("Lundberg root: degenerate solution at t = " + format_double(t));
    return sol;
}

std::pair<double, double> lundberg_bounds(const LundbergSolution& sol, double u)
{
    u = std::max(u, 0.0);
    double upper = std::min(1.0, std::exp(-sol.gamma * u));
    double lower = std::exp(-sol.gamma * (sol.t + u));
    return {std::min(lower, upper), upper};
}

double cl_tail(const LundbergSolution& sol, double u)
{
    return std::min(1.0, sol.C * std::exp(-sol.gamma * std::max(u, 0.0)));
}

double gamma_small_tail_asymptote(const DistributionSpec& G, double t)
{
    double m = mean(G);
    if (!std::isfinite(m))
        throw InvalidArgument("gamma_small_tail_asymptote: G has infinite mean");
    return tail(G, t) / m;
}

// Tilted sampler ---------------------------------------------------------------

TiltedIncrementSampler::TiltedIncrementSampler(const DistributionSpec& G,
                                               const LundbergSolution& sol, bool force_table)
    : G_(G), sol_(sol), kind_(Kind::Table)
{
    check_t(G, sol.t);
    g_t_ = rtail::cdf(G, sol.t);
    if (!force_table) {
        if (const auto* e = std::get_if<Exponential>(&G.family())) {
            kind_ = Kind::Exponential;
            rate_ = e->rate;
            delta_ = e->rate - sol.gamma;
            return;
        }
        if (const auto* u = std::get_if<Uniform>(&G.family())) {
            kind_ = Kind::Uniform;
            lower_ = u->lower;
            width_ = u->upper - u->lower;
            return;
        }
    }

    // K(u) = int_0^u G(t) e^(gamma y(w)) dw with y(w) = quantile(G, w G(t)).
    const double lo = support(G).lower;
    auto y_of = [&](double u) {
        double p = u * g_t_;
        if (!(p > 0.0))
            return lo;
        if (u >= 1.0)
            return sol.t;
        return std::min(quantile(G, p), sol.t);
    };
    auto slope = [&](double u) { return g_t_ * std::exp(sol.gamma * y_of(u)); };

    u_.resize(kTableCells + 1);
    k_.resize(kTableCells + 1);
    dk_.resize(kTableCells + 1);
    double acc = 0.0;
    for (int j = 0; j <= kTableCells; ++j) {
        u_[j] = static_cast<double>(j) / kTableCells;
        dk_[j] = slope(u_[j]);
        if (j > 0)
            acc += boost::math::quadrature::gauss<double, 8>::integrate(slope, u_[j - 1], u_[j]);
        k_[j] = acc;
    }
    for (int j = 0; j <= kTableCells; ++j) {
        k_[j] /= acc;
        dk_[j] /= acc;
    }
}

double TiltedIncrementSampler::table_u(double v) const
{
    auto it = std::upper_bound(k_.begin(), k_.end(), v);
    std::size_t j = it == k_.begin() ? 0 : static_cast<std::size_t>(it - k_.begin()) - 1;
    j = std::min<std::size_t>(j, kTableCells - 1);
    const double h = u_[j + 1] - u_[j];
    const double k0 = k_[j], k1 = k_[j + 1], d0 = dk_[j] * h, d1 = dk_[j + 1] * h;
    auto hermite = [&](double s) {
        double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * k0 + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * k1 +
               (s3 - s2) * d1;
    };
    auto hermite_slope = [&](double s) {
        double s2 = s * s;
        return (6 * s2 - 6 * s) * k0 + (3 * s2 - 4 * s + 1) * d0 + (-6 * s2 + 6 * s) * k1 +
               (3 * s2 - 2 * s) * d1;
    };
    double a = 0.0, b = 1.0;
    double s = (k1 > k0) ? std::clamp((v - k0) / (k1 - k0), 0.0, 1.0) : 0.5;
    for (int iter = 0; iter < 60; ++iter) {
        double r = hermite(s) - v;
        if (r > 0)
            b = s;
        else
            a = s;
        double d = hermite_slope(s);
        double next = d > 0 ? s - r / d : 0.5 * (a + b);
        if (!(next > a && next < b))
            next = 0.5 * (a + b);
        if (std::abs(next - s) < 1e-15)
            break;
        s = next;
    }
    return u_[j] + s * h;
}

double TiltedIncrementSampler::invert(double v) const
{
    switch (kind_) {
    case Kind::Exponential: {
        // Tilted CDF: rate (1 - e^(-delta y)) / delta.
        double w = v * delta_ / rate_;
        if (std::abs(w) < 1e-8)
            return v / rate_ * (1.0 + 0.5 * w);
        return -std::log1p(-w) / delta_;
    }
    case Kind::Uniform: {
        // Tilted CDF: (e^(gamma y) - e^(gamma a)) / (gamma width).
        double z = v * sol_.gamma * width_ * std::exp(-sol_.gamma * lower_);
        if (std::abs(z) < 1e-8)
            return lower_ + v * width_ * std::exp(-sol_.gamma * lower_) * (1.0 - 0.5 * z);
        return lower_ + std::log1p(z) / sol_.gamma;
    }
    case Kind::Table:
        break;
    }
    double u = table_u(v);
    double p = u * g_t_;
    if (!(p > 0.0))
        return support(G_).lower;
    if (u >= 1.0)
        return sol_.t;
    return std::min(quantile(G_, p), sol_.t);
}

double TiltedIncrementSampler::cdf(double y) const
{
    if (y <= 0.0)
        return 0.0;
    if (y >= sol_.t)
        return 1.0;
    switch (kind_) {
    case Kind::Exponential:
        return rate_ * y * numerics::one_minus_exp_over(delta_ * y);
    case Kind::Uniform: {
        if (y <= lower_)
            return 0.0;
        double w = y - lower_;
        return std::exp(sol_.gamma * lower_) * w * expm1_over(sol_.gamma * w) / width_;
    }
    case Kind::Table:
        break;
    }
    double u = std::clamp(rtail::cdf(G_, y) / g_t_, 0.0, 1.0);
    auto it = std::upper_bound(u_.begin(), u_.end(), u);
    std::size_t j = it == u_.begin() ? 0 : static_cast<std::size_t>(it - u_.begin()) - 1;
    j = std::min<std::size_t>(j, kTableCells - 1);
    double h = u_[j + 1] - u_[j];
    double s = (u - u_[j]) / h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * k_[j] + (s3 - 2 * s2 + s) * h * dk_[j] +
           (-2 * s3 + 3 * s2) * k_[j + 1] + (s3 - s2) * h * dk_[j + 1];
}

// Estimators -------------------------------------------------------------------

TailEstimate is_geometric_tail(const DistributionSpec& G, double t, double u, std::uint64_t n,
                               const RngStream& rng, unsigned workers)
{
    if (!(u >= 0.0))
        throw InvalidArgument("is_geometric_tail: u must be >= 0");
    if (n < 1)
        throw InvalidArgument("is_geometric_tail: n must be >= 1");
    const LundbergSolution sol = lundberg_root(G, t);
    const TiltedIncrementSampler sampler(G, sol);

    Moments m = run_blocks<Moments>(
        n, workers, rng,
        [&](std::uint64_t, std::uint64_t count, RngStream& sub) {
            Moments part;
            for (std::uint64_t i = 0; i < count; ++i) {
                double s = 0.0;
                do {
                    s += sampler(sub);
                } while (s <= u);
                part.add(std::exp(-sol.gamma * s));
            }
            return part;
        },
        [](Moments& acc, const Moments& p) { acc.merge(p); });

    TailEstimate est;
    est.x = u;
    est.point = std::clamp(m.mean(), 0.0, 1.0);
    est.std_error = m.std_error();
    std::tie(est.lower, est.upper) = lundberg_bounds(sol, u);
    est.n_used = m.count;
    return est;
}

double sample_geometric_sum(const DistributionSpec& G, double t, RngStream& rng)
{
    constexpr std::uint64_t kGuard = 1'000'000'000ULL;
    double s = 0.0;
    for (std::uint64_t i = 0; i < kGuard; ++i) {
        double u = sample(G, rng);
        if (u > t)
            return s;
        s += u;
    }
    throw SimulationGuard("geometric sum exceeded 1e9 failure draws at t = " + format_double(t));
}

double renyi_statistic(const DistributionSpec& G, double t, std::uint64_t n, const RngStream& rng,
                       unsigned workers)
{
    check_t(G, t);
    if (n < 1)
        throw InvalidArgument("renyi_statistic: n must be >= 1");
    const double scale = gamma_small_tail_asymptote(G, t);
    auto samples = run_blocks<std::vector<double>>(
        n, workers, rng,
        [&](std::uint64_t, std::uint64_t count, RngStream& sub) {
            std::vector<double> part(count);
            for (auto& v : part)
                v = scale * sample_geometric_sum(G, t, sub);
            return part;
        },
        [](std::vector<double>& acc, const std::vector<double>& p) {
            acc.insert(acc.end(), p.begin(), p.end());
        });
    return numerics::ks_distance(std::move(samples), [](double z) { return -std::expm1(-z); });
}

}  // namespace rtail
