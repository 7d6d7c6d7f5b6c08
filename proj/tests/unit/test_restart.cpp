#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "rtail/error.hpp"
#include "rtail/numerics.hpp"
#include "rtail/restart.hpp"

using namespace rtail;

namespace {

RunConfig config(DistributionSpec F, DistributionSpec G, std::uint64_t n, std::uint64_t seed,
                 unsigned workers = 1)
{
    RunConfig c;
    c.F = F;
    c.G = G;
    c.n = n;
    c.seed = seed;
    c.workers = workers;
    return c;
}

// Mixture integral for F = G = Exponential(1) with roots and B in closed form.
double exp_exp_mixture(double x)
{
    auto inner = [&](double t) {
        if (t <= 0.0)
            return 0.0;
        double g = oracle::exponential_gamma_root(1.0, t), d = 1.0 - g;
        // B = int_0^t y e^(-d y) dy; the series avoids cancellation when d t is small.
        double s = d * t, B = 0.0;
        if (std::abs(s) < 0.5) {
            double term = 1.0;
            for (int k = 0; k < 30; ++k) {
                B += term / (k + 2);
                term *= -s / (k + 1);
            }
            B *= t * t;
        } else {
            B = (1.0 - std::exp(-s) * (1 + s)) / (d * d);
        }
        double C = std::exp(-t) / (g * B);
        double u = x - t;
        double lo = std::exp(-g * t - g * u), hi = std::min(1.0, std::exp(-g * u));
        return std::clamp(C * std::exp(-g * u), lo, hi) * std::exp(-t);
    };
    return std::exp(-x) + oracle::simpson(inner, 0.0, x, 20000);
}

}  // namespace

TEST_CASE("diagonal pmf of N sums to one")
{
    double s = 0.0;
    for (std::uint64_t n = 0; n < 1000; ++n)
        s += n_pmf_diagonal(n);
    CHECK(s == doctest::Approx(1.0 - 1.0 / 1001.0).epsilon(1e-12));
    CHECK(n_pmf_diagonal(0) == 0.5);
}

TEST_CASE("one run decomposes as X = T + S")
{
    RngStream rng(1);
    for (int i = 0; i < 1000; ++i) {
        auto r = run_once(DistributionSpec::exponential(1), DistributionSpec::exponential(2), rng);
        CHECK(r.X == r.T + r.S);
        CHECK(r.S >= 0.0);
        CHECK(r.S <= static_cast<double>(r.N) * r.T);
        if (r.N == 0)
            CHECK(r.S == 0.0);
    }
    RngStream r2(2);
    CHECK_THROWS_AS(
        run_once(DistributionSpec::uniform(2, 3), DistributionSpec::uniform(0, 1), r2), SimulationGuard);
}

TEST_CASE("simulation is reproducible and worker-count independent")
{
    auto c = config(DistributionSpec::exponential(1), DistributionSpec::exponential(1), 50000, 17);
    c.x_grid = parse_x_grid("1, 10, 100");
    auto a = simulate(c);
    c.workers = 5;
    auto b = simulate(c);
    CHECK(a == b);
    c.seed = 18;
    CHECK_FALSE(a == simulate(c));
}

TEST_CASE("empirical N histogram matches the diagonal law")
{
    auto c = config(DistributionSpec::weibull(0.7, 1), DistributionSpec::weibull(0.7, 1), 200000, 3, 4);
    auto s = simulate(c, 10);
    double chi = 0.0;
    double rest = 1.0;
    for (std::uint64_t k = 0; k <= 10; ++k) {
        double e = n_pmf_diagonal(k) * s.n;
        chi += std::pow(double(s.n_histogram[k]) - e, 2) / e;
        rest -= n_pmf_diagonal(k);
    }
    double e = rest * s.n;
    chi += std::pow(double(s.n_histogram[11]) - e, 2) / e;
    CHECK(numerics::chi_square_pvalue(chi, 11) > 1e-4);
}

TEST_CASE("semi-analytic tail equals an independent evaluation of the mixture integral")
{
    SemiAnalyticTail sa(DistributionSpec::exponential(1), DistributionSpec::exponential(1));
    for (double x : {2.0, 10.0, 50.0}) {
        CAPTURE(x);
        auto e = sa(x);
        CHECK(e.point == doctest::Approx(exp_exp_mixture(x)).epsilon(1e-6));
        CHECK(e.lower <= e.point);
        CHECK(e.point <= e.upper);
    }
}

TEST_CASE("semi-analytic envelopes contain the simulated tail")
{
    auto F = DistributionSpec::gamma(2, 2), G = DistributionSpec::exponential(1);
    auto c = config(F, G, 400000, 8, 4);
    auto crude = crude_tail_grid(c, {3.0, 8.0});
    for (const auto& cr : crude) {
        auto e = semi_analytic_tail(F, G, cr.x);
        CHECK(e.lower <= cr.upper);
        CHECK(e.upper >= cr.lower);
    }
}

TEST_CASE("point-mass F reduces to the Cramer-Lundberg tail of S(t0)")
{
    auto G = DistributionSpec::exponential(1);
    auto sol = lundberg_root(G, 2.0);
    auto e = semi_analytic_tail(DistributionSpec::point_mass(2.0), G, 12.0);
    CHECK(e.point == doctest::Approx(sol.C * std::exp(-sol.gamma * 10.0)).epsilon(1e-12));
    CHECK(semi_analytic_tail(DistributionSpec::point_mass(2.0), G, 1.0).point == 1.0);
}

TEST_CASE("I+ <= I- and they bracket the tail for large x")
{
    auto F = DistributionSpec::exponential(2), G = DistributionSpec::exponential(1);
    const double x = 1e3, eps = 0.1;
    auto [im, ip] = i_pm(F, G, x, eps, 0.0);
    CHECK(ip < im);
    double h = semi_analytic_tail(F, G, x).point;
    CHECK(h >= (1 - eps) * ip);
    CHECK(h <= (1 + eps) * im);
    CHECK_THROWS_AS(i_pm(F, DistributionSpec::pareto(1, 2), x, eps, 0.0), InvalidArgument);
}

TEST_CASE("importance sampling agrees with crude simulation and the mixture integral")
{
    auto F = DistributionSpec::exponential(1), G = DistributionSpec::exponential(1);
    auto c = config(F, G, 1000000, 21, 4);
    auto crude = crude_tail(c, 20.0);
    auto is = importance_tail(F, G, 20.0, 100000, RngStream(22), 4);
    CHECK(std::abs(is.point - crude.point) < 4 * std::hypot(is.std_error, crude.std_error));
    auto far = importance_tail(F, G, 300.0, 100000, RngStream(23), 4);
    auto sa = semi_analytic_tail(F, G, 300.0);
    CHECK(far.point == doctest::Approx(sa.point).epsilon(0.03));
    auto same = importance_tail(F, G, 300.0, 100000, RngStream(23), 1);
    CHECK(same.point == far.point);
}

TEST_CASE("coupled runs respect stochastic order of F")
{
    RngStream rng(4);
    auto G = DistributionSpec::exponential(1);
    CHECK(coupled_order_check(DistributionSpec::exponential(2), DistributionSpec::exponential(1), G,
                              20000, rng) == 0);
    CHECK_THROWS_AS(coupled_order_check(DistributionSpec::exponential(1),
                                        DistributionSpec::exponential(2), G, 10, rng),
                    InvalidArgument);
}

TEST_CASE("makespan of k subjobs has tail 1 - (1 - p)^k")
{
    auto F = DistributionSpec::exponential(1), G = DistributionSpec::exponential(1);
    auto one = parallel_makespan(F, G, 1, 100000, RngStream(9), 3);
    auto four = parallel_makespan(F, G, 4, 100000, RngStream(10), 3);
    auto frac = [](const std::vector<double>& v, double x) {
        return double(std::count_if(v.begin(), v.end(), [&](double m) { return m > x; })) / v.size();
    };
    double p = frac(one, 5.0);
    CHECK(frac(four, 5.0) == doctest::Approx(1 - std::pow(1 - p, 4)).epsilon(0.03));
    CHECK(parallel_makespan(F, G, 4, 1000, RngStream(10), 1) ==
          parallel_makespan(F, G, 4, 1000, RngStream(10), 2));
}
