#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rtail/cramer.hpp"
#include "rtail/error.hpp"
#include "rtail/parallel.hpp"

using namespace rtail;

TEST_CASE("Lundberg root for exponential G matches a bisection oracle")
{
    for (double rate : {0.5, 1.0, 3.0})
        for (double t : {0.3, 0.5, 2.0, 8.0, 20.0}) {
            CAPTURE(rate);
            CAPTURE(t);
            auto sol = lundberg_root(DistributionSpec::exponential(rate), t);
            double ref = oracle::exponential_gamma_root(rate, t);
            CHECK(std::abs(sol.gamma - ref) <= 1e-10 * std::max(1.0, ref));
            CHECK(std::abs(sol.residual) <= 1e-10);
        }
    auto s = lundberg_root(DistributionSpec::exponential(1.0), 0.5);
    CHECK(s.gamma == doctest::Approx(3.51286241725).epsilon(1e-10));
}

TEST_CASE("Lundberg root for uniform G matches a bisection oracle")
{
    auto G = DistributionSpec::uniform(0.0, 1.0);
    for (double t : {0.2, 0.5, 0.9}) {
        double ref = oracle::bisect([&](double g) { return std::expm1(g * t) / g - 1.0; }, 1e-12, 100.0);
        CHECK(lundberg_root(G, t).gamma == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK(lundberg_root(G, 0.5).gamma == doctest::Approx(2.51286241725).epsilon(1e-10));
}

TEST_CASE("root, B and C satisfy their defining integrals for other families")
{
    for (const auto& G : {DistributionSpec::weibull(0.7, 1.0), DistributionSpec::gamma(2.0, 1.5),
                          DistributionSpec::pareto(2.0, 1.0), DistributionSpec::lognormal(0, 0.5)}) {
        CAPTURE(to_string(G));
        double t = quantile(G, 0.9);
        auto sol = lundberg_root(G, t);
        double lo = support(G).lower;
        // y = lo + v^2 removes the integrable singularity of some densities at lo.
        auto moment = [&](int k) {
            return oracle::simpson(
                [&](double v) {
                    if (v == 0.0)
                        return 0.0;
                    double y = lo + v * v;
                    return std::pow(y, k) * std::exp(sol.gamma * y) * density(G, y) * 2 * v;
                },
                0.0, std::sqrt(t - lo), 400000);
        };
        double mgf = moment(0), b = moment(1);
        CHECK(mgf == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(sol.B == doctest::Approx(b).epsilon(1e-6));
        CHECK(sol.C == doctest::Approx(tail(G, t) / (sol.gamma * sol.B)).epsilon(1e-12));
    }
}

TEST_CASE("root errors")
{
    CHECK_THROWS_AS(lundberg_root(DistributionSpec::uniform(1.0, 2.0), 0.5), RootError);
    CHECK_THROWS_AS(lundberg_root(DistributionSpec::uniform(0.0, 1.0), 1.0), RootError);
}

TEST_CASE("gamma(t) ~ mu Gbar(t) as t grows")
{
    auto G = DistributionSpec::exponential(1.0);
    double prev = 1e9;
    for (double t : {5.0, 10.0, 20.0, 30.0}) {
        double r = lundberg_root(G, t).gamma / gamma_small_tail_asymptote(G, t);
        CHECK(r >= 1.0);
        CHECK(r < prev);
        prev = r;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Lundberg bounds bracket the Cramer-Lundberg value")
{
    auto sol = lundberg_root(DistributionSpec::exponential(1.0), 2.0);
    for (double u : {0.0, 1.0, 5.0, 30.0}) {
        auto [lo, hi] = lundberg_bounds(sol, u);
        double cl = cl_tail(sol, u);
        CHECK(lo <= cl);
        CHECK(cl <= hi);
        CHECK(hi <= 1.0);
    }
}

TEST_CASE("tabulated tilted sampler agrees with the closed form")
{
    auto G = DistributionSpec::exponential(1.0);
    auto sol = lundberg_root(G, 2.0);
    TiltedIncrementSampler exact(G, sol), table(G, sol, true);
    REQUIRE(table.tabulated());
    REQUIRE_FALSE(exact.tabulated());
    for (double v : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
        CHECK(table.invert(v) == doctest::Approx(exact.invert(v)).epsilon(1e-8));
        CHECK(table.cdf(exact.invert(v)) == doctest::Approx(v).epsilon(1e-8));
    }
}

TEST_CASE("tilted CDF equals the normalized integral of e^(gamma y) g(y)")
{
    auto G = DistributionSpec::weibull(0.6, 1.0);
    auto sol = lundberg_root(G, 3.0);
    TiltedIncrementSampler s(G, sol);
    for (double y : {0.01, 0.5, 2.0, 2.9}) {
        double ref = oracle::simpson(
            [&](double v) { return v > 0.0 ? std::exp(sol.gamma * v * v) * density(G, v * v) * 2 * v : 0.0; }, 0.0,
            std::sqrt(y), 200000);
        CHECK(s.cdf(y) == doctest::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("geometric sum: mean and importance sampling against crude simulation")
{
    auto G = DistributionSpec::exponential(1.0);
    const double t = 2.0;
    RngStream rng(5);
    Moments m;
    std::uint64_t hits = 0;
    const std::uint64_t n = 200000;
    const double u = 6.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        double s = sample_geometric_sum(G, t, rng);
        m.add(s);
        hits += s > u;
    }
    CHECK(m.mean() == doctest::Approx(std::exp(2.0) - 3.0).epsilon(0.02));
    double p = double(hits) / n, se = std::sqrt(p * (1 - p) / n);
    auto is = is_geometric_tail(G, t, u, 200000, RngStream(6), 3);
    CHECK(std::abs(is.point - p) < 4 * std::hypot(se, is.std_error));
    CHECK(is.lower <= is.point);
    CHECK(is.point <= is.upper);
}

TEST_CASE("importance sampling is reproducible across worker counts")
{
    auto G = DistributionSpec::pareto(2.0, 1.0);
    auto a = is_geometric_tail(G, 3.0, 20.0, 30000, RngStream(11), 1);
    auto b = is_geometric_tail(G, 3.0, 20.0, 30000, RngStream(11), 4);
    CHECK(a.point == b.point);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("renyi statistic shrinks with t")
{
    auto G = DistributionSpec::exponential(1.0);
    double d1 = renyi_statistic(G, 0.5, 50000, RngStream(3), 2);
    double d8 = renyi_statistic(G, 6.0, 50000, RngStream(3), 2);
    CHECK(d8 < d1);
}
