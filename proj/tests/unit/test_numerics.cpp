#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rtail/numerics.hpp"
#include "rtail/parallel.hpp"
#include "rtail/rng.hpp"

using namespace rtail;

TEST_CASE("adaptive Gauss-Kronrod on smooth and peaked integrands")
{
    auto r = numerics::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
    // A narrow Gaussian in a wide interval.
    auto g = numerics::integrate([](double x) { return std::exp(-1e6 * (x - 0.3) * (x - 0.3)); },
                                 0.0, 1.0, 1e-12, 30);
    CHECK(g.value == doctest::Approx(std::sqrt(std::numbers::pi / 1e6)).epsilon(1e-9));
    // Tiny intervals finish immediately.
    int calls = 0;
    auto tiny = numerics::integrate([&](double x) { ++calls; return x; }, 1.0, 1.0 + 1e-14);
    CHECK(tiny.value == doctest::Approx(1e-14).epsilon(1e-6));
    CHECK(calls <= 31);
}

TEST_CASE("endpoint-singular quadrature")
{
    auto r = numerics::integrate_endpoint_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("incomplete gamma in log space")
{
    CHECK(std::exp(numerics::log_upper_incomplete_gamma(1.0, 3.0)) ==
          doctest::Approx(std::exp(-3.0)).epsilon(1e-13));
    // Gamma(0.5, x) = sqrt(pi) erfc(sqrt(x)).
    CHECK(numerics::upper_incomplete_gamma(0.5, 2.0) ==
          doctest::Approx(std::sqrt(std::numbers::pi) * std::erfc(std::sqrt(2.0))).epsilon(1e-12));
    // Gamma(0, x) = E1(x); E1(1) = 0.21938393439552...
    CHECK(numerics::upper_incomplete_gamma(0.0, 1.0) == doctest::Approx(0.2193839343955203).epsilon(1e-11));
    // Large x stays finite in log space.
    CHECK(numerics::log_upper_incomplete_gamma(2.0, 1000.0) ==
          doctest::Approx(-1000.0 + std::log(1001.0)).epsilon(1e-12));
}

TEST_CASE("monotone cubic preserves monotone data")
{
    numerics::MonotoneCubic m({0, 1, 2, 3, 4}, {0, 0.1, 0.1, 5, 5.2});
    double prev = -1;
    for (double t = 0; t <= 4; t += 0.01) {
        double v = m(t);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
    CHECK(m(2.0) == doctest::Approx(0.1));
    CHECK(m(1.5) == doctest::Approx(0.1));
}

TEST_CASE("toms748 root")
{
    auto f = [](double x) { return x * x - 2.0; };
    double r = numerics::solve_bracketed(f, 0.0, 2.0, f(0.0), f(2.0));
    CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Clopper-Pearson interval")
{
    // Zero successes: the upper end solves (1 - p)^n = alpha/2.
    auto [lo, hi] = numerics::clopper_pearson(0, 100, 0.99);
    CHECK(lo == 0.0);
    CHECK(hi == doctest::Approx(1 - std::pow(0.005, 0.01)).epsilon(1e-9));
    auto [l2, h2] = numerics::clopper_pearson(50, 100, 0.95);
    CHECK(l2 < 0.5);
    CHECK(h2 > 0.5);
    CHECK(l2 == doctest::Approx(1 - h2).epsilon(1e-12));
}

TEST_CASE("chi-square p-value")
{
    // P(chi2_2 > x) = e^(-x/2).
    CHECK(numerics::chi_square_pvalue(3.0, 2.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
}

TEST_CASE("rng streams are reproducible and distinct")
{
    RngStream a(7), b(7), c(7, 1);
    for (int i = 0; i < 100; ++i) {
        double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    CHECK(RngStream(7).bits() != c.bits());
    CHECK(a.substream(3).bits() == b.substream(3).bits());
    CHECK(a.substream(3).bits() != a.substream(4).bits());
}

TEST_CASE("block-parallel results do not depend on the worker count")
{
    RngStream rng(99);
    auto body = [](std::uint64_t, std::uint64_t count, RngStream& s) {
        Moments m;
        for (std::uint64_t i = 0; i < count; ++i)
            m.add(s.uniform());
        return m;
    };
    auto merge = [](Moments& acc, const Moments& p) { acc.merge(p); };
    auto one = run_blocks<Moments>(100000, 1, rng, body, merge);
    auto many = run_blocks<Moments>(100000, 7, rng, body, merge);
    CHECK(one.count == 100000);
    CHECK(one.sum == many.sum);
    CHECK(one.sumsq == many.sumsq);
    CHECK(one.mean() == doctest::Approx(0.5).epsilon(0.01));
}
