#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rtail/dist.hpp"
#include "rtail/error.hpp"
#include "rtail/numerics.hpp"

using namespace rtail;

namespace {

std::vector<DistributionSpec> zoo()
{
    return {DistributionSpec::exponential(1.5),    DistributionSpec::gamma(2.5, 2.0),
            DistributionSpec::gamma(0.5, 1.0),     DistributionSpec::weibull(0.5, 2.0),
            DistributionSpec::weibull(2.0, 1.0),   DistributionSpec::pareto(2.0, 1.0),
            DistributionSpec::pareto(1.5, 2.0, 1.0), DistributionSpec::lognormal(0.3, 0.8),
            DistributionSpec::uniform(0.5, 2.0),   DistributionSpec::poly_endpoint(0, 1.5, 2.0),
            DistributionSpec::poly_endpoint(0.6, 0.0, 1.0)};
}

}  // namespace

TEST_CASE("exponential functions match closed forms")
{
    auto d = DistributionSpec::exponential(2.0);
    for (double t : {0.0, 0.1, 1.0, 7.5}) {
        CHECK(cdf(d, t) == doctest::Approx(1 - std::exp(-2 * t)).epsilon(1e-14));
        CHECK(tail(d, t) == doctest::Approx(std::exp(-2 * t)).epsilon(1e-14));
        CHECK(density(d, t) == doctest::Approx(2 * std::exp(-2 * t)).epsilon(1e-14));
    }
    CHECK(mean(d) == 0.5);
    CHECK(tail(d, 300.0) == doctest::Approx(std::exp(-600.0)).epsilon(1e-12));
}

TEST_CASE("tail equals the integral of the density beyond t")
{
    for (const auto& d : zoo()) {
        CAPTURE(to_string(d));
        auto s = support(d);
        for (double p : {0.2, 0.6, 0.9}) {
            double t = quantile(d, p);
            double hi = std::isfinite(s.upper) ? s.upper : quantile(d, 1 - 1e-9);
            double mass = oracle::simpson(
                [&](double v) { return density(d, std::exp(v)) * std::exp(v); }, std::log(t),
                std::log(hi), 200000);
            double rest = std::isfinite(s.upper) ? 0.0 : tail(d, hi);
            CHECK(tail(d, t) == doctest::Approx(mass + rest).epsilon(2e-6));
        }
    }
}

TEST_CASE("quantile inverts cdf and tail_quantile inverts tail")
{
    for (const auto& d : zoo()) {
        CAPTURE(to_string(d));
        for (double p : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) {
            double t = quantile(d, p);
            CHECK(cdf(d, t) == doctest::Approx(p).epsilon(1e-9));
        }
        for (double q : {1e-12, 1e-5, 0.2}) {
            double t = tail_quantile(d, q);
            CHECK(tail(d, t) == doctest::Approx(q).epsilon(1e-8));
        }
    }
}

TEST_CASE("samples follow the distribution (KS)")
{
    RngStream rng(42);
    for (const auto& d : zoo()) {
        CAPTURE(to_string(d));
        std::vector<double> xs(20000);
        for (auto& x : xs)
            x = sample(d, rng);
        double ks = numerics::ks_distance(xs, [&](double t) { return cdf(d, t); });
        CHECK(numerics::ks_pvalue(ks, xs.size()) > 1e-4);
    }
}

TEST_CASE("pareto with log factor has the stated density")
{
    auto d = DistributionSpec::pareto(1.5, 2.0, 1.0);
    double K = std::exp(d.pareto_log_norm());
    for (double t : {2.0, 5.0, 100.0}) {
        double expected = K * 1.5 * std::pow(2.0, 1.5) * (1 + std::log(t / 2.0)) / std::pow(t, 2.5);
        CHECK(density(d, t) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(mean(DistributionSpec::pareto(1.0, 2.0)) == numerics::kInf);
}

TEST_CASE("polyendpoint behaves like A (t0 - t)^e at the endpoint")
{
    auto d = DistributionSpec::poly_endpoint(0.6, 0.0, 1.0);
    CHECK(density(d, 1.0 - 1e-9) == doctest::Approx(0.6).epsilon(1e-6));
    auto a = DistributionSpec::poly_endpoint(0, 2.0, 3.0);
    CHECK(a.as<PolyEndpoint>().amplitude == doctest::Approx(3.0 / 27.0));
    CHECK(cdf(a, 3.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(DistributionSpec::poly_endpoint(100.0, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("constructor rejects invalid parameters")
{
    CHECK_THROWS_AS(DistributionSpec::exponential(0.0), InvalidArgument);
    CHECK_THROWS_AS(DistributionSpec::exponential(-1.0), InvalidArgument);
    CHECK_THROWS_AS(DistributionSpec::gamma(1.0, NAN), InvalidArgument);
    CHECK_THROWS_AS(DistributionSpec::uniform(2.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(DistributionSpec::pareto(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(DistributionSpec::point_mass(-1.0), InvalidArgument);
}

TEST_CASE("text form round-trips")
{
    for (const auto& d : zoo())
        CHECK(parse_distribution(to_string(d)) == d);
    CHECK(parse_distribution("Exponential( rate = 1 )") == DistributionSpec::exponential(1.0));
    CHECK(parse_distribution("pareto(index=2)") == DistributionSpec::pareto(2.0, 1.0, 0.0));
    CHECK(parse_distribution("polyendpoint(amplitude=auto, exponent=1, endpoint=2)") ==
          DistributionSpec::poly_endpoint(0, 1, 2));
    CHECK(parse_distribution(to_string(DistributionSpec::exponential(0.1))) ==
          DistributionSpec::exponential(0.1));
    CHECK_THROWS_AS(parse_distribution("exponential(rate=1, rate=2)"), InvalidArgument);
    CHECK_THROWS_AS(parse_distribution("exponential(lambda=1)"), InvalidArgument);
    CHECK_THROWS_AS(parse_distribution("cauchy(scale=1)"), InvalidArgument);
    CHECK_THROWS_AS(parse_distribution("exponential rate=1"), InvalidArgument);
}

TEST_CASE("canonical forms identify equal distributions")
{
    CHECK(same_distribution(DistributionSpec::weibull(1.0, 2.0), DistributionSpec::exponential(0.5)));
    CHECK(same_distribution(DistributionSpec::gamma(1.0, 3.0), DistributionSpec::exponential(3.0)));
    CHECK_FALSE(same_distribution(DistributionSpec::gamma(2.0, 3.0), DistributionSpec::exponential(3.0)));
}

TEST_CASE("roles")
{
    CHECK_NOTHROW(check_role(DistributionSpec::point_mass(1.0), Role::F));
    CHECK_THROWS_WITH_AS(check_role(DistributionSpec::point_mass(1.0), Role::G),
                         "PointMass not permitted in role G", InvalidArgument);
}

TEST_CASE("tail classes")
{
    auto c = tail_class(DistributionSpec::weibull(0.5, 4.0), Role::F);
    REQUIRE(std::holds_alternative<ClassF1>(c));
    CHECK(std::get<ClassF1>(c).alpha == doctest::Approx(0.5));
    CHECK(std::get<ClassF1>(c).eta == 0.5);
    CHECK(std::holds_alternative<ClassG2>(tail_class(DistributionSpec::pareto(1.0, 2.0), Role::G)));
    CHECK(std::holds_alternative<ClassNone>(tail_class(DistributionSpec::lognormal(0, 1), Role::F)));
    CHECK(std::holds_alternative<ClassBounded>(tail_class(DistributionSpec::uniform(0, 1), Role::F)));
}
