#include "rtail/dist.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rtail/error.hpp"
#include "rtail/numerics.hpp"

namespace rtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what)
{
    if (!ok)
        throw InvalidArgument(what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

// Pareto helpers work in u = log(t / scale).
double pareto_log_tail_u(const Pareto& p, double log_norm_gamma, double u)
{
    if (u <= 0.0)
        return 0.0;
    if (p.log_power == 0.0)
        return -p.index * u;
    return numerics::log_upper_incomplete_gamma(p.log_power + 1.0, p.index * (1.0 + u)) -
           log_norm_gamma;
}

// Solves a monotone equation on [lo, hi] (hi may be grown by doubling).
template <class F>
double invert(F&& excess, double lo, double hi, bool grow_hi)
{
    double f_lo = excess(lo);
    double f_hi = excess(hi);
    int guard = 0;
    while (grow_hi && (f_hi > 0) == (f_lo > 0) && guard++ < 2000) {
        lo = hi;
        f_lo = f_hi;
        hi = hi * 2.0 + 1.0;
        f_hi = excess(hi);
    }
    return numerics::solve_bracketed(excess, lo, hi, f_lo, f_hi, 52);
}

double poly_tail_w(const PolyEndpoint& p, double b, double w)
{
    double e = p.exponent;
    return p.amplitude * std::pow(w, e + 1) / (e + 1) + b * std::pow(w, e + 2) / (e + 2);
}

}  // namespace

DistributionSpec::DistributionSpec(Family family) : family_(std::move(family))
{
    std::visit(
        overloaded{
            [](const Exponential& d) { require(positive(d.rate), "exponential: rate must be > 0"); },
            [](const Gamma& d) {
                require(positive(d.shape) && positive(d.rate), "gamma: shape and rate must be > 0");
            },
            [](const Weibull& d) {
                require(positive(d.shape) && positive(d.scale),
                        "weibull: shape and scale must be > 0");
            },
            [this](const Pareto& d) {
                require(positive(d.index) && positive(d.scale), "pareto: index and scale must be > 0");
                require(std::isfinite(d.log_power), "pareto: log_power must be finite");
                // log K = p log a - a - log Gamma(p + 1, a)
                pareto_log_norm_ =
                    d.log_power == 0.0
                        ? 0.0
                        : d.log_power * std::log(d.index) - d.index -
                              numerics::log_upper_incomplete_gamma(d.log_power + 1.0, d.index);
            },
            [](const LogNormal& d) {
                require(std::isfinite(d.log_location) && positive(d.log_scale),
                        "lognormal: log_scale must be > 0");
            },
            [](const Uniform& d) {
                require(std::isfinite(d.lower) && std::isfinite(d.upper) && d.lower >= 0.0 &&
                            d.upper > d.lower,
                        "uniform: need 0 <= lower < upper");
            },
            [](const PointMass& d) {
                require(std::isfinite(d.location) && d.location >= 0.0,
                        "pointmass: location must be >= 0");
            },
            [this](PolyEndpoint& d) {
                require(positive(d.endpoint), "polyendpoint: endpoint must be > 0");
                require(std::isfinite(d.exponent) && d.exponent >= 0.0,
                        "polyendpoint: exponent must be >= 0");
                double e = d.exponent, t0 = d.endpoint;
                double auto_a = (e + 1) / std::pow(t0, e + 1);
                if (d.auto_amplitude)
                    d.amplitude = auto_a;
                require(positive(d.amplitude), "polyendpoint: amplitude must be > 0 or auto");
                double max_a = (e + 1) * (e + 2) / std::pow(t0, e + 1);
                require(d.amplitude <= max_a * (1 + 1e-12),
                        "polyendpoint: amplitude too large for a normalizable density "
                        "(need A <= (e+1)(e+2)/t0^(e+1))");
                poly_correction_ = d.auto_amplitude ? 0.0
                                                    : (1.0 - d.amplitude / auto_a) * (e + 2) /
                                                          std::pow(t0, e + 2);
            },
        },
        family_);
}

DistributionSpec DistributionSpec::poly_endpoint(double amplitude, double exponent, double endpoint)
{
    bool automatic = !(amplitude > 0.0);
    return DistributionSpec(PolyEndpoint{automatic ? 0.0 : amplitude, exponent, endpoint, automatic});
}

std::string_view DistributionSpec::name() const noexcept
{
    static constexpr std::array<std::string_view, 8> names{
        "exponential", "gamma", "weibull", "pareto", "lognormal", "uniform", "pointmass",
        "polyendpoint"};
    return names[family_.index()];
}

double density(const DistributionSpec& spec, double t)
{
    if (t < 0.0)
        return 0.0;
    return std::visit(
        overloaded{
            [&](const Exponential& d) { return d.rate * std::exp(-d.rate * t); },
            [&](const Gamma& d) {
                if (t == 0.0)
                    return d.shape < 1 ? kInf : (d.shape == 1 ? d.rate : 0.0);
                return d.rate * boost::math::gamma_p_derivative(d.shape, d.rate * t);
            },
            [&](const Weibull& d) {
                if (t == 0.0)
                    return d.shape < 1 ? kInf : (d.shape == 1 ? 1.0 / d.scale : 0.0);
                double z = t / d.scale;
                return d.shape / d.scale * std::pow(z, d.shape - 1) * std::exp(-std::pow(z, d.shape));
            },
            [&](const Pareto& d) {
                if (t < d.scale)
                    return 0.0;
                double u = std::log(t / d.scale);
                double lf = spec.pareto_log_norm() + std::log(d.index / d.scale) -
                            (d.index + 1) * u + d.log_power * std::log1p(u);
                return std::exp(lf);
            },
            [&](const LogNormal& d) {
                if (t == 0.0)
                    return 0.0;
                double z = (std::log(t) - d.log_location) / d.log_scale;
                return std::exp(-0.5 * z * z) / (t * d.log_scale * std::sqrt(2 * M_PI));
            },
            [&](const Uniform& d) {
                return (t >= d.lower && t <= d.upper) ? 1.0 / (d.upper - d.lower) : 0.0;
            },
            [&](const PointMass&) { return 0.0; },
            [&](const PolyEndpoint& d) {
                if (t > d.endpoint)
                    return 0.0;
                double w = d.endpoint - t;
                return std::pow(w, d.exponent) * (d.amplitude + spec.poly_correction() * w);
            },
        },
        spec.family());
}

double tail(const DistributionSpec& spec, double t)
{
    if (t < 0.0)
        return 1.0;
    return std::visit(
        overloaded{
            [&](const Exponential& d) { return std::exp(-d.rate * t); },
            [&](const Gamma& d) { return boost::math::gamma_q(d.shape, d.rate * t); },
            [&](const Weibull& d) { return std::exp(-std::pow(t / d.scale, d.shape)); },
            [&](const Pareto& d) {
                if (t <= d.scale)
                    return 1.0;
                double lng = d.log_power == 0.0
                                 ? 0.0
                                 : numerics::log_upper_incomplete_gamma(d.log_power + 1.0, d.index);
                return std::exp(pareto_log_tail_u(d, lng, std::log(t / d.scale)));
            },
            [&](const LogNormal& d) {
                if (t == 0.0)
                    return 1.0;
                double z = (std::log(t) - d.log_location) / d.log_scale;
                return 0.5 * std::erfc(z / std::sqrt(2.0));
            },
            [&](const Uniform& d) {
                if (t <= d.lower)
                    return 1.0;
                if (t >= d.upper)
                    return 0.0;
                return (d.upper - t) / (d.upper - d.lower);
            },
            [&](const PointMass& d) { return t < d.location ? 1.0 : 0.0; },
            [&](const PolyEndpoint& d) {
                if (t >= d.endpoint)
                    return 0.0;
                return std::min(1.0, poly_tail_w(d, spec.poly_correction(), d.endpoint - t));
            },
        },
        spec.family());
}

double cdf(const DistributionSpec& spec, double t)
{
    if (t < 0.0)
        return 0.0;
    return std::visit(
        overloaded{
            [&](const Exponential& d) { return -std::expm1(-d.rate * t); },
            [&](const Gamma& d) { return boost::math::gamma_p(d.shape, d.rate * t); },
            [&](const Weibull& d) { return -std::expm1(-std::pow(t / d.scale, d.shape)); },
            [&](const LogNormal& d) {
                if (t == 0.0)
                    return 0.0;
                double z = (std::log(t) - d.log_location) / d.log_scale;
                return 0.5 * std::erfc(-z / std::sqrt(2.0));
            },
            [&](const Uniform& d) {
                if (t <= d.lower)
                    return 0.0;
                if (t >= d.upper)
                    return 1.0;
                return (t - d.lower) / (d.upper - d.lower);
            },
            [&](const auto&) { return 1.0 - tail(spec, t); },
        },
        spec.family());
}

double tail_quantile(const DistributionSpec& spec, double q)
{
    if (!(q > 0.0 && q < 1.0))
        throw InvalidArgument("tail_quantile: q must lie in (0, 1)");
    return std::visit(
        overloaded{
            [&](const Exponential& d) { return -std::log(q) / d.rate; },
            [&](const Gamma& d) { return boost::math::gamma_q_inv(d.shape, q) / d.rate; },
            [&](const Weibull& d) { return d.scale * std::pow(-std::log(q), 1.0 / d.shape); },
            [&](const Pareto& d) {
                if (d.log_power == 0.0)
                    return d.scale * std::pow(q, -1.0 / d.index);
                double lng = numerics::log_upper_incomplete_gamma(d.log_power + 1.0, d.index);
                double lq = std::log(q);
                double u = invert([&](double v) { return pareto_log_tail_u(d, lng, v) - lq; }, 0.0,
                                  1.0, true);
                return d.scale * std::exp(u);
            },
            [&](const LogNormal& d) {
                double z = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q);
                return std::exp(d.log_location + d.log_scale * z);
            },
            [&](const Uniform& d) { return d.upper - q * (d.upper - d.lower); },
            [&](const PointMass& d) { return d.location; },
            [&](const PolyEndpoint& d) {
                double b = spec.poly_correction();
                double w = invert([&](double v) { return poly_tail_w(d, b, v) - q; }, 0.0,
                                  d.endpoint, false);
                return d.endpoint - w;
            },
        },
        spec.family());
}

double quantile(const DistributionSpec& spec, double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw InvalidArgument("quantile: p must lie in (0, 1)");
    if (p > 0.5)
        return tail_quantile(spec, 1.0 - p);
    return std::visit(
        overloaded{
            [&](const Exponential& d) { return -std::log1p(-p) / d.rate; },
            [&](const Gamma& d) { return boost::math::gamma_p_inv(d.shape, p) / d.rate; },
            [&](const Weibull& d) { return d.scale * std::pow(-std::log1p(-p), 1.0 / d.shape); },
            [&](const Pareto& d) {
                if (d.log_power == 0.0)
                    return d.scale * std::exp(-std::log1p(-p) / d.index);
                double lng = numerics::log_upper_incomplete_gamma(d.log_power + 1.0, d.index);
                double u = invert(
                    [&](double v) { return -std::expm1(pareto_log_tail_u(d, lng, v)) - p; }, 0.0,
                    1.0, true);
                return d.scale * std::exp(u);
            },
            [&](const LogNormal& d) {
                double z = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
                return std::exp(d.log_location + d.log_scale * z);
            },
            [&](const Uniform& d) { return d.lower + p * (d.upper - d.lower); },
            [&](const PointMass& d) { return d.location; },
            [&](const PolyEndpoint& d) {
                double b = spec.poly_correction();
                double w = invert([&](double v) { return (1.0 - poly_tail_w(d, b, v)) - p; }, 0.0,
                                  d.endpoint, false);
                return d.endpoint - w;
            },
        },
        spec.family());
}

double sample(const DistributionSpec& spec, RngStream& rng)
{
    if (const auto* e = std::get_if<Exponential>(&spec.family()))
        return -std::log(rng.uniform()) / e->rate;
    if (const auto* pm = std::get_if<PointMass>(&spec.family()))
        return pm->location;
    return tail_quantile(spec, rng.uniform());
}

double mean(const DistributionSpec& spec)
{
    return std::visit(
        overloaded{
            [](const Exponential& d) { return 1.0 / d.rate; },
            [](const Gamma& d) { return d.shape / d.rate; },
            [](const Weibull& d) { return d.scale * std::tgamma(1.0 + 1.0 / d.shape); },
            [&](const Pareto& d) {
                if (d.index <= 1.0)
                    return kInf;
                if (d.log_power == 0.0)
                    return d.index * d.scale / (d.index - 1.0);
                // s K a e^(a-1) (a-1)^-(p+1) Gamma(p+1, a-1)
                double am1 = d.index - 1.0;
                double lm = spec.pareto_log_norm() + std::log(d.index) + am1 -
                            (d.log_power + 1) * std::log(am1) +
                            numerics::log_upper_incomplete_gamma(d.log_power + 1.0, am1);
                return d.scale * std::exp(lm);
            },
            [](const LogNormal& d) {
                return std::exp(d.log_location + 0.5 * d.log_scale * d.log_scale);
            },
            [](const Uniform& d) { return 0.5 * (d.lower + d.upper); },
            [](const PointMass& d) { return d.location; },
            [&](const PolyEndpoint& d) {
                double e = d.exponent, t0 = d.endpoint;
                double mean_gap = d.amplitude * std::pow(t0, e + 2) / (e + 2) +
                                  spec.poly_correction() * std::pow(t0, e + 3) / (e + 3);
                return t0 - mean_gap;
            },
        },
        spec.family());
}

Support support(const DistributionSpec& spec)
{
    return std::visit(overloaded{
                          [](const Pareto& d) { return Support{d.scale, kInf}; },
                          [](const Uniform& d) { return Support{d.lower, d.upper}; },
                          [](const PointMass& d) { return Support{d.location, d.location}; },
                          [](const PolyEndpoint& d) { return Support{0.0, d.endpoint}; },
                          [](const auto&) { return Support{0.0, kInf}; },
                      },
                      spec.family());
}

bool has_density(const DistributionSpec& spec) { return !spec.is<PointMass>(); }

bool is_bounded(const DistributionSpec& spec) { return std::isfinite(support(spec).upper); }

DistributionSpec canonical(const DistributionSpec& spec)
{
    if (const auto* w = std::get_if<Weibull>(&spec.family()); w && w->shape == 1.0)
        return DistributionSpec::exponential(1.0 / w->scale);
    if (const auto* g = std::get_if<Gamma>(&spec.family()); g && g->shape == 1.0)
        return DistributionSpec::exponential(g->rate);
    if (const auto* p = std::get_if<PolyEndpoint>(&spec.family()); p && !p->auto_amplitude) {
        double auto_a = (p->exponent + 1) / std::pow(p->endpoint, p->exponent + 1);
        if (p->amplitude == auto_a)
            return DistributionSpec::poly_endpoint(0.0, p->exponent, p->endpoint);
    }
    return spec;
}

bool same_distribution(const DistributionSpec& a, const DistributionSpec& b)
{
    return canonical(a) == canonical(b);
}

void check_role(const DistributionSpec& spec, Role role)
{
    if (role == Role::G && spec.is<PointMass>())
        throw InvalidArgument("PointMass not permitted in role G");
}

TailClassTag tail_class(const DistributionSpec& spec, Role role)
{
    const bool f = role == Role::F;
    return std::visit(
        overloaded{
            [&](const Exponential& d) -> TailClassTag {
                if (f)
                    return ClassF1{d.rate, 1.0};
                return ClassG1{d.rate, 1.0};
            },
            [&](const Gamma& d) -> TailClassTag {
                if (f)
                    return ClassF1{d.rate, 1.0};
                return ClassG1{d.rate, 1.0};
            },
            [&](const Weibull& d) -> TailClassTag {
                double lambda = std::pow(d.scale, -d.shape);
                if (f)
                    return ClassF1{lambda, d.shape};
                return ClassG1{lambda, d.shape};
            },
            [&](const Pareto& d) -> TailClassTag {
                if (f)
                    return ClassF2{d.index};
                return ClassG2{d.index};
            },
            [](const LogNormal&) -> TailClassTag { return ClassNone{}; },
            [](const Uniform& d) -> TailClassTag { return ClassBounded{d.upper}; },
            [](const PointMass& d) -> TailClassTag { return ClassBounded{d.location}; },
            [](const PolyEndpoint& d) -> TailClassTag { return ClassBounded{d.endpoint}; },
        },
        spec.family());
}

std::string to_string(const TailClassTag& tag)
{
    return std::visit(
        overloaded{
            [](const ClassF1& c) {
                return "F1(alpha=" + format_double(c.alpha) + ", eta=" + format_double(c.eta) + ")";
            },
            [](const ClassF2& c) { return "F2(alpha=" + format_double(c.alpha) + ")"; },
            [](const ClassG1& c) {
                return "G1(beta=" + format_double(c.beta) + ", gamma=" + format_double(c.gamma) + ")";
            },
            [](const ClassG2& c) { return "G2(beta=" + format_double(c.beta) + ")"; },
            [](const ClassBounded& c) { return "Bounded(t0=" + format_double(c.endpoint) + ")"; },
            [](const ClassNone&) { return std::string("None"); },
        },
        tag);
}

// Text form -------------------------------------------------------------------

std::string format_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("not a number: '" + std::string(text) + "'");
    return v;
}

std::string to_string(const DistributionSpec& spec)
{
    auto f = format_double;
    std::string args = std::visit(
        overloaded{
            [&](const Exponential& d) { return "rate=" + f(d.rate); },
            [&](const Gamma& d) { return "shape=" + f(d.shape) + ", rate=" + f(d.rate); },
            [&](const Weibull& d) { return "shape=" + f(d.shape) + ", scale=" + f(d.scale); },
            [&](const Pareto& d) {
                return "index=" + f(d.index) + ", scale=" + f(d.scale) + ", log_power=" +
                       f(d.log_power);
            },
            [&](const LogNormal& d) {
                return "log_location=" + f(d.log_location) + ", log_scale=" + f(d.log_scale);
            },
            [&](const Uniform& d) { return "lower=" + f(d.lower) + ", upper=" + f(d.upper); },
            [&](const PointMass& d) { return "location=" + f(d.location); },
            [&](const PolyEndpoint& d) {
                return "amplitude=" + (d.auto_amplitude ? std::string("auto") : f(d.amplitude)) +
                       ", exponent=" + f(d.exponent) + ", endpoint=" + f(d.endpoint);
            },
        },
        spec.family());
    return std::string(spec.name()) + "(" + args + ")";
}

DistributionSpec parse_distribution(std::string_view text)
{
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
            s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
            s.remove_suffix(1);
        return s;
    };
    std::string_view s = trim(text);
    auto open = s.find('(');
    if (open == std::string_view::npos || s.back() != ')')
        throw InvalidArgument("distribution must look like family(name=value, ...): '" +
                              std::string(text) + "'");
    std::string family(trim(s.substr(0, open)));
    for (auto& c : family)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::string_view body = s.substr(open + 1, s.size() - open - 2);

    std::map<std::string, std::string, std::less<>> kv;
    while (!trim(body).empty()) {
        auto comma = body.find(',');
        std::string_view item = trim(body.substr(0, comma));
        body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
        auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw InvalidArgument("expected name=value in '" + std::string(item) + "'");
        std::string key(trim(item.substr(0, eq)));
        if (!kv.emplace(key, std::string(trim(item.substr(eq + 1)))).second)
            throw InvalidArgument("duplicate parameter '" + key + "'");
    }

    auto take = [&](const char* key, std::optional<double> fallback = std::nullopt) -> double {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (fallback)
                return *fallback;
            throw InvalidArgument(family + ": missing parameter '" + key + "'");
        }
        double v = parse_double(it->second);
        kv.erase(it);
        return v;
    };
    auto finish = [&](DistributionSpec spec) {
        if (!kv.empty())
            throw InvalidArgument(family + ": unknown parameter '" + kv.begin()->first + "'");
        return spec;
    };

    if (family == "exponential")
        return finish(DistributionSpec::exponential(take("rate")));
    if (family == "gamma") {
        double shape = take("shape");
        return finish(DistributionSpec::gamma(shape, take("rate")));
    }
    if (family == "weibull") {
        double shape = take("shape");
        return finish(DistributionSpec::weibull(shape, take("scale")));
    }
    if (family == "pareto") {
        double index = take("index");
        double scale = take("scale", 1.0);
        return finish(DistributionSpec::pareto(index, scale, take("log_power", 0.0)));
    }
    if (family == "lognormal") {
        double m = take("log_location");
        return finish(DistributionSpec::lognormal(m, take("log_scale")));
    }
    if (family == "uniform") {
        double lo = take("lower");
        return finish(DistributionSpec::uniform(lo, take("upper")));
    }
    if (family == "pointmass")
        return finish(DistributionSpec::point_mass(take("location")));
    if (family == "polyendpoint") {
        double amplitude = 0.0;
        if (auto it = kv.find("amplitude"); it != kv.end()) {
            if (it->second != "auto") {
                amplitude = parse_double(it->second);
                if (!(amplitude > 0))
                    throw InvalidArgument("polyendpoint: amplitude must be > 0 or auto");
            }
            kv.erase(it);
        }
        double e = take("exponent");
        return finish(DistributionSpec::poly_endpoint(amplitude, e, take("endpoint")));
    }
    throw InvalidArgument("unknown distribution family '" + family + "'");
}

}  // namespace rtail
