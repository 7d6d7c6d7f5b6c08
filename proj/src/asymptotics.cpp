#include "rtail/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "rtail/cramer.hpp"
#include "rtail/error.hpp"
#include "rtail/numerics.hpp"

namespace rtail {

namespace {

constexpr std::array<std::string_view, 10> kKinds{
    "Diagonal", "Case11", "Case22",       "Case21",         "Case12",
    "GammaClass", "RegVar", "WeibullClass", "BoundedSupport", "FixedT"};
constexpr std::array<std::string_view, 3> kModes{"Sharp", "Logarithmic", "LogLog"};
constexpr std::array<std::string_view, 3> kVerdicts{"Finite", "Infinite", "Undetermined"};
constexpr std::array<std::string_view, 4> kOracles{"L51", "L52", "L53", "L54"};

const double kE = std::exp(1.0);

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

void require(bool ok, const char* what)
{
    if (!ok)
        throw InvalidArgument(what);
}

double log_of(const LogPower& L, double t)
{
    if (L.p == 0.0)
        return std::log(L.c);
    double lt = std::log(t);
    require(lt > 0.0, "slowly varying factor evaluated at t <= 1");
    return std::log(L.c) + L.p * std::log(lt);
}

// Density e^(-lambda t^eta) t^alpha c of an exponential-type family.
struct ExpType
{
    double lambda, eta, alpha, c;
};

std::optional<ExpType> exp_type(const DistributionSpec& spec)
{
    DistributionSpec d = canonical(spec);
    if (d.is<Exponential>()) {
        double r = d.as<Exponential>().rate;
        return ExpType{r, 1.0, 0.0, r};
    }
    if (d.is<Gamma>()) {
        auto g = d.as<Gamma>();
        return ExpType{g.rate, 1.0, g.shape - 1.0,
                       std::exp(g.shape * std::log(g.rate) - std::lgamma(g.shape))};
    }
    if (d.is<Weibull>()) {
        auto w = d.as<Weibull>();
        double lambda = std::pow(w.scale, -w.shape);
        return ExpType{lambda, w.shape, w.shape - 1.0, w.shape * lambda};
    }
    return std::nullopt;
}

LogPower pareto_factor(const DistributionSpec& spec)
{
    const auto& p = spec.as<Pareto>();
    return {std::exp(spec.pareto_log_norm() + std::log(p.index) + p.index * std::log(p.scale)),
            p.log_power};
}

struct EndpointShape
{
    double A, alpha, t0;
};

EndpointShape endpoint_shape(const DistributionSpec& F)
{
    if (F.is<Uniform>()) {
        auto u = F.as<Uniform>();
        return {1.0 / (u.upper - u.lower), 0.0, u.upper};
    }
    if (F.is<PolyEndpoint>()) {
        auto p = F.as<PolyEndpoint>();
        return {p.amplitude, p.exponent, p.endpoint};
    }
    throw InvalidArgument("bounded asymptote needs F uniform or polyendpoint");
}

double finite_mu(const DistributionSpec& G)
{
    double m = mean(G);
    if (!std::isfinite(m))
        throw InvalidArgument("G has infinite mean; mu = 1/E U is undefined");
    return 1.0 / m;
}

GammaClassParams gamma_params(const RegimeCase& rc)
{
    auto f = *exp_type(rc.F), g = *exp_type(rc.G);
    return {f.lambda, f.alpha, f.c, g.lambda, g.alpha, g.c, finite_mu(rc.G)};
}

WeibullClassParams weibull_params(const RegimeCase& rc)
{
    auto f = *exp_type(rc.F), g = *exp_type(rc.G);
    return {f.lambda, f.alpha, {f.c, 0.0}, f.eta, g.lambda, g.alpha, {g.c, 0.0}, g.eta,
            finite_mu(rc.G)};
}

RegVarParams regvar_params(const RegimeCase& rc)
{
    return {rc.F.as<Pareto>().index, pareto_factor(rc.F), rc.G.as<Pareto>().index,
            pareto_factor(rc.G), finite_mu(rc.G)};
}

RegimeCase make(RegimeKind kind, double theta, Mode mode, const DistributionSpec& F,
                const DistributionSpec& G)
{
    RegimeCase rc{kind, theta, {}, mode, F, G};
    return rc;
}

double log_gamma_class(const GammaClassParams& p, double x)
{
    double aH = p.lambda_F / p.lambda_G;
    return std::log(gamma_class_constant(p)) + (p.alpha_F - aH * p.alpha_G) * std::log(std::log(x)) -
           aH * std::log(x);
}

// Leading-order expansion of -log P(T > t) as t -> inf:
//   sum_k power[k] t^k + log2 log^2 t + log1 log t + loglog log log t + O(1).
struct Expansion
{
    std::map<double, double, std::greater<>> power;
    double log2 = 0.0, log1 = 0.0, loglog = 0.0;
    bool vanishes = false;  // the tail is zero beyond some point
};

Expansion tail_expansion(const DistributionSpec& spec)
{
    Expansion e;
    DistributionSpec d = canonical(spec);
    std::visit(
        [&](const auto& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                e.power[1.0] = fam.rate;
            } else if constexpr (std::is_same_v<T, Gamma>) {
                e.power[1.0] = fam.rate;
                e.log1 = -(fam.shape - 1.0);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                e.power[fam.shape] = std::pow(fam.scale, -fam.shape);
            } else if constexpr (std::is_same_v<T, Pareto>) {
                e.log1 = fam.index;
                e.loglog = -fam.log_power;
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                double v = fam.log_scale * fam.log_scale;
                e.log2 = 0.5 / v;
                e.log1 = -fam.log_location / v;
                e.loglog = 1.0;
            } else {
                e.vanishes = true;
            }
        },
        d.family());
    return e;
}

// The expansion's terms in decreasing order of growth, as (scale id, coefficient).
std::vector<std::pair<double, double>> ordered_terms(const Expansion& e)
{
    std::vector<std::pair<double, double>> out;
    for (auto [k, v] : e.power)
        out.emplace_back(k, v);
    out.emplace_back(-1.0, e.log2);
    out.emplace_back(-2.0, e.log1);
    out.emplace_back(-3.0, e.loglog);
    return out;
}

}  // namespace

std::string_view to_string(RegimeKind k) noexcept { return kKinds[static_cast<std::size_t>(k)]; }
std::string_view to_string(Mode m) noexcept { return kModes[static_cast<std::size_t>(m)]; }
std::string_view to_string(Verdict v) noexcept { return kVerdicts[static_cast<std::size_t>(v)]; }
std::string_view to_string(OracleKind k) noexcept { return kOracles[static_cast<std::size_t>(k)]; }

OracleKind parse_oracle_kind(std::string_view text)
{
    for (std::size_t i = 0; i < kOracles.size(); ++i)
        if (kOracles[i] == text)
            return static_cast<OracleKind>(i);
    throw InvalidArgument("unknown integral oracle '" + std::string(text) + "'");
}

double LogPower::operator()(double t) const { return std::exp(log_of(*this, t)); }

RegimeCase classify(const DistributionSpec& F, const DistributionSpec& G)
{
    check_role(F, Role::F);
    check_role(G, Role::G);
    if (F.is<LogNormal>() || G.is<LogNormal>())
        throw InvalidArgument("Undetermined: lognormal tails fall outside the regime classes");

    if (same_distribution(F, G)) {
        RegimeCase rc = make(RegimeKind::Diagonal, 1.0, Mode::Sharp, F, G);
        double m = mean(G);
        rc.constants["mu"] = std::isfinite(m) ? 1.0 / m : 0.0;
        return rc;
    }

    if (F.is<PointMass>() || is_bounded(F)) {
        const bool fixed = F.is<PointMass>();
        double t0 = fixed ? F.as<PointMass>().location : support(F).upper;
        if (!(tail(G, t0) > 0.0))
            throw InvalidArgument("Gbar(t0) = 0: the task can never complete");
        auto sol = lundberg_root(G, t0);
        RegimeCase rc = make(fixed ? RegimeKind::FixedT : RegimeKind::BoundedSupport, sol.gamma,
                             Mode::Sharp, F, G);
        rc.constants["t0"] = t0;
        rc.constants["gamma"] = sol.gamma;
        rc.constants["B"] = sol.B;
        rc.constants["C"] = sol.C;
        if (!fixed) {
            auto e = endpoint_shape(F);
            rc.constants["A"] = e.A;
            rc.constants["alpha"] = e.alpha;
        }
        return rc;
    }
    if (is_bounded(G))
        throw InvalidArgument("unbounded F with bounded G: P(X = inf) > 0");

    auto ef = exp_type(F), eg = exp_type(G);
    if (ef && eg && std::abs(ef->eta - eg->eta) <= 1e-12 * ef->eta) {
        const bool gamma_class = ef->eta == 1.0 && eg->eta == 1.0;
        RegimeCase rc = make(gamma_class ? RegimeKind::GammaClass : RegimeKind::WeibullClass,
                             ef->lambda / eg->lambda, Mode::Sharp, F, G);
        rc.constants["alpha_H"] = rc.theta;
        rc.constants["mu"] = finite_mu(G);
        if (gamma_class) {
            auto p = gamma_params(rc);
            rc.constants["c_H"] = gamma_class_constant(p);
            rc.constants["log_power"] = p.alpha_F - rc.theta * p.alpha_G;
        } else {
            rc.constants["omega"] = weibull_class_omega(weibull_params(rc));
        }
        return rc;
    }
    if (F.is<Pareto>() && G.is<Pareto>() && std::isfinite(mean(G))) {
        RegimeCase rc = make(RegimeKind::RegVar, F.as<Pareto>().index / G.as<Pareto>().index,
                             Mode::Sharp, F, G);
        rc.constants["alpha_H"] = rc.theta;
        rc.constants["mu"] = finite_mu(G);
        return rc;
    }

    TailClassTag cf = tail_class(F, Role::F), cg = tail_class(G, Role::G);
    if (auto* f1 = std::get_if<ClassF1>(&cf)) {
        if (auto* g1 = std::get_if<ClassG1>(&cg)) {
            double theta = f1->eta / g1->gamma;
            RegimeCase rc = make(RegimeKind::Case11, theta, Mode::Logarithmic, F, G);
            rc.constants["theta11"] = theta;
            rc.constants["c11"] = f1->alpha / std::pow(g1->beta, theta);
            return rc;
        }
        if (auto* g2 = std::get_if<ClassG2>(&cg)) {
            double theta = f1->eta / (g2->beta + f1->eta);
            RegimeCase rc = make(RegimeKind::Case12, theta, Mode::LogLog, F, G);
            rc.constants["theta12"] = theta;
            return rc;
        }
    }
    if (auto* f2 = std::get_if<ClassF2>(&cf)) {
        if (auto* g1 = std::get_if<ClassG1>(&cg)) {
            double theta = f2->alpha / g1->gamma;
            RegimeCase rc = make(RegimeKind::Case21, theta, Mode::Logarithmic, F, G);
            rc.constants["theta21"] = theta;
            return rc;
        }
        if (auto* g2 = std::get_if<ClassG2>(&cg)) {
            double theta = f2->alpha / g2->beta;
            RegimeCase rc = make(RegimeKind::Case22, theta, Mode::Logarithmic, F, G);
            rc.constants["theta22"] = theta;
            return rc;
        }
    }
    throw InvalidArgument("Undetermined: no regime for F=" + to_string(F) + ", G=" + to_string(G));
}

double asymptote_diagonal(double mu, double x)
{
    require(positive(mu), "diagonal asymptote needs mu > 0");
    require(x > 0.0, "x must be > 0");
    return std::min(1.0, 1.0 / (mu * x));
}

double gamma_class_constant(const GammaClassParams& p)
{
    require(positive(p.lambda_F) && positive(p.lambda_G) && positive(p.c_F) && positive(p.c_G) &&
                positive(p.mu) && std::isfinite(p.alpha_F) && std::isfinite(p.alpha_G),
            "gamma-class parameters must be finite with lambda, c, mu > 0");
    double aH = p.lambda_F / p.lambda_G;
    return std::exp(std::log(p.c_F) + std::lgamma(aH) +
                    (aH - 1.0 - p.alpha_F + aH * p.alpha_G) * std::log(p.lambda_G) -
                    aH * std::log(p.mu) - aH * std::log(p.c_G));
}

double asymptote_gamma_class(const GammaClassParams& p, double x)
{
    require(x > kE, "gamma-class asymptote needs x > e");
    return std::exp(log_gamma_class(p, x));
}

double asymptote_regvar(const RegVarParams& p, double x)
{
    require(positive(p.alpha_F) && positive(p.alpha_G) && positive(p.mu) && positive(p.L_F.c) &&
                positive(p.L_G.c),
            "regular-variation parameters must be positive");
    require(x > 1.0, "regular-variation asymptote needs x > 1");
    double aH = p.alpha_F / p.alpha_G;
    double y = std::pow(x, 1.0 / p.alpha_G);
    double log_L = std::lgamma(aH) + (aH - 1.0) * std::log(p.alpha_G) - aH * std::log(p.mu) +
                   log_of(p.L_F, y) - aH * log_of(p.L_G, y);
    return std::exp(log_L - aH * std::log(x));
}

double weibull_class_omega(const WeibullClassParams& p)
{
    double eta = p.eta_F, aH = p.lambda_F / p.lambda_G;
    return p.alpha_F / eta + aH * (eta - p.alpha_G - 1.0) / eta + 1.0 / eta - 1.0;
}

double asymptote_weibull_class(const WeibullClassParams& p, double x)
{
    require(positive(p.eta_F) && positive(p.eta_G), "eta must be > 0");
    if (std::abs(p.eta_F - p.eta_G) > 1e-12 * p.eta_F)
        throw InvalidArgument("Weibull-class asymptote needs eta_F = eta_G");
    require(positive(p.lambda_F) && positive(p.lambda_G) && positive(p.mu) && positive(p.L_F.c) &&
                positive(p.L_G.c) && std::isfinite(p.alpha_F) && std::isfinite(p.alpha_G),
            "Weibull-class parameters must be finite with lambda, L, mu > 0");
    require(x > kE, "Weibull-class asymptote needs x > e");
    double eta = p.eta_F, aH = p.lambda_F / p.lambda_G, omega = weibull_class_omega(p);
    double lx = std::log(x);
    double y = std::pow(lx, 1.0 / eta);
    double log_L = std::lgamma(aH) + (aH - 1.0 - omega) * std::log(p.lambda_G) +
                   (aH - 1.0) * std::log(eta) - aH * std::log(p.mu) + omega * std::log(lx) +
                   log_of(p.L_F, y) - aH * log_of(p.L_G, y);
    return std::exp(log_L - aH * lx);
}

double asymptote_bounded(const DistributionSpec& F, const DistributionSpec& G, double x)
{
    auto e = endpoint_shape(F);
    double gbar = tail(G, e.t0);
    if (!(gbar > 0.0))
        throw InvalidArgument("bounded asymptote needs Gbar(t0) > 0");
    double g0 = density(G, e.t0);
    require(g0 > 0.0, "bounded asymptote needs g(t0) > 0");
    require(x > 0.0, "x must be > 0");
    auto sol = lundberg_root(G, e.t0);
    double a = e.alpha, gam = sol.gamma;
    double log_v = std::log(e.A) + a * std::log(sol.B) + std::log(gbar) + std::lgamma(a + 1.0) -
                   std::log(gam) - a * gam * e.t0 - (a + 1.0) * std::log(g0) - gam * x -
                   (a + 1.0) * std::log(x);
    return std::exp(log_v);
}

double asymptote_fixed(double t0, const DistributionSpec& G, double x)
{
    require(std::isfinite(t0) && t0 >= 0.0, "t0 must be finite and >= 0");
    if (!(tail(G, t0) > 0.0))
        throw InvalidArgument("fixed-T asymptote needs Gbar(t0) > 0");
    require(x >= t0, "fixed-T asymptote needs x >= t0");
    auto sol = lundberg_root(G, t0);
    return std::exp(std::log(sol.C) + sol.gamma * (t0 - x));
}

double log_asymptote(const RegimeCase& rc, double x)
{
    switch (rc.kind) {
    case RegimeKind::Case11:
        require(x > kE, "Case11 prediction needs x > e");
        return rc.constants.at("c11") * std::pow(std::log(x), rc.theta);
    case RegimeKind::Case22:
        require(x > kE, "Case22 prediction needs x > e");
        return rc.theta * std::log(x);
    case RegimeKind::Case21:
        require(x > std::exp(kE), "Case21 prediction needs x > e^e");
        return rc.theta * std::log(std::log(x));
    case RegimeKind::Case12:
        require(x > kE, "Case12 prediction needs x > e");
        return std::pow(x, rc.theta);
    default:
        throw InvalidArgument("log_asymptote: " + std::string(to_string(rc.kind)) +
                              " is a sharp regime");
    }
}

double evaluate_asymptote(const RegimeCase& rc, double x)
{
    switch (rc.kind) {
    case RegimeKind::Diagonal:
        return asymptote_diagonal(rc.constants.at("mu"), x);
    case RegimeKind::GammaClass:
        return asymptote_gamma_class(gamma_params(rc), x);
    case RegimeKind::WeibullClass:
        return asymptote_weibull_class(weibull_params(rc), x);
    case RegimeKind::RegVar:
        return asymptote_regvar(regvar_params(rc), x);
    case RegimeKind::BoundedSupport:
        return asymptote_bounded(rc.F, rc.G, x);
    case RegimeKind::FixedT:
        return asymptote_fixed(rc.constants.at("t0"), rc.G, x);
    default:
        return std::exp(-log_asymptote(rc, x));
    }
}

double asymptote_ratio(const RegimeCase& rc, double x, double point)
{
    switch (rc.mode) {
    case Mode::Sharp:
        return point / evaluate_asymptote(rc, x);
    case Mode::Logarithmic:
        return -std::log(point) / log_asymptote(rc, x);
    case Mode::LogLog:
        return std::log(-std::log(point)) / std::log(log_asymptote(rc, x));
    }
    return std::nan("");
}

MomentVerdict moment_classify(const DistributionSpec& F, const DistributionSpec& G, double alpha)
{
    require(positive(alpha), "moment order must be > 0");
    MomentVerdict out{alpha, Verdict::Undetermined};
    Expansion pf = tail_expansion(F), pg = tail_expansion(G);
    if (pf.vanishes) {
        out.verdict = Verdict::Finite;
        return out;
    }
    if (pg.vanishes) {
        out.verdict = Verdict::Infinite;
        return out;
    }
    // D = (1/alpha) (-log Fbar) - (-log Gbar); Gbar >= c Fbar^(1/alpha - eps) iff D(eps) is
    // bounded below, Gbar <= c Fbar^(1/alpha) iff D(0) is bounded above.
    Expansion d;
    for (auto [k, v] : pf.power)
        d.power[k] += v / alpha;
    for (auto [k, v] : pg.power)
        d.power[k] -= v;
    d.log2 = pf.log2 / alpha - pg.log2;
    d.log1 = pf.log1 / alpha - pg.log1;
    d.loglog = pf.loglog / alpha - pg.loglog;

    auto leading = [](const Expansion& e) -> std::optional<std::pair<double, double>> {
        for (auto [scale, coef] : ordered_terms(e))
            if (std::abs(coef) > 1e-12)
                return std::pair{scale, coef};
        return std::nullopt;
    };
    auto lead_d = leading(d);
    if (!lead_d || lead_d->second < 0.0) {
        out.verdict = Verdict::Infinite;
    } else {
        auto lead_f = leading(pf);
        if (lead_f && lead_f->first == lead_d->first)
            out.verdict = Verdict::Finite;
    }
    return out;
}

OracleResult integral_oracle(OracleKind kind, const OracleParams& p, double z)
{
    require(positive(p.a) && positive(p.b) && positive(p.gamma) && positive(p.eta) &&
                positive(p.alpha) && positive(p.beta) && positive(p.t0),
            "oracle parameters must be positive");
    const bool loglog_domain = kind == OracleKind::L51 || kind == OracleKind::L53;
    require(std::isfinite(z) && (loglog_domain ? z > kE : z > 0.0),
            loglog_domain ? "z must exceed e" : "z must be > 0");
    const double lz = std::log(z);

    // log of the integrand in s = log t, including the Jacobian e^s.
    std::function<double(double)> psi;
    switch (kind) {
    case OracleKind::L51:
        psi = [&](double s) {
            double t = std::exp(s);
            return -std::exp(lz - p.b * std::pow(t, p.gamma)) - p.a * std::pow(t, p.eta) + s;
        };
        break;
    case OracleKind::L52:
        psi = [&](double s) { return -std::exp(lz - p.beta * s) - p.alpha * s; };
        break;
    case OracleKind::L53:
        psi = [&](double s) {
            return -std::exp(lz - p.b * std::pow(std::exp(s), p.gamma)) - p.a * s;
        };
        break;
    case OracleKind::L54:
        psi = [&](double s) { return -std::exp(lz - p.b * s) - p.a * std::exp(p.eta * s) + s; };
        break;
    }

    // psi is unimodal: a coarse scan brackets the maximum, Brent refines it.
    const double s0 = std::log(p.t0), h = 0.05, drop = 60.0;
    double best = psi(s0), s_best = s0;
    std::size_t steps = 0;
    for (double s = s0 + h;; s += h) {
        double v = psi(s);
        if (v > best) {
            best = v;
            s_best = s;
        } else if (v < best - drop) {
            break;
        }
        if (++steps > 200000)
            throw QuadratureError("integrand does not decay", 1.0);
    }
    auto neg = [&](double s) { return -psi(s); };
    auto [s_star, neg_max] = boost::math::tools::brent_find_minima(
        neg, std::max(s0, s_best - h), s_best + h, std::numeric_limits<double>::digits / 2);
    double peak = -neg_max;
    if (peak < best) {
        s_star = s_best;
        peak = best;
    }

    const double delta = 1e-3;
    double curv = -(psi(s_star + delta) - 2.0 * peak + psi(s_star - delta)) / (delta * delta);
    double w = curv > 0.0 ? std::min(h, 1.0 / std::sqrt(curv)) : h;

    auto shifted = [&](double s) { return std::exp(psi(s) - peak); };
    double sum = 0.0, err = 0.0;
    auto piece = [&](double lo, double hi) {
        auto r = numerics::integrate(shifted, lo, hi, 1e-12);
        sum += r.value;
        err += r.error;
    };
    for (double lo = s_star, width = w;; width = std::min(2.0 * width, 1.0)) {
        piece(lo, lo + width);
        lo += width;
        if (psi(lo) < peak - drop)
            break;
    }
    for (double hi = s_star, width = w; hi > s0; width = std::min(2.0 * width, 1.0)) {
        double lo = std::max(s0, hi - width);
        piece(lo, hi);
        hi = lo;
        if (psi(hi) < peak - drop)
            break;
    }
    double achieved = err / sum;
    if (!(achieved <= 1e-6))
        throw QuadratureError("oracle quadrature did not converge", achieved);

    OracleResult out;
    out.log_integral = peak + std::log(sum);
    out.achieved_tolerance = achieved;
    switch (kind) {
    case OracleKind::L51:
        out.log_predicted =
            -p.a * std::pow(p.b, -p.eta / p.gamma) * std::pow(lz, p.eta / p.gamma);
        break;
    case OracleKind::L52:
        out.log_predicted = -(p.alpha / p.beta) * lz;
        break;
    case OracleKind::L53:
        out.log_predicted = -(p.a / p.gamma) * std::log(lz);
        break;
    case OracleKind::L54: {
        double theta = p.eta / (p.b + p.eta);
        double t1 = std::exp((std::log(p.b) + lz - std::log(p.a * p.eta)) / (p.b + p.eta));
        out.log_predicted = -(std::exp(lz - p.b * std::log(t1)) + p.a * std::pow(t1, p.eta));
        double c12 = std::pow(p.a, 1.0 - theta) *
                     (std::pow(p.eta / p.b, 1.0 - theta) + std::pow(p.b / p.eta, theta));
        out.log_predicted_closed_form = -c12 * std::pow(z, theta);
        return out;
    }
    }
    out.log_predicted_closed_form = out.log_predicted;
    return out;
}

}  // namespace rtail
