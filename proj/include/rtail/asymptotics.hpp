#pragma once

#include <map>
#include <string>
#include <string_view>

#include "rtail/dist.hpp"

namespace rtail {

enum class RegimeKind {
    Diagonal,
    Case11,
    Case22,
    Case21,
    Case12,
    GammaClass,
    RegVar,
    WeibullClass,
    BoundedSupport,
    FixedT
};

/// Sharp: Hbar(x) ~ value. Logarithmic: log Hbar ~ log value. LogLog: log(-log Hbar) ~ log(-log value).
enum class Mode { Sharp, Logarithmic, LogLog };

std::string_view to_string(RegimeKind k) noexcept;
std::string_view to_string(Mode m) noexcept;

/// Tail regime of H for a pair (F, G) with the constants of its asymptotic form.
struct RegimeCase
{
    RegimeKind kind = RegimeKind::Diagonal;
    double theta = 1.0;
    std::map<std::string, double> constants;
    Mode mode = Mode::Sharp;
    DistributionSpec F = DistributionSpec::exponential(1.0);
    DistributionSpec G = DistributionSpec::exponential(1.0);
};

/**
 * Picks the regime by precedence: F = G, point-mass F, bounded F, matched
 * sharp families (Exponential/Gamma pairs, Weibull pairs of equal shape,
 * Pareto pairs with finite-mean G), then the logarithmic case table.
 * Throws InvalidArgument for LogNormal or for an unbounded F with bounded G.
 */
RegimeCase classify(const DistributionSpec& F, const DistributionSpec& G);

/// min(1, 1 / (mu x)).
double asymptote_diagonal(double mu, double x);

/// Density c e^(-lambda t) t^alpha.
struct GammaClassParams
{
    double lambda_F, alpha_F, c_F;
    double lambda_G, alpha_G, c_G;
    double mu;
};

/// c_H log^(alpha_F - alpha_H alpha_G)(x) / x^alpha_H with alpha_H = lambda_F / lambda_G and
/// c_H = c_F Gamma(alpha_H) lambda_G^(alpha_H - 1 - alpha_F + alpha_H alpha_G) / (mu^alpha_H c_G^alpha_H).
/// Requires x > e.
double asymptote_gamma_class(const GammaClassParams& p, double x);
double gamma_class_constant(const GammaClassParams& p);

/// Slowly varying factor c log^p(t).
struct LogPower
{
    double c = 1.0;
    double p = 0.0;
    double operator()(double t) const;
};

/// Density L(t) / t^(1 + alpha).
struct RegVarParams
{
    double alpha_F;
    LogPower L_F;
    double alpha_G;
    LogPower L_G;
    double mu;
};

/// L_H(x) / x^alpha_H with alpha_H = alpha_F / alpha_G and
/// L_H(x) = Gamma(alpha_H) alpha_G^(alpha_H - 1) / mu^alpha_H * L_F(x^(1/alpha_G)) / L_G^alpha_H(x^(1/alpha_G)).
double asymptote_regvar(const RegVarParams& p, double x);

/// Density e^(-lambda t^eta) t^alpha L(t).
struct WeibullClassParams
{
    double lambda_F, alpha_F;
    LogPower L_F;
    double eta_F;
    double lambda_G, alpha_G;
    LogPower L_G;
    double eta_G;
    double mu;
};

double weibull_class_omega(const WeibullClassParams& p);

/// L_H(x) / x^alpha_H with alpha_H = lambda_F / lambda_G and
/// L_H(x) = Gamma(alpha_H) lambda_G^(alpha_H - 1 - omega) eta^(alpha_H - 1) / mu^alpha_H
///          * log^omega(x) L_F(log^(1/eta) x) / L_G^alpha_H(log^(1/eta) x).
/// Throws when eta_F != eta_G.
double asymptote_weibull_class(const WeibullClassParams& p, double x);

/// A B^a Gbar(t0) Gamma(a + 1) / (gamma e^(a gamma t0) g(t0)^(a + 1)) e^(-gamma x) / x^(a + 1)
/// for F with density ~ A (t0 - t)^a at its endpoint t0 (Uniform or PolyEndpoint).
double asymptote_bounded(const DistributionSpec& F, const DistributionSpec& G, double x);

/// C(t0) e^(gamma t0) e^(-gamma x), for x >= t0.
double asymptote_fixed(double t0, const DistributionSpec& G, double x);

/**
 * Predicted -log Hbar(x) of a logarithmic-mode case: c11 log^theta11 x,
 * theta22 log x, theta21 log log x, or x^theta12 (the last to be compared on
 * the log-log scale). Rejects x outside the case's domain.
 */
double log_asymptote(const RegimeCase& rc, double x);

/// Sharp value, or exp(-log_asymptote) for logarithmic modes.
double evaluate_asymptote(const RegimeCase& rc, double x);

/// Sharp: point / value. Logarithmic: -log point / log_asymptote.
/// LogLog: log(-log point) / log(log_asymptote).
double asymptote_ratio(const RegimeCase& rc, double x, double point);

enum class Verdict { Finite, Infinite, Undetermined };
std::string_view to_string(Verdict v) noexcept;

struct MomentVerdict
{
    double alpha = 1.0;
    Verdict verdict = Verdict::Undetermined;
};

/// Whether E X^alpha is finite, by comparing -log Gbar against (1/alpha) (-log Fbar)
/// term by term in their leading-order expansions.
MomentVerdict moment_classify(const DistributionSpec& F, const DistributionSpec& G, double alpha);

enum class OracleKind { L51, L52, L53, L54 };
std::string_view to_string(OracleKind k) noexcept;
OracleKind parse_oracle_kind(std::string_view text);

struct OracleParams
{
    double a = 1.0, b = 1.0, gamma = 1.0, eta = 1.0;
    double alpha = 1.0, beta = 1.0;
    double t0 = 1.0;
};

/**
 * Integrals with known logarithmic asymptotics, evaluated as logs:
 *   L51: int_t0^inf exp(-e^(-b t^gamma) z - a t^eta) dt     ~log  exp(-a b^(-eta/gamma) log^(eta/gamma) z)
 *   L52: int_t0^inf exp(-t^(-beta) z) t^-(alpha+1) dt        ~log  z^(-alpha/beta)
 *   L53: int_t0^inf exp(-e^(-b t^gamma) z) t^-(a+1) dt       ~log  log^(-a/gamma) z
 *   L54: int_t0^inf exp(-t^(-b) z - a t^eta) dt              ~log  exp(-f(t1)),
 * where f(t) = t^(-b) z + a t^eta and t1 its minimizer. For L54 the closed form
 * c12 z^theta12 with c12 = a^(1-theta12) [(eta/b)^(1-theta12) + (b/eta)^theta12]
 * is reported alongside; it is not f(t1) in general.
 */
struct OracleResult
{
    double log_integral = 0.0;
    double log_predicted = 0.0;
    double log_predicted_closed_form = 0.0;  ///< L54 only; equals log_predicted otherwise
    double achieved_tolerance = 0.0;
};

OracleResult integral_oracle(OracleKind kind, const OracleParams& p, double z);

}  // namespace rtail
