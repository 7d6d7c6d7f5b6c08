#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "rtail/rng.hpp"

namespace rtail {

/// Which side of the model a distribution plays: task time (F) or failure time (G).
enum class Role { F, G };

struct Exponential
{
    double rate;
    bool operator==(const Exponential&) const = default;
};

struct Gamma
{
    double shape;
    double rate;
    bool operator==(const Gamma&) const = default;
};

struct Weibull
{
    double shape;
    double scale;
    bool operator==(const Weibull&) const = default;
};

/// Power tail with slowly varying factor: density ~ c log^p(t) / t^(index+1).
struct Pareto
{
    double index;
    double scale;
    double log_power = 0.0;
    bool operator==(const Pareto&) const = default;
};

struct LogNormal
{
    double log_location;
    double log_scale;
    bool operator==(const LogNormal&) const = default;
};

struct Uniform
{
    double lower;
    double upper;
    bool operator==(const Uniform&) const = default;
};

struct PointMass
{
    double location;
    bool operator==(const PointMass&) const = default;
};

/// Density ~ amplitude * (endpoint - t)^exponent as t approaches the endpoint.
struct PolyEndpoint
{
    double amplitude;
    double exponent;
    double endpoint;
    bool auto_amplitude = false;
    bool operator==(const PolyEndpoint&) const = default;
};

/**
 * An immutable, validated parametric distribution.
 *
 * Construction rejects parameters outside the family's domain. A Pareto with
 * log_power p has density
 *     f(t) = K a s^a (1 + log(t/s))^p / t^(a+1),  t >= s,
 * so its slowly varying factor behaves like K a s^a log^p t. A PolyEndpoint
 * has density (t0 - t)^e [A + B (t0 - t)] on [0, t0], with B chosen so the
 * density integrates to one; `auto` amplitude gives B = 0.
 */
class DistributionSpec
{
  public:
    using Family =
        std::variant<Exponential, Gamma, Weibull, Pareto, LogNormal, Uniform, PointMass, PolyEndpoint>;

    explicit DistributionSpec(Family family);

    static DistributionSpec exponential(double rate) { return DistributionSpec(Exponential{rate}); }
    static DistributionSpec gamma(double shape, double rate)
    {
        return DistributionSpec(Gamma{shape, rate});
    }
    static DistributionSpec weibull(double shape, double scale)
    {
        return DistributionSpec(Weibull{shape, scale});
    }
    static DistributionSpec pareto(double index, double scale, double log_power = 0.0)
    {
        return DistributionSpec(Pareto{index, scale, log_power});
    }
    static DistributionSpec lognormal(double log_location, double log_scale)
    {
        return DistributionSpec(LogNormal{log_location, log_scale});
    }
    static DistributionSpec uniform(double lower, double upper)
    {
        return DistributionSpec(Uniform{lower, upper});
    }
    static DistributionSpec point_mass(double location) { return DistributionSpec(PointMass{location}); }
    /// amplitude <= 0 selects automatic normalization.
    static DistributionSpec poly_endpoint(double amplitude, double exponent, double endpoint);

    const Family& family() const noexcept { return family_; }
    template <class T>
    bool is() const noexcept
    {
        return std::holds_alternative<T>(family_);
    }
    template <class T>
    const T& as() const
    {
        return std::get<T>(family_);
    }

    /// Lower-case family name as used in the text form.
    std::string_view name() const noexcept;

    /// log of the Pareto normalizer K (0 for other families).
    double pareto_log_norm() const noexcept { return pareto_log_norm_; }
    /// Correction coefficient B of a PolyEndpoint (0 for other families).
    double poly_correction() const noexcept { return poly_correction_; }

    bool operator==(const DistributionSpec& other) const { return family_ == other.family_; }

  private:
    Family family_;
    double pareto_log_norm_ = 0.0;
    double poly_correction_ = 0.0;
};

struct Support
{
    double lower;
    double upper;  ///< +inf when unbounded
};

double density(const DistributionSpec& spec, double t);
double cdf(const DistributionSpec& spec, double t);
/// P(T > t).
double tail(const DistributionSpec& spec, double t);
/// Smallest t with cdf(t) >= p, for p in (0, 1).
double quantile(const DistributionSpec& spec, double p);
/// Smallest t with tail(t) <= q, for q in (0, 1); accurate for tiny q.
double tail_quantile(const DistributionSpec& spec, double q);
double sample(const DistributionSpec& spec, RngStream& rng);
/// Analytic mean; +inf for a Pareto with index <= 1.
double mean(const DistributionSpec& spec);
Support support(const DistributionSpec& spec);
bool has_density(const DistributionSpec& spec);
bool is_bounded(const DistributionSpec& spec);

/// Rewrites a spec into a canonical member of its equivalence class
/// (Weibull with shape 1 and Gamma with shape 1 become Exponential).
DistributionSpec canonical(const DistributionSpec& spec);
/// True when both specs describe the same distribution.
bool same_distribution(const DistributionSpec& a, const DistributionSpec& b);

/// Throws InvalidArgument when the spec cannot play `role`.
void check_role(const DistributionSpec& spec, Role role);

// Tail classes --------------------------------------------------------------

struct ClassF1
{
    double alpha, eta;  ///< f(t) ~log exp(-alpha t^eta)
};
struct ClassF2
{
    double alpha;  ///< f(t) ~log t^-(alpha+1)
};
struct ClassG1
{
    double beta, gamma;  ///< Gbar(t) ~log exp(-beta t^gamma)
};
struct ClassG2
{
    double beta;  ///< Gbar(t) ~log t^-beta
};
struct ClassBounded
{
    double endpoint;
};
struct ClassNone
{
};

using TailClassTag = std::variant<ClassF1, ClassF2, ClassG1, ClassG2, ClassBounded, ClassNone>;

TailClassTag tail_class(const DistributionSpec& spec, Role role);
std::string to_string(const TailClassTag& tag);

// Text form -----------------------------------------------------------------

/// `family(name=value, ...)`, e.g. `exponential(rate=1)`. Round-trips exactly.
std::string to_string(const DistributionSpec& spec);
DistributionSpec parse_distribution(std::string_view text);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);
/// Strict double parse of the whole string.
double parse_double(std::string_view text);

}  // namespace rtail
