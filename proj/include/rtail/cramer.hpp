#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rtail/dist.hpp"
#include "rtail/rng.hpp"

namespace rtail {

/// Lundberg exponent and Cramer-Lundberg constants of S(t) for task length t.
struct LundbergSolution
{
    double t = 0.0;
    double gamma = 0.0;  ///< root of int_0^t e^(gamma y) G(dy) = 1
    double B = 0.0;      ///< int_0^t y e^(gamma y) G(dy)
    double C = 0.0;      ///< Gbar(t) / (gamma B)
    double residual = 0.0;
};

/// A tail probability with Monte Carlo error and deterministic envelopes.
struct TailEstimate
{
    double x = 0.0;
    double point = 0.0;
    double std_error = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    std::uint64_t n_used = 0;
    /// Probability mass left out by truncating an integral (already added to upper).
    double truncation = 0.0;
};

/// int_0^t e^(gamma y) G(dy).
double truncated_mgf(const DistributionSpec& G, double t, double gamma);

/// truncated_mgf - 1, evaluated without cancellation near the root.
double truncated_mgf_excess(const DistributionSpec& G, double t, double gamma);

/// int_0^t y e^(gamma y) G(dy).
double tilted_first_moment(const DistributionSpec& G, double t, double gamma);

/// Throws RootError when G(t) = 0 or Gbar(t) = 0.
LundbergSolution lundberg_root(const DistributionSpec& G, double t);

/// (e^(-gamma t) e^(-gamma u), min(1, e^(-gamma u))).
std::pair<double, double> lundberg_bounds(const LundbergSolution& sol, double u);

/// min(1, C e^(-gamma u)).
double cl_tail(const LundbergSolution& sol, double u);

/// mu * Gbar(t), the small-tail approximation of gamma(t).
double gamma_small_tail_asymptote(const DistributionSpec& G, double t);

/**
 * Sampler for the tilted increment density e^(gamma y) g(y) on [0, t].
 *
 * Exponential and Uniform G are inverted in closed form. Other families use
 * a tilted CDF tabulated once in the G-probability coordinate u = G(y)/G(t),
 * where the CDF has the smooth derivative G(t) e^(gamma y(u)); draws invert a
 * cubic Hermite interpolant and map back through quantile(G).
 */
class TiltedIncrementSampler
{
  public:
    TiltedIncrementSampler(const DistributionSpec& G, const LundbergSolution& sol,
                           bool force_table = false);

    double operator()(RngStream& rng) const { return invert(rng.uniform()); }
    /// Tilted quantile at v in (0, 1).
    double invert(double v) const;
    /// Tilted CDF at y (exact closed form or tabulated).
    double cdf(double y) const;
    bool tabulated() const noexcept { return kind_ == Kind::Table; }

  private:
    enum class Kind { Exponential, Uniform, Table };
    double table_u(double v) const;

    DistributionSpec G_;
    LundbergSolution sol_;
    Kind kind_;
    double rate_ = 0.0, delta_ = 0.0;  // exponential: delta = rate - gamma
    double lower_ = 0.0, width_ = 0.0;  // uniform
    double g_t_ = 0.0;                   // G(t)
    std::vector<double> u_, k_, dk_;     // table nodes, CDF values and slopes
};

/// Importance-sampling estimate of P(S(t) > u) under exponential tilting.
TailEstimate is_geometric_tail(const DistributionSpec& G, double t, double u, std::uint64_t n,
                               const RngStream& rng, unsigned workers = 1);

/// One draw of S(t): failures U < t accumulated until the first U > t.
double sample_geometric_sum(const DistributionSpec& G, double t, RngStream& rng);

/// KS distance of mu Gbar(t) S(t) (n copies) to the standard exponential law.
double renyi_statistic(const DistributionSpec& G, double t, std::uint64_t n, const RngStream& rng,
                       unsigned workers = 1);

}  // namespace rtail
