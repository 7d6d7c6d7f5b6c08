#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "rtail/config.hpp"
#include "rtail/cramer.hpp"
#include "rtail/dist.hpp"
#include "rtail/numerics.hpp"
#include "rtail/rng.hpp"

namespace rtail {

/// One RESTART run: X = T + S with S the sum of the N failed attempts.
struct RestartSample
{
    double T = 0.0;
    std::uint64_t N = 0;
    double S = 0.0;
    double X = 0.0;
};

/// Draws T ~ F, then failures U ~ G until the first U > T.
/// Throws SimulationGuard after 1e9 failure draws or when Gbar(T) = 0.
RestartSample run_once(const DistributionSpec& F, const DistributionSpec& G, RngStream& rng);

struct EmpiricalSummary
{
    std::uint64_t n = 0;
    std::vector<double> x_grid;
    std::vector<double> tail_at;
    std::vector<double> tail_std_error;
    /// Counts of N = 0..n_max followed by one overflow bucket.
    std::vector<std::uint64_t> n_histogram;
    double mean_X = 0.0;
    double mean_T = 0.0;

    bool operator==(const EmpiricalSummary&) const = default;
};

EmpiricalSummary simulate(const RunConfig& cfg, std::uint64_t n_max = 20);

/// 1 / ((n + 2)(n + 1)), the law of N when F = G.
double n_pmf_diagonal(std::uint64_t n);

struct QuadratureParams
{
    double rel_tol = 1e-10;
    double trunc_eps = 1e-12;
    int cache_nodes = 256;
};

/**
 * Mixture-identity evaluator of Hbar(x) = Fbar(x) + int_0^x P(S(t) > x - t) f(t) dt.
 *
 * The inner probability is the Cramer-Lundberg approximation clamped to the
 * Lundberg bounds; the bounds themselves give the lower and upper envelopes.
 * gamma(t) and C(t) are cached at nodes equally spaced in log(F/Fbar) and
 * interpolated monotonically in log t. The cache grows toward the far tail on
 * demand when truncation at trunc_eps would drop more than 1e-6 of the answer.
 */
class SemiAnalyticTail
{
  public:
    SemiAnalyticTail(DistributionSpec F, DistributionSpec G, QuadratureParams params = {});
    ~SemiAnalyticTail();
    SemiAnalyticTail(const SemiAnalyticTail&) = delete;
    SemiAnalyticTail& operator=(const SemiAnalyticTail&) = delete;

    TailEstimate operator()(double x) const;

    /// Interpolated (gamma, C) at t; falls back to a direct root outside the cache.
    std::pair<double, double> gamma_and_c(double t) const;

  private:
    struct Cache;
    struct Triple
    {
        double point = 0.0, lower = 0.0, upper = 0.0;
    };
    Triple integrate(double x, double lo, double hi) const;
    void ensure_nodes(double t_needed) const;
    std::pair<double, double> lookup(double t) const;

    DistributionSpec F_, G_;
    QuadratureParams params_;
    double a_ = 0.0;  // integration start: max of the support lower bounds
    mutable std::mutex mutex_;
    std::unique_ptr<Cache> cache_;
};

TailEstimate semi_analytic_tail(const DistributionSpec& F, const DistributionSpec& G, double x,
                                const QuadratureParams& quad = {});

/// (I_minus, I_plus) with I_pm = int_t0^inf exp(-mu Gbar(t) x (1 +- eps)) f(t) dt.
std::pair<double, double> i_pm(const DistributionSpec& F, const DistributionSpec& G, double x,
                               double eps, double t0, const QuadratureParams& quad = {});

/// Fraction of simulated X exceeding x, with a 99% Clopper-Pearson interval.
TailEstimate crude_tail(const RunConfig& cfg, double x);
std::vector<TailEstimate> crude_tail_grid(const RunConfig& cfg, const std::vector<double>& xs);

/**
 * Importance-sampling estimate of Hbar(x): T is drawn by stratified inversion
 * of F on the range where the failure sum matters, and P(S(T) > x - T) is
 * estimated with one exponentially tilted path per draw.
 */
TailEstimate importance_tail(const DistributionSpec& F, const DistributionSpec& G, double x,
                             std::uint64_t n, const RngStream& rng, unsigned workers = 1,
                             double trunc_eps = 1e-12);

/// reps draws of max(X_1, ..., X_n_subjobs).
std::vector<double> parallel_makespan(const DistributionSpec& F, const DistributionSpec& G,
                                      std::uint64_t n_subjobs, std::uint64_t reps,
                                      const RngStream& rng, unsigned workers = 1);

/// Coupled runs driven by one uniform stream; returns the number with X1 > X2.
std::uint64_t coupled_order_check(const DistributionSpec& F1, const DistributionSpec& F2,
                                  const DistributionSpec& G, std::uint64_t n, RngStream& rng);

}  // namespace rtail
