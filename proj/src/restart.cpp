#include "rtail/restart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rtail/error.hpp"
#include "rtail/parallel.hpp"

namespace rtail {

namespace {

constexpr std::uint64_t kFailureGuard = 1'000'000'000ULL;
constexpr double kLogitLow = -20.72326583694641;  // logit(1e-9)
constexpr double kLogitCeiling = 690.0;            // tail probability ~ 1e-300
constexpr double kRelativeOmission = 1e-6;

double logit_to_t(const DistributionSpec& F, double xi)
{
    if (xi <= 0.0)
        return quantile(F, 1.0 / (1.0 + std::exp(-xi)));
    return tail_quantile(F, 1.0 / (1.0 + std::exp(xi)));
}

double logit_of_tail(double q) { return std::log1p(-q) - std::log(q); }

}  // namespace

// Simulation ---------------------------------------------------------------------

RestartSample run_once(const DistributionSpec& F, const DistributionSpec& G, RngStream& rng)
{
    RestartSample r;
    r.T = sample(F, rng);
    if (is_bounded(G) && r.T >= support(G).upper)
        throw SimulationGuard("Gbar(T) = 0 at T = " + format_double(r.T) +
                              ": the task can never complete");
    for (std::uint64_t draws = 0;; ++draws) {
        if (draws >= kFailureGuard)
            throw SimulationGuard("run aborted after 1e9 failure draws at T = " +
                                  format_double(r.T) + " (Gbar(T) numerically 0)");
        double u = sample(G, rng);
        if (u > r.T)
            break;
        r.S += u;
        ++r.N;
    }
    r.X = r.T + r.S;
    return r;
}

double n_pmf_diagonal(std::uint64_t n)
{
    double k = static_cast<double>(n);
    return 1.0 / ((k + 2.0) * (k + 1.0));
}

namespace {

struct SimPartial
{
    std::vector<std::uint64_t> histogram;
    std::vector<std::uint64_t> exceed;
    double sum_x = 0.0;
    double sum_t = 0.0;
    std::uint64_t n = 0;

    void merge(const SimPartial& o)
    {
        if (histogram.size() < o.histogram.size())
            histogram.resize(o.histogram.size());
        if (exceed.size() < o.exceed.size())
            exceed.resize(o.exceed.size());
        for (std::size_t i = 0; i < o.histogram.size(); ++i)
            histogram[i] += o.histogram[i];
        for (std::size_t i = 0; i < o.exceed.size(); ++i)
            exceed[i] += o.exceed[i];
        sum_x += o.sum_x;
        sum_t += o.sum_t;
        n += o.n;
    }
};

SimPartial simulate_partials(const RunConfig& cfg, const std::vector<double>& xs,
                             std::uint64_t n_max)
{
    check_role(cfg.G, Role::G);
    const RngStream root(cfg.seed);
    return run_blocks<SimPartial>(
        cfg.n, cfg.workers, root,
        [&](std::uint64_t, std::uint64_t count, RngStream& sub) {
            SimPartial p;
            p.histogram.assign(n_max + 2, 0);
            p.exceed.assign(xs.size(), 0);
            for (std::uint64_t i = 0; i < count; ++i) {
                RestartSample r = run_once(cfg.F, cfg.G, sub);
                ++p.histogram[std::min(r.N, n_max + 1)];
                // xs is increasing: count thresholds strictly below X.
                auto k = std::lower_bound(xs.begin(), xs.end(), r.X) - xs.begin();
                for (std::ptrdiff_t j = 0; j < k; ++j)
                    ++p.exceed[j];
                p.sum_x += r.X;
                p.sum_t += r.T;
                ++p.n;
            }
            return p;
        },
        [](SimPartial& acc, const SimPartial& p) { acc.merge(p); });
}

}  // namespace

EmpiricalSummary simulate(const RunConfig& cfg, std::uint64_t n_max)
{
    if (cfg.n < 1)
        throw InvalidArgument("simulate: n must be >= 1");
    EmpiricalSummary s;
    s.x_grid = cfg.x_grid.resolve();
    SimPartial p = simulate_partials(cfg, s.x_grid, n_max);
    s.n = p.n;
    s.n_histogram = p.histogram;
    const double n = static_cast<double>(p.n);
    for (std::uint64_t k : p.exceed) {
        double q = static_cast<double>(k) / n;
        s.tail_at.push_back(q);
        s.tail_std_error.push_back(std::sqrt(q * (1.0 - q) / n));
    }
    s.mean_X = p.sum_x / n;
    s.mean_T = p.sum_t / n;
    return s;
}

std::vector<TailEstimate> crude_tail_grid(const RunConfig& cfg, const std::vector<double>& xs)
{
    if (cfg.n < 1)
        throw InvalidArgument("crude_tail: n must be >= 1");
    if (!std::is_sorted(xs.begin(), xs.end()))
        throw InvalidArgument("crude_tail: thresholds must be sorted");
    SimPartial p = simulate_partials(cfg, xs, 0);
    std::vector<TailEstimate> out;
    const double n = static_cast<double>(p.n);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        TailEstimate e;
        e.x = xs[i];
        e.point = static_cast<double>(p.exceed[i]) / n;
        e.std_error = std::sqrt(e.point * (1.0 - e.point) / n);
        std::tie(e.lower, e.upper) = numerics::clopper_pearson(p.exceed[i], p.n, 0.99);
        e.n_used = p.n;
        out.push_back(e);
    }
    return out;
}

TailEstimate crude_tail(const RunConfig& cfg, double x) { return crude_tail_grid(cfg, {x}).front(); }

std::vector<double> parallel_makespan(const DistributionSpec& F, const DistributionSpec& G,
                                      std::uint64_t n_subjobs, std::uint64_t reps,
                                      const RngStream& rng, unsigned workers)
{
    if (n_subjobs < 1 || reps < 1)
        throw InvalidArgument("parallel_makespan: n_subjobs and reps must be >= 1");
    check_role(G, Role::G);
    return run_blocks<std::vector<double>>(
        reps, workers, rng,
        [&](std::uint64_t, std::uint64_t count, RngStream& sub) {
            std::vector<double> part(count);
            for (auto& m : part) {
                m = 0.0;
                for (std::uint64_t k = 0; k < n_subjobs; ++k)
                    m = std::max(m, run_once(F, G, sub).X);
            }
            return part;
        },
        [](std::vector<double>& acc, const std::vector<double>& p) {
            acc.insert(acc.end(), p.begin(), p.end());
        },
        std::max<std::uint64_t>(1, kBlockSize / n_subjobs));
}

std::uint64_t coupled_order_check(const DistributionSpec& F1, const DistributionSpec& F2,
                                  const DistributionSpec& G, std::uint64_t n, RngStream& rng)
{
    check_role(G, Role::G);
    for (int k = 1; k < 1000; ++k) {
        double p = k / 1000.0;
        double q1 = quantile(F1, p), q2 = quantile(F2, p);
        if (q1 > q2 * (1.0 + 1e-12))
            throw InvalidArgument("coupled_order_check: F1 is not stochastically smaller than F2 (p = " +
                                  format_double(p) + ")");
    }
    std::uint64_t violations = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        double v0 = rng.uniform();
        const double t1 = quantile(F1, v0), t2 = quantile(F2, v0);
        double s1 = 0.0, s2 = 0.0;
        bool done1 = false;
        for (std::uint64_t draws = 0;; ++draws) {
            if (draws >= kFailureGuard)
                throw SimulationGuard("coupled run aborted after 1e9 failure draws");
            double u = quantile(G, rng.uniform());
            if (!done1) {
                if (u > t1)
                    done1 = true;
                else
                    s1 += u;
            }
            if (u > t2)
                break;
            s2 += u;
        }
        if (t1 + s1 > t2 + s2)
            ++violations;
    }
    return violations;
}

// Semi-analytic mixture tail -----------------------------------------------------

struct SemiAnalyticTail::Cache
{
    std::vector<double> t, log_t, log_gamma, log_c;
    numerics::MonotoneCubic gamma_interp, c_interp;
    double xi_step = 0.0;
    double xi_last = 0.0;
    bool capped = false;  // roots stop existing numerically past t.back()

    void add(double tt, const LundbergSolution& sol)
    {
        t.push_back(tt);
        log_t.push_back(std::log(tt));
        log_gamma.push_back(std::log(sol.gamma));
        log_c.push_back(std::log(sol.C));
    }
    void rebuild()
    {
        if (t.size() >= 2) {
            gamma_interp = numerics::MonotoneCubic(log_t, log_gamma);
            c_interp = numerics::MonotoneCubic(log_t, log_c);
        }
    }
};

namespace {

// Node acceptance: strictly increasing, inside the range where a root exists.
bool usable_node(const std::vector<double>& t, double tt, double lo)
{
    return std::isfinite(tt) && tt > lo && (t.empty() || tt > t.back() * (1.0 + 1e-12));
}

}  // namespace

SemiAnalyticTail::SemiAnalyticTail(DistributionSpec F, DistributionSpec G, QuadratureParams params)
    : F_(std::move(F)), G_(std::move(G)), params_(params), cache_(std::make_unique<Cache>())
{
    check_role(G_, Role::G);
    if (!(params_.trunc_eps > 0.0 && params_.trunc_eps < 0.5))
        throw InvalidArgument("semi_analytic_tail: trunc_eps must lie in (0, 0.5)");
    if (params_.cache_nodes < 2)
        throw InvalidArgument("semi_analytic_tail: need at least 2 cache nodes");
    a_ = std::max(support(F_).lower, support(G_).lower);
    if (F_.is<PointMass>())
        return;

    Cache& c = *cache_;
    const double xi_hi = logit_of_tail(params_.trunc_eps);
    c.xi_step = (xi_hi - kLogitLow) / (params_.cache_nodes - 1);

    std::vector<double> ts;
    for (int i = 0; i < params_.cache_nodes; ++i)
        ts.push_back(logit_to_t(F_, kLogitLow + i * c.xi_step));
    c.xi_last = xi_hi;
    // Resolve the steep end of gamma near the lower end of G's support.
    if (support(G_).lower > support(F_).lower)
        for (double p = 1e-9; p < 0.6; p *= std::sqrt(10.0))
            ts.push_back(quantile(G_, p));
    if (is_bounded(F_))
        ts.push_back(support(F_).upper);
    std::sort(ts.begin(), ts.end());

    const double g_hi = support(G_).upper;
    for (double tt : ts) {
        if (!usable_node(c.t, tt, a_) || tt >= g_hi || !(cdf(G_, tt) > 0.0))
            continue;
        if (!(tail(G_, tt) > 0.0)) {
            c.capped = true;
            break;
        }
        c.add(tt, lundberg_root(G_, tt));
    }
    c.rebuild();
}

SemiAnalyticTail::~SemiAnalyticTail() = default;

void SemiAnalyticTail::ensure_nodes(double t_needed) const
{
    Cache& c = *cache_;
    if (c.capped || is_bounded(F_) || F_.is<PointMass>())
        return;
    if (!c.t.empty() && c.t.back() >= t_needed)
        return;
    bool grew = false;
    // Two nodes past t_needed keep the interpolant away from its end interval.
    int past = 0;
    while (past < 2 && c.xi_last + c.xi_step < kLogitCeiling) {
        c.xi_last += c.xi_step;
        double tt = logit_to_t(F_, c.xi_last);
        if (!usable_node(c.t, tt, a_) || tt >= support(G_).upper)
            continue;
        if (!(tail(G_, tt) > 0.0)) {
            c.capped = true;
            break;
        }
        c.add(tt, lundberg_root(G_, tt));
        grew = true;
        if (tt >= t_needed)
            ++past;
    }
    if (grew)
        c.rebuild();
}

std::pair<double, double> SemiAnalyticTail::lookup(double t) const
{
    const Cache& c = *cache_;
    if (!c.gamma_interp.empty() && t >= c.t.front() && t <= c.t.back()) {
        double lt = std::log(t);
        return {std::exp(c.gamma_interp(lt)), std::exp(c.c_interp(lt))};
    }
    if (c.capped && !c.t.empty() && t > c.t.back())
        return {0.0, 1.0};
    if (!(tail(G_, t) > 0.0))
        return {0.0, 1.0};
    LundbergSolution sol = lundberg_root(G_, t);
    return {sol.gamma, sol.C};
}

std::pair<double, double> SemiAnalyticTail::gamma_and_c(double t) const
{
    std::lock_guard lock(mutex_);
    return lookup(t);
}

SemiAnalyticTail::Triple SemiAnalyticTail::integrate(double x, double lo, double hi) const
{
    Triple acc;
    if (!(hi > lo))
        return acc;
    const Cache& c = *cache_;
    std::vector<double> cuts{lo};
    for (double tt : c.t)
        if (tt > lo && tt < hi)
            cuts.push_back(tt);
    cuts.push_back(hi);

    // which: 0 point, 1 lower, 2 upper
    auto inner = [&](double t, int which) {
        auto [g, cc] = lookup(t);
        double u = x - t;
        double upper = std::min(1.0, std::exp(-g * u));
        double lower = std::min(upper, std::exp(-g * x));
        if (which == 1)
            return lower;
        if (which == 2)
            return upper;
        return std::clamp(cc * std::exp(-g * u), lower, upper);
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double p0 = cuts[i], p1 = cuts[i + 1];
        for (int which = 0; which < 3; ++which) {
            auto integrand = [&](double t) {
                double f = density(F_, t);
                return f > 0.0 ? f * inner(t, which) : 0.0;
            };
            double v = numerics::integrate(integrand, p0, p1, params_.rel_tol, 12).value;
            (which == 0 ? acc.point : which == 1 ? acc.lower : acc.upper) += v;
        }
    }
    return acc;
}

TailEstimate SemiAnalyticTail::operator()(double x) const
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw InvalidArgument("semi_analytic_tail: x must be positive and finite");
    std::lock_guard lock(mutex_);
    TailEstimate est;
    est.x = x;
    est.n_used = 0;

    if (const auto* pm = std::get_if<PointMass>(&F_.family())) {
        const double t0 = pm->location;
        if (x < t0) {
            est.point = est.lower = est.upper = 1.0;
        } else if (t0 == 0.0 || !(cdf(G_, t0) > 0.0)) {
            est.point = est.lower = est.upper = 0.0;
        } else {
            if (!(tail(G_, t0) > 0.0))
                throw RootError("semi_analytic_tail: Gbar(t0) = 0, the task never completes");
            LundbergSolution sol = lundberg_root(G_, t0);
            std::tie(est.lower, est.upper) = lundberg_bounds(sol, x - t0);
            est.point = std::clamp(cl_tail(sol, x - t0), est.lower, est.upper);
        }
        return est;
    }

    const double exact = tail(F_, x);
    const Support sf = support(F_);
    const double range_hi = std::min(x, sf.upper);
    if (range_hi <= a_) {
        est.point = est.lower = est.upper = exact;
        return est;
    }
    const Support sg = support(G_);
    if (std::isfinite(sg.upper) && range_hi >= sg.upper && tail(F_, sg.upper) > 0.0)
        throw RootError("semi_analytic_tail: Gbar(t) = 0 on the integration range (t >= " +
                        format_double(sg.upper) + "); X is not a proper random variable");

    double q = params_.trunc_eps;
    double t_star = is_bounded(F_) ? range_hi : std::min(range_hi, tail_quantile(F_, q));
    ensure_nodes(t_star);
    Triple acc = integrate(x, a_, t_star);
    double omitted = 0.0;
    while (t_star < range_hi) {
        omitted = std::max(0.0, tail(F_, t_star) - exact);
        if (omitted <= kRelativeOmission * (exact + acc.point) || q <= 1e-297)
            break;
        q = std::max(q * 1e-3, 1e-300);
        double next = std::min(range_hi, tail_quantile(F_, q));
        ensure_nodes(next);
        Triple more = integrate(x, t_star, next);
        acc.point += more.point;
        acc.lower += more.lower;
        acc.upper += more.upper;
        t_star = next;
        omitted = 0.0;
    }
    if (t_star >= range_hi)
        omitted = 0.0;

    est.point = std::min(1.0, exact + acc.point);
    est.lower = std::min(est.point, exact + acc.lower);
    est.upper = std::min(1.0, std::max(est.point, exact + acc.upper + omitted));
    est.truncation = omitted;
    return est;
}

TailEstimate semi_analytic_tail(const DistributionSpec& F, const DistributionSpec& G, double x,
                                const QuadratureParams& quad)
{
    return SemiAnalyticTail(F, G, quad)(x);
}

std::pair<double, double> i_pm(const DistributionSpec& F, const DistributionSpec& G, double x,
                               double eps, double t0, const QuadratureParams& quad)
{
    if (!(x > 0.0))
        throw InvalidArgument("i_pm: x must be positive");
    if (!(eps > 0.0 && eps < 1.0))
        throw InvalidArgument("i_pm: eps must lie in (0, 1)");
    check_role(G, Role::G);
    const double m = mean(G);
    if (!std::isfinite(m))
        throw InvalidArgument("i_pm: G has infinite mean, mu = 0");
    const double mu = 1.0 / m;

    if (const auto* pm = std::get_if<PointMass>(&F.family())) {
        if (pm->location < t0)
            return {0.0, 0.0};
        double gb = tail(G, pm->location);
        return {std::exp(-mu * gb * x * (1 - eps)), std::exp(-mu * gb * x * (1 + eps))};
    }

    const double lo = std::max(t0, support(F).lower);
    const double hi = is_bounded(F) ? support(F).upper : tail_quantile(F, quad.trunc_eps);
    if (!(hi > lo))
        return {0.0, 0.0};
    const double closure = is_bounded(F) ? 0.0 : tail(F, hi);

    std::vector<double> cuts{lo};
    const double xi_lo = std::max(kLogitLow, std::log(std::max(cdf(F, lo), 1e-300)) -
                                                 std::log(tail(F, lo)));
    const double xi_hi = logit_of_tail(quad.trunc_eps);
    constexpr int kPieces = 128;
    for (int i = 1; i < kPieces; ++i) {
        double tt = logit_to_t(F, xi_lo + i * (xi_hi - xi_lo) / kPieces);
        if (tt > cuts.back() && tt < hi)
            cuts.push_back(tt);
    }
    cuts.push_back(hi);

    auto run = [&](double c) {
        double total = closure;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            auto integrand = [&](double t) {
                double f = density(F, t);
                return f > 0.0 ? f * std::exp(-mu * tail(G, t) * x * c) : 0.0;
            };
            total += numerics::integrate(integrand, cuts[i], cuts[i + 1], quad.rel_tol, 12).value;
        }
        return total;
    };
    return {run(1.0 - eps), run(1.0 + eps)};
}

// Importance sampling of the mixture tail ----------------------------------------

TailEstimate importance_tail(const DistributionSpec& F, const DistributionSpec& G, double x,
                             std::uint64_t n, const RngStream& rng, unsigned workers,
                             double trunc_eps)
{
    if (!(x > 0.0))
        throw InvalidArgument("importance_tail: x must be positive");
    if (n < 1)
        throw InvalidArgument("importance_tail: n must be >= 1");
    check_role(G, Role::G);

    TailEstimate est;
    est.x = x;
    est.lower = 0.0;
    est.upper = 1.0;
    const double exact = tail(F, x);

    if (const auto* pm = std::get_if<PointMass>(&F.family())) {
        const double t0 = pm->location;
        if (x < t0 || t0 == 0.0 || !(cdf(G, t0) > 0.0)) {
            est.point = x < t0 ? 1.0 : 0.0;
            est.n_used = n;
            return est;
        }
        TailEstimate inner = is_geometric_tail(G, t0, x - t0, n, rng, workers);
        inner.x = x;
        return inner;
    }

    const double a = std::max(support(F).lower, support(G).lower);
    const double range_hi = std::min(x, support(F).upper);
    if (range_hi <= a) {
        est.point = exact;
        est.n_used = n;
        return est;
    }
    const double b = is_bounded(F) ? range_hi : std::min(range_hi, tail_quantile(F, trunc_eps));
    if (std::isfinite(support(G).upper) && b >= support(G).upper)
        throw RootError("importance_tail: Gbar(t) = 0 on the integration range");
    const double fa = cdf(F, a), fb = cdf(F, b);
    const double ta = tail(F, a), tb = tail(F, b);
    const double weight = ta - tb;
    const double dn = static_cast<double>(n);

    Moments m = run_blocks<Moments>(
        n, workers, rng,
        [&](std::uint64_t block, std::uint64_t count, RngStream& sub) {
            Moments part;
            for (std::uint64_t j = 0; j < count; ++j) {
                const double v = (static_cast<double>(block * kBlockSize + j) + sub.uniform()) / dn;
                double t;
                double p = fa + v * (fb - fa);
                if (p <= 0.5)
                    t = p > 0.0 ? quantile(F, p) : a;
                else
                    t = tail_quantile(F, std::max(ta - v * weight, 1e-300));
                t = std::clamp(t, a, b);
                if (!(t > a) || !(cdf(G, t) > 0.0)) {
                    part.add(0.0);
                    continue;
                }
                const LundbergSolution sol = lundberg_root(G, t);
                const TiltedIncrementSampler step(G, sol);
                const double u = x - t;
                double s = 0.0;
                do {
                    s += step(sub);
                } while (s <= u);
                part.add(std::exp(-sol.gamma * s));
            }
            return part;
        },
        [](Moments& acc, const Moments& p) { acc.merge(p); });

    est.point = std::clamp(exact + weight * m.mean(), 0.0, 1.0);
    est.std_error = weight * m.std_error();
    est.truncation = b < range_hi ? std::max(0.0, tb - exact) : 0.0;
    est.n_used = m.count;
    return est;
}

}  // namespace rtail
