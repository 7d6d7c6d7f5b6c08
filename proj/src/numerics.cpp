#include "rtail/numerics.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace rtail::numerics {

namespace {

// Legendre continued fraction (modified Lentz); log Gamma(s, x). Good for x >= 1.
double log_upper_gamma_cf(double s, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16)
            return -x + s * std::log(x) + std::log(h);
    }
    throw Error("log_upper_incomplete_gamma: continued fraction did not converge");
}

}  // namespace

double log_upper_incomplete_gamma(double s, double x)
{
    if (!(x > 0.0))
        throw InvalidArgument("log_upper_incomplete_gamma: x must be positive");
    if (s > 0.0) {
        if (x < s + 1.0)
            return std::log(boost::math::tgamma(s, x));
        return log_upper_gamma_cf(s, x);
    }
    if (x >= 1.0)
        return log_upper_gamma_cf(s, x);

    // Small x, s <= 0: step down from a start value in (0, 1] or from E1 at 0.
    double a;
    double value;
    if (s == std::floor(s)) {
        a = 0.0;
        value = boost::math::expint(1, x);
    } else {
        a = s - std::floor(s);
        value = boost::math::tgamma(a, x);
    }
    while (a - 1.0 >= s - 1e-12) {
        // Gamma(a-1, x) = (x^(a-1) e^-x - Gamma(a, x)) / (1 - a)
        value = (std::pow(x, a - 1.0) * std::exp(-x) - value) / (1.0 - a);
        a -= 1.0;
    }
    return std::log(value);
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y))
{
    const std::size_t n = x_.size();
    if (n != y_.size())
        throw InvalidArgument("MonotoneCubic: size mismatch");
    d_.assign(n, 0.0);
    if (n < 2)
        return;
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        if (!(h[i] > 0))
            throw InvalidArgument("MonotoneCubic: nodes must be strictly increasing");
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
        d_[0] = d_[1] = delta[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0) {
            d_[i] = 0.0;
        } else {
            double w1 = 2 * h[i] + h[i - 1];
            double w2 = h[i] + 2 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double m0, double m1) {
        double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (d * m0 <= 0)
            return 0.0;
        if (m0 * m1 <= 0 && std::abs(d) > std::abs(3 * m0))
            return 3 * m0;
        return d;
    };
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double MonotoneCubic::operator()(double t) const
{
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    double h = x_[i + 1] - x_[i];
    double s = (t - x_[i]) / h;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1;
    double h10 = s3 - 2 * s2 + s;
    double h01 = -2 * s3 + 3 * s2;
    double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double ks_pvalue(double d, std::size_t n)
{
    // Kolmogorov series with the Stephens small-sample correction.
    double sn = std::sqrt(static_cast<double>(n));
    double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.2)
        return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16)
            break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double chi_square_pvalue(double statistic, double dof)
{
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence)
{
    if (n == 0)
        return {0.0, 1.0};
    double alpha = 1.0 - confidence;
    double kk = static_cast<double>(k), nn = static_cast<double>(n);
    double lo = 0.0, hi = 1.0;
    if (k > 0)
        lo = boost::math::quantile(boost::math::beta_distribution<>(kk, nn - kk + 1), alpha / 2);
    if (k < n)
        hi = boost::math::quantile(boost::math::beta_distribution<>(kk + 1, nn - kk),
                                   1 - alpha / 2);
    return {lo, hi};
}

}  // namespace rtail::numerics
