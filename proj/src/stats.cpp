#include "hp43/stats.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hp43 {

double sample_variance(std::span<const double> xs)
{
    if (xs.size() < 2) return 0.0;
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / double(xs.size() - 1);
}

Estimate mean_se(std::span<const double> xs)
{
    if (xs.empty()) return {};
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    return {m, std::sqrt(sample_variance(xs) / double(xs.size()))};
}

Estimate batch_means(std::span<const double> xs, std::size_t batches)
{
    if (batches < 2 || xs.size() < batches) throw std::invalid_argument("not enough samples for batch means");
    const std::size_t len = xs.size() / batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b)
        means[b] = std::accumulate(xs.begin() + b * len, xs.begin() + (b + 1) * len, 0.0) / double(len);
    return mean_se(means);
}

double integrated_autocorr_time(std::span<const double> xs)
{
    const std::size_t n = xs.size();
    if (n < 4) return 1.0;
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / double(n);
    double c0 = 0.0;
    for (double x : xs) c0 += (x - m) * (x - m);
    c0 /= double(n);
    if (c0 <= 0.0) return 1.0;
    double tau = 1.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
        double ck = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) ck += (xs[i] - m) * (xs[i + k] - m);
        ck /= double(n);
        tau += 2.0 * ck / c0;
        if (double(k) >= 5.0 * tau) break;
    }
    return std::max(tau, 1.0);
}

LineFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit needs matching samples");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double rss = std::max(syy - f.slope * sxy, 0.0);
    f.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    f.slope_se = n > 2 ? std::sqrt(rss / double(n - 2) / sxx) : 0.0;
    return f;
}

LineFit loglog_fit(std::span<const double> x, std::span<const double> y)
{
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) lx[i] = std::log(x[i]);
    for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
    return linear_fit(lx, ly);
}

double z_score(const Estimate& a, const Estimate& b)
{
    const double s = std::hypot(a.se, b.se);
    if (s == 0.0) return a.value == b.value ? 0.0 : INFINITY;
    return (a.value - b.value) / s;
}

}  // namespace hp43
