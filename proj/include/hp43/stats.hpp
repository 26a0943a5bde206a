#pragma once

#include <span>
#include <vector>

namespace hp43 {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Sample mean and its standard error (i.i.d. samples).
Estimate mean_se(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

/// Mean with a batch-means standard error for a correlated series.
Estimate batch_means(std::span<const double> xs, std::size_t batches);

/// Integrated autocorrelation time τ = 1 + 2Σρ_k with Sokal's automatic window (c = 5).
double integrated_autocorr_time(std::span<const double> xs);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope·x + intercept.
LineFit linear_fit(std::span<const double> x, std::span<const double> y);
/// Least squares on (log x, log y).
LineFit loglog_fit(std::span<const double> x, std::span<const double> y);

/// z-score of a − b given independent standard errors.
double z_score(const Estimate& a, const Estimate& b);

}  // namespace hp43
