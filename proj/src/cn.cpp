#include <cmath>

#include "hp43/errors.hpp"
#include "hp43/fields.hpp"
#include "hp43/parallel.hpp"
#include "hp43/renorm.hpp"
#include "hp43/spectral.hpp"

namespace hp43 {

namespace {

// ‖Ż_N(t)‖²_{H¹} = Σ_{|n|≤N}⟨n⟩^{−2}|X̂(n)|², X = (V₀∗Y²)Y − 2tK_N∗Y.
double zdot_h1_norm2(const FourierField& Y, double t, const FourierField& kappa, double beta, int N)
{
    const FourierField v0y2 = apply_V0(multiply(Y, Y), beta);
    const FourierField cubic = multiply(v0y2, Y, N);
    const auto pts = cubic.lattice().points();
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Complex x = cubic.coeffs()[i] - 2.0 * t * kappa.coeffs()[i].real() * Y.coeffs()[i];
        s += std::norm(x) / pts[i].bracket2();
    }
    return s;
}

}  // namespace

Estimate c_N_monte_carlo(int N, double beta, const CnOptions& opt)
{
    if (opt.paths < 2) throw ConfigError("C_N needs at least 2 paths");
    const FourierField kappa = kappa_N(N, beta);
    std::vector<double> per_path(std::size_t(opt.paths));
    parallel_for(per_path.size(), [&](std::size_t p) {
        const WienerPath path = sample_Y_path(N, opt.timesteps, opt.seed, p);
        const auto& t = path.times();
        FourierField Y(N);
        double prev = 0.0, integral = 0.0;
        for (std::size_t k = 1; k < t.size(); ++k) {
            Y += path.increment(k - 1).apply_multiplier([](FrequencyIndex n) { return 1.0 / n.bracket(); });
            const double cur = zdot_h1_norm2(Y, t[k], kappa, beta, N);
            integral += 0.5 * (t[k] - t[k - 1]) * (prev + cur);
            prev = cur;
        }
        per_path[p] = 0.5 * integral;
    });
    const Estimate e = mean_se(per_path);
    if (e.se > 0.1 * std::abs(e.value))
        throw NumericalGuardError("C_N Monte Carlo standard error exceeds 10% of the estimate");
    return e;
}

}  // namespace hp43
