#pragma once

#include <optional>

#include "hp43/fourier_field.hpp"
#include "hp43/stats.hpp"

namespace hp43 {

struct PotentialParams {
    double beta = 2.0;   // Bessel order of V
    double sigma = 1.0;  // coupling
    double A = 0.0;      // taming strength
    double gamma = 2.0;  // taming exponent

    /// Throws ConfigError unless beta > 0 and, if `focusing`, γ ∈ [max((β+1)/(β−1), 2), 3].
    void validate(bool focusing = false) const;
};

/// V̂(n) = ⟨n⟩^{−β}
double bessel_symbol(FrequencyIndex n, double beta);
/// V̂₀(n) = V̂(n) − 𝟙_{n=0}
double bessel_symbol0(FrequencyIndex n, double beta);
FourierField apply_V(const FourierField& u, double beta);
FourierField apply_V0(const FourierField& u, double beta);

/// σ_N = Σ_{|n|≤N} ⟨n⟩^{−2}
double sigma_N(int N);
/// α_N = Σ_{n₁+n₂≠0} V̂(n₁+n₂)⟨n₁⟩^{−2}⟨n₂⟩^{−2}
double alpha_N(int N, double beta);
/// κ_N(n) = Σ_{|n₁|≤N, n₁≠−n} V̂(n+n₁)⟨n₁⟩^{−2} for |n| ≤ N, stored as a real, even field.
FourierField kappa_N(int N, double beta);

struct SingularityConstants {
    double A_N = 0.0;
    double B_N = 0.0;
};
/// A_N = Σ_{|n|≤N}⟨n⟩^{−2β−2}, B_N = (log N)^{−1/4} A_N^{−1/2}
SingularityConstants singularity_constants(int N, double beta);

/// Exact E|X̂(n)|² at t = 1 for the renormalized cubic X = (V₀∗:Y_N²:)Y_N − 2K_N∗Y_N,
/// Y_N ~ μ₁ truncated; one value per |n| ≤ N.
std::vector<double> cubic_mode_variance(int N, double beta);

struct CnOptions {
    int paths = 200;
    int timesteps = 32;
    std::uint64_t seed = 1;
};

/// C_N = ½𝔼∫₀¹‖Ż_N(t)‖²_{H¹}dt by Monte Carlo over Wiener paths (trapezoid rule in t).
/// Throws NumericalGuardError if the standard error exceeds 10% of the estimate.
Estimate c_N_monte_carlo(int N, double beta, const CnOptions& opt);
/// Same constant from the exact Wick contraction and ∫₀¹t³dt = 1/4.
double c_N_exact(int N, double beta);

struct RenormTable {
    int N = 0;
    double beta = 0.0;
    double sigma_N = 0.0;
    double alpha_N = 0.0;
    FourierField kappa;
    double A_N = 0.0;  // defined for N ≥ 2
    double B_N = 0.0;
    std::optional<Estimate> C_N;

    static RenormTable build(int N, double beta);
};

}  // namespace hp43
