#pragma once

#include <array>
#include <vector>

#include "hp43/fourier_field.hpp"
#include "hp43/renorm.hpp"
#include "hp43/rng.hpp"

namespace hp43 {

/// (position, velocity) state of the damped wave dynamics.
struct WavePair {
    FourierField pos;
    FourierField vel;
    double time = 0.0;

    int cutoff() const { return pos.cutoff(); }
};

/// Row-major 2×2 real matrix.
struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    Mat2 operator*(const Mat2& o) const
    {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

/// D̂_n(t) = e^{−t/2} sin(t⟪n⟫)/⟪n⟫
double wave_kernel(double t, FrequencyIndex n);
/// ∂_t D̂_n(t)
double wave_kernel_dt(double t, FrequencyIndex n);

/// Solution map of x″ + x′ + ⟨n⟩²x = 0 on (x, x′) over time t.
Mat2 damped_propagator(double t, FrequencyIndex n);
/// Solution map of x″ + ⟨n⟩²x = 0 (no damping, used without noise).
Mat2 undamped_propagator(double t, FrequencyIndex n);
/// Covariance of the noise accumulated over a step h by x″ + x′ + ⟨n⟩²x = √2 Ḃ, Var B(1) = 1:
/// Σ(h) = S − P(h) S P(h)ᵀ with S = diag(⟨n⟩^{−2}, 1). Returned as the symmetric matrix (a, b; b, d).
Mat2 step_noise_covariance(double h, FrequencyIndex n);

/// σ_n(t₁, t₂) = E[Ψ̂(n,t₁)Ψ̂(−n,t₂)], t₂ ≤ t₁, for the stationary Ψ.
double sigma_n(FrequencyIndex n, double t1, double t2);

/// Right-hand side of the Wick pairing identity for
/// E[(Ψ̂(n₁,t₁)Ψ̂(n₂,t₁′) − …)·conj(Ψ̂(n₁′,t₂)Ψ̂(n₂′,t₂′) − …)], t₂′ ≤ t₂ ≤ t₁′ ≤ t₁.
double wick_pair_covariance(FrequencyIndex n1, FrequencyIndex n2, FrequencyIndex n1p, FrequencyIndex n2p, double t1,
                            double t1p, double t2, double t2p);

/// Sample of the stationary law μ₁ ⊗ μ₀ at cutoff N.
WavePair stationary_wave_pair(int N, const RandomStream& key);

/// Exact-in-law linear step of ∂²Ψ + ∂Ψ + (1−Δ)Ψ = √2ξ (or the undamped/noiseless variants),
/// with per-mode propagators and Cholesky factors precomputed for (N, h).
class LinearWaveStep {
public:
    LinearWaveStep(int N, double h, bool damping = true, bool noise = true);

    int cutoff() const { return N_; }
    double h() const { return h_; }
    /// Advances every mode by h. Noise for mode n is drawn from key.derive(n.packed()).
    void apply(WavePair& state, const RandomStream& key) const;

private:
    int N_;
    double h_;
    bool noise_;
    std::vector<Mat2> prop_;
    std::vector<std::array<double, 3>> chol_;  // lower-triangular (l11, l21, l22)
};

/// One exact linear step of size h (builds the per-mode tables on the fly).
WavePair stoch_convolution_step(const WavePair& state, double h, const RandomStream& key);

/// Pieces of the resonant object Z = (V∗:Ψ_N²:) ⊜ Ψ_N; Z = Z11 + Z12 + Z13 + Z14 + Z2.
struct ResonantObject {
    FourierField Z;
    FourierField Z11;
    FourierField Z12;
    FourierField Z13;
    FourierField Z14;
    FourierField Z2;
};

/// S_N(n) = Σ_{|n₂|≤N, n+n₂≠0} ρ(n+n₂, n₂) V̂(n+n₂)⟨n₂⟩^{−2}
FourierField resonant_sum(int N, double beta);

ResonantObject resonant_object(const FourierField& psi, const PotentialParams& params, const RenormTable& table,
                               bool decompose = true);

/// Frequency split of the paracontrolled operator: j ≤ θk + c₀.
struct SplitParams {
    double theta = 0.2;
    double c0 = 0.0;
};

/// L(n₁, n₂) = Σ_j φ_j(n₁) Σ_{k: j ≤ θk+c₀} φ_k(n₂)
double split_weight(FrequencyIndex n1, FrequencyIndex n2, const SplitParams& split);

struct KernelValue {
    Complex value;
    int truncation = 0;  // radius of the n₂, n₃ sums
};

/// 𝒜_{n,n₁}(t,t′) with Ψ(t′) = psi_tp, Ψ(t) = psi_t, sums over |n₂|, |n₃| ≤ cutoff.
KernelValue kernel_A(FrequencyIndex n, FrequencyIndex n1, double t, double tp, const FourierField& psi_tp,
                     const FourierField& psi_t, const SplitParams& split = {});

struct CounterTerms {
    double A2 = 0.0;
    double A3 = 0.0;
    double A4 = 0.0;
    double A5 = 0.0;
    int truncation = 0;
};

/// Deterministic counter term 𝒜^{(2)}_{n,n}(t,t′) and its split A3 + A4 + A5, sums over |n₂| ≤ N.
CounterTerms kernel_counterterms(FrequencyIndex n, double t, double tp, int N, const SplitParams& split = {});

/// 𝔸̂_N(n,t,t′) = Σ_{n₁+n₂=n} ρ(n₁,n₂) D̂_{n₁}(t−t′)Ψ̂(n₁,t′)Ψ̂(n₂,t)
Complex frak_A(FrequencyIndex n, double t, double tp, const FourierField& psi_tp, const FourierField& psi_t);
/// All modes |n| ≤ N of 𝔸̂_N at once.
FourierField frak_A_field(double t, double tp, const FourierField& psi_tp, const FourierField& psi_t);

/// Operator mode: w ↦ Σ_{n₁} 𝒜_{n,n₁}(t,t′)ŵ(n₁) at a fixed time slice, applied by FFT.
class ParacontrolledOperator {
public:
    ParacontrolledOperator(double t, double tp, FourierField psi_tp, FourierField psi_t, int input_cutoff,
                           int output_cutoff, const SplitParams& split = {});

    FourierField apply(const FourierField& w) const;
    FourierField apply_adjoint(const FourierField& v) const;
    /// Operator norm L² → L² by power iteration on AᵀA from a random start.
    double norm_estimate(int iterations, const RandomStream& key) const;

private:
    double tau_;
    FourierField psi_tp_, psi_t_;
    int in_, out_;
    SplitParams split_;
};

}  // namespace hp43
