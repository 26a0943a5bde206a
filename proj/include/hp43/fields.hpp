#pragma once

#include <cstdint>
#include <vector>

#include "hp43/fourier_field.hpp"
#include "hp43/renorm.hpp"
#include "hp43/rng.hpp"

namespace hp43 {

struct GaussianEnsembleSpec {
    int N = 8;
    double s = 1.0;  // regularity: E|û(n)|² = ⟨n⟩^{−2s}
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
};

/// Real Gaussian field with E|û(n)|² = scale(n). Draws are keyed by frequency, so a
/// larger cutoff extends the same sample instead of reshuffling it.
FourierField keyed_gaussian_field(int N, const RandomStream& key, const std::function<double(FrequencyIndex)>& variance);

/// A sample of μ_s truncated to |n| ≤ N.
FourierField sample_mu(const GaussianEnsembleSpec& spec);

/// :u_N²: = (π_N u)² − σ_N, cutoff 2N.
FourierField wick_square(const FourierField& u, const RenormTable& table);
/// ∫:u_N²:dx = Σ_{|n|≤N}|û(n)|² − σ_N
double wick_mass(const FourierField& u, const RenormTable& table);

/// Discretized Brownian motions B_n on a time grid of [0, 1], Var B_n(t) = t, B_{−n} = conj(B_n),
/// and Y(t) = ⟨∇⟩^{−1}W(t), i.e. Ŷ(n, t) = B_n(t)/⟨n⟩.
class WienerPath {
public:
    WienerPath(int N, std::vector<double> times, std::uint64_t seed, std::uint64_t replica = 0);

    int cutoff() const { return N_; }
    const std::vector<double>& times() const { return times_; }
    std::size_t intervals() const { return increments_.size(); }

    /// B(t_{k+1}) − B(t_k)
    const FourierField& increment(std::size_t k) const { return increments_[k]; }
    /// B(t_k)
    FourierField brownian(std::size_t k) const;
    /// Y(t_k)
    FourierField Y(std::size_t k) const;
    /// Index of t in the grid; throws if t is not a grid point.
    std::size_t index_of(double t) const;

private:
    int N_;
    std::vector<double> times_;
    std::vector<FourierField> increments_;
};

/// Uniform grid with `timesteps` intervals on [0, 1].
WienerPath sample_Y_path(int N, int timesteps, std::uint64_t seed, std::uint64_t replica = 0);

struct WitnessRandoms {
    FourierField Z_M;       // π_M Y(½)
    double sigma_tilde = 0; // ½σ_M
};
WitnessRandoms witness_randoms(const WienerPath& path, int M);

}  // namespace hp43
