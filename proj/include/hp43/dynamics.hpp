#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hp43/fourier_field.hpp"
#include "hp43/renorm.hpp"
#include "hp43/rng.hpp"
#include "hp43/stats.hpp"
#include "hp43/stochwave.hpp"

namespace hp43 {

enum class Scheme { strang_split, exponential_euler };

struct IntegratorConfig {
    Scheme scheme = Scheme::strang_split;
    double h = 0.01;
    double T = 1.0;
    bool noise = true;
    bool damping = true;
    bool nonlinear = true;
    bool renormalize = true;     // false drops σ_N from the Wick square (control runs)
    double blowup_bound = 1e6;   // on ‖u‖_{H^{−1/2−ε}} + ‖∂ₜu‖_{H^{−3/2−ε}}
    int record_every = 1;        // observer stride in steps

    void validate() const;
};

using WaveObserver = std::function<void(const WavePair&)>;
using FieldObserver = std::function<void(double, const FourierField&)>;

/// Truncated damped wave dynamics ∂²u + ∂u + (1−Δ)u − F_N(u) = √2ξ. Modes above table.N evolve
/// linearly. The observer sees the initial state and every record_every-th step.
/// Step k draws its noise from key.derive(k).
WavePair evolve_sdnlw(WavePair init, const PotentialParams& params, const RenormTable& table,
                      const IntegratorConfig& cfg, const RandomStream& key, const WaveObserver& observe = {});

/// Truncated parabolic dynamics ∂u + (1−Δ)u − F_N(u) = √2ξ; exponential Euler uses the exact
/// Ornstein–Uhlenbeck propagator for the linear part.
FourierField evolve_snlh(FourierField init, const PotentialParams& params, const RenormTable& table,
                         const IntegratorConfig& cfg, const RandomStream& key, const FieldObserver& observe = {});

/// 𝓔♯_N(u, v) = ½‖u‖²_{H¹} + ½‖v‖²_{L²} − 𝓡_N(u), conserved by the undamped noiseless flow.
double wave_hamiltonian(const WavePair& s, const PotentialParams& params, const RenormTable& table);

struct McmcConfig {
    int samples = 20000;
    int burn_in = 2000;
    int thin = 1;
    double delta = 0.5;           // Crank–Nicolson step
    double target_accept = 0.574;
    bool adapt = true;            // tune delta during burn-in
    double max_iat = 2000.0;      // non-mixing cap (in samples)
    int high_cutoff = -1;         // if > N, emitted samples get i.i.d. μ₁ modes up to this radius
};

/// One Metropolis-adjusted Langevin kernel for dρ_N ∝ e^{𝓡_N}dμ on |n| ≤ N, preconditioned by the
/// covariance of μ and discretized Crank–Nicolson style so the Gaussian part is sampled exactly.
class MalaKernel {
public:
    MalaKernel(const PotentialParams& params, const RenormTable& table, double delta);

    double delta() const { return delta_; }
    void set_delta(double d) { delta_ = d; }

    /// log of the unnormalized density 𝓡_N(u) − ½Σ⟨n⟩²|û(n)|²
    double log_target(const FourierField& u) const;
    FourierField propose(const FourierField& u, RandomStream& rng) const;
    /// log π(v)q(u|v) − log π(u)q(v|u)
    double log_accept_ratio(const FourierField& u, const FourierField& v) const;
    /// Advances u in place, returns whether the proposal was accepted.
    bool step(FourierField& u, RandomStream& rng) const;

private:
    double log_proposal(const FourierField& from, const FourierField& to) const;
    FourierField drift(const FourierField& u) const;

    PotentialParams params_;
    const RenormTable* table_;
    double delta_;
};

struct McmcSummary {
    double acceptance = 0.0;
    double delta = 0.0;
    double iat = 0.0;  // of the Wick mass, in emitted samples
    FourierField last;
};

/// Runs the chain from a μ sample and calls observe on every emitted sample.
/// Throws NumericalGuardError when the Wick mass autocorrelation time exceeds cfg.max_iat.
McmcSummary gibbs_reference(const PotentialParams& params, const RenormTable& table, const McmcConfig& cfg,
                            const RandomStream& key, const std::function<void(const FourierField&)>& observe);

enum class DynamicsKind { wave, heat };

struct InvarianceConfig {
    DynamicsKind dynamics = DynamicsKind::wave;
    IntegratorConfig integrator;  // h is the coarse step; T the horizon per run
    McmcConfig mcmc;
    double record_interval = 0.1;  // model time between recorded states
    double burn_in_time = 5.0;
    bool extrapolate = true;       // Richardson over {h, h/2}
    double z_threshold = 3.0;
    double min_ess = 100.0;
};

struct StatComparison {
    std::string name;
    Estimate dynamics;
    Estimate reference;
    double z = 0.0;
    bool pass = true;
};

struct InvarianceReport {
    std::vector<StatComparison> shells;  // mean |û(n)|² over each shell |n|² = k
    std::vector<StatComparison> modes;   // one per n ∈ Λ ∪ {0}, informational
    StatComparison wick_mass;
    StatComparison energy;               // R_N
    int flagged_modes = 0;
    double min_ess = 0.0;
    double mcmc_acceptance = 0.0;
    bool inconclusive = false;
    bool pass = false;
};

/// Time averages of the dynamics started from a reference sample against ρ_N ensemble averages.
/// The verdict uses the shell statistics, the Wick mass and R_N, each within z_threshold
/// combined standard errors.
InvarianceReport invariance_test(const PotentialParams& params, const RenormTable& table, const InvarianceConfig& cfg,
                                 std::uint64_t seed);

}  // namespace hp43
