#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hp43/fields.hpp"
#include "hp43/fourier_field.hpp"
#include "hp43/renorm.hpp"
#include "hp43/stats.hpp"

namespace hp43 {

/// Piecewise-constant drift θ on a grid of [0, 1]; values[k] holds θ on [t_k, t_{k+1}).
struct DriftPath {
    std::vector<double> times;
    std::vector<FourierField> values;
    bool adapted = true;

    std::size_t intervals() const { return values.size(); }
    /// ½∫₀¹‖θ(t)‖²_{L²}dt, summed exactly over the intervals.
    double cost() const;
};

/// I(θ)(1) = ∫₀¹⟨∇⟩^{−1}θ(t)dt
FourierField I_theta(const DriftPath& drift);

/// What a drift policy may see on interval k: Wiener increments before t_k, Y(t_j) for j ≤ k,
/// and the controlled state Y(t_k) + I(θ)(t_k). Any read from the future throws AdaptednessError.
class AdaptedHistory {
public:
    AdaptedHistory(const WienerPath& path, std::size_t k, const FourierField& Y_k, const FourierField& state)
        : path_(path), k_(k), Y_k_(Y_k), state_(state)
    {
    }

    std::size_t interval() const { return k_; }
    double time() const { return path_.times()[k_]; }
    double step() const { return path_.times()[k_ + 1] - path_.times()[k_]; }
    int cutoff() const { return path_.cutoff(); }
    const WienerPath& grid() const { return path_; }

    const FourierField& increment(std::size_t j) const;
    FourierField Y(std::size_t j) const;
    const FourierField& Y_now() const { return Y_k_; }
    const FourierField& state() const { return state_; }

private:
    const WienerPath& path_;
    std::size_t k_;
    const FourierField& Y_k_;
    const FourierField& state_;
};

using DriftPolicy = std::function<FourierField(const AdaptedHistory&)>;

/// Evaluates the policy interval by interval along one Wiener path.
DriftPath build_drift(const WienerPath& path, const DriftPolicy& policy);

/// Terminal functional G(u) of the control problem with its L² gradient and Hessian action.
struct TerminalCost {
    std::function<double(const FourierField&)> value;
    std::function<std::pair<double, FourierField>(const FourierField&)> value_and_gradient;
    std::function<FourierField(const FourierField& u, const FourierField& v)> hessian;  // D∇G(u)[v]
};

/// G = −𝓡_N, so that −log 𝔼_μ[e^{𝓡_N}] = inf_θ 𝔼[G(Y(1) + I(θ)(1)) + ½∫‖θ‖²dt].
TerminalCost renormalized_terminal(const PotentialParams& params, const RenormTable& table);
/// G(u) = ½Σ_n a(n)|û(n)|²
TerminalCost quadratic_terminal(const std::function<double(FrequencyIndex)>& a);

struct BoundEstimate {
    double value = 0.0;
    double se = 0.0;
    bool noisy = false;  // relative standard error above 10%
};

/// Monte Carlo of 𝔼[G(Y(1) + I(θ)(1)) + ½∫‖θ‖²dt] over `paths` Wiener paths with `intervals`
/// time steps. Path p is drawn from (seed, p), so candidate drifts share their random numbers.
BoundEstimate bd_objective(const DriftPolicy& policy, const TerminalCost& terminal, int N, int paths, int intervals,
                           std::uint64_t seed);
BoundEstimate bd_objective(const DriftPolicy& policy, const PotentialParams& params, const RenormTable& table,
                           int paths, int intervals, std::uint64_t seed);

/// Feedback drift θ_k = ⟨∇⟩(c_k ⊙ X_k) − ⟨∇⟩^{−1}(e_k ⊙ ∇G(X_k)), X = Y + I(θ), with gains c and e
/// per interval k and shell |n|².
struct FeedbackDrift {
    int N = 0;
    int intervals = 8;
    std::vector<double> linear;  // c, indexed [k * (N² + 1) + |n|²]
    std::vector<double> force;   // e, same layout

    FeedbackDrift() = default;
    FeedbackDrift(int N, int intervals)
        : N(N), intervals(intervals), linear(std::size_t(intervals) * (N * N + 1), 0.0), force(linear.size(), 0.0)
    {
    }
    std::size_t index(int k, long shell) const { return std::size_t(k) * std::size_t(N * N + 1) + std::size_t(shell); }
    DriftPolicy policy(const TerminalCost& terminal) const;
};

enum class DriftOptimizer { lbfgs, momentum };

struct DriftOptConfig {
    DriftOptimizer method = DriftOptimizer::lbfgs;
    int intervals = 8;
    int paths = 1000;
    int max_iter = 200;
    double momentum = 0.5;     // momentum method only
    int memory = 10;           // L-BFGS history length
    bool force_feedback = true;  // optimize e as well as c
    double rel_tol = 1e-7;  // stop when an accepted step improves the objective by less than this
    std::uint64_t seed = 1;
};

struct DriftOptimum {
    FeedbackDrift drift;
    BoundEstimate bound;     // objective of the optimized drift on the training ensemble
    BoundEstimate baseline;  // θ = 0 on the same ensemble
    BoundEstimate validation;  // optimized drift on an independent ensemble of the same size
    int iterations = 0;
    bool stalled = false;    // line search could not decrease the objective
    std::string message;
};

/// Descent on the feedback gains with Armijo backtracking, either L-BFGS or momentum gradient
/// descent, both scaled by the diagonal of the drift-cost Hessian. The gradient is exact for the
/// Monte Carlo objective on the fixed ensemble (adjoint sweep per path).
DriftOptimum optimize_drift(const TerminalCost& terminal, int N, const DriftOptConfig& cfg);
DriftOptimum optimize_drift(const PotentialParams& params, const RenormTable& table, const DriftOptConfig& cfg);

/// Mean objective of a feedback drift on the training ensemble of cfg, with its gradient in the
/// gains (all c, then all e).
std::pair<double, std::vector<double>> feedback_objective(const TerminalCost& terminal, const FeedbackDrift& drift,
                                                          const DriftOptConfig& cfg);

/// Log-sum-exp Monte Carlo of −log 𝔼_μ[e^{𝓡_N}] with the effective sample size of the weights.
struct DirectLogZ {
    double neg_log_Z = 0.0;
    double se = 0.0;  // delta method
    double ess = 0.0;
};
DirectLogZ direct_neg_log_Z(const PotentialParams& params, const RenormTable& table, int samples, std::uint64_t seed);

/// Radial bump exp(−1/((r−½)(1−r))) on (½, 1), scaled to unit L²(ℝ³) norm.
double witness_profile(double r);
/// f_M = M^{−3/2}Σ_{|n|>M/2} f̂(n/M)e_n
FourierField build_fM(int M);

/// Q(u) = ¼Σ_{n≠0}V̂(n)|(u²)^(n)|²
double quartic_Q(const FourierField& u, double beta);

struct WitnessDrift {
    DriftPath theta0;     // 2·𝟙_{t>½}⟨∇⟩Θ⁰
    FourierField Theta0;  // −Z_M + √σ̃_M f_M
};
/// Needs t = ½ on the path grid and M ≤ path cutoff.
WitnessDrift witness_drift(const WienerPath& path, int M);

/// Samples of the cutoff statistic ∫(:Y_N²: + 2Y_NΘ⁰ + (Θ⁰)²)dx, one per Wiener path (seed, p).
std::vector<double> cutoff_statistic(int M, int N, int paths, std::uint64_t seed);

struct WitnessConfig {
    int N = -1;         // defaults to 2M
    int paths = 400;
    double L = -1.0;    // defaults to 10σσ̃_M²Q(f_M)
    double K = -1.0;    // defaults to 10× the sample SD of the cutoff statistic
    std::uint64_t seed = 1;
};

struct WitnessReport {
    int M = 0;
    int N = 0;
    double L = 0.0;
    double K = 0.0;
    double Q_fM = 0.0;              // σ̃_M²Q(f_M)
    Estimate Q_Theta0;              // 𝔼[σ/2·Q(Θ⁰)]
    Estimate drift_cost;            // ½𝔼∫‖θ⁰‖²dt
    Estimate cutoff_prob;           // P(|∫(:Y_N²: + 2Y_NΘ⁰ + (Θ⁰)²)dx| ≤ K)
    Estimate cutoff_second_moment;  // 𝔼[(∫(:Y_N²: + 2Y_NΘ⁰ + (Θ⁰)²)dx)²]
    Estimate certificate;           // 𝔼[min(σ/2·Q(Θ⁰), L)𝟙_E] − ½𝔼∫‖θ⁰‖²dt
    bool inconclusive = false;      // cutoff_prob ≤ ½
};

WitnessReport witness_certificate(const PotentialParams& params, int M, const WitnessConfig& cfg);

struct WitnessScan {
    std::vector<WitnessReport> reports;
    LineFit Q_fit;     // log-log fit of Q_Theta0 against M
    LineFit cost_fit;  // log-log fit of drift_cost against M
};
WitnessScan witness_scan(const PotentialParams& params, const std::vector<int>& Ms, const WitnessConfig& cfg);

struct PhaseScanRow {
    double sigma = 0.0;
    std::vector<WitnessReport> reports;
    double coefficient = 0.0;  // c in certificate(M) ≈ cM³ + d
    double coefficient_se = 0.0;
    double slope = 0.0;        // log-log slope of the certificate over its positive values, 0 if none
};

struct PhaseScan {
    std::vector<PhaseScanRow> rows;
    double threshold = -1.0;  // σ where the coefficient changes sign; −1 if no crossing in range
};

/// β = 2, γ = 3: certificates over M for each σ. Components independent of σ are computed once
/// per M and shared across the σ grid.
PhaseScan phase_scan_beta2(const std::vector<double>& sigmas, const std::vector<int>& Ms, const WitnessConfig& cfg);

}  // namespace hp43
