#pragma once

#include <optional>

#include "hp43/fourier_field.hpp"
#include "hp43/renorm.hpp"

namespace hp43 {

struct QComponents {
    double Q1 = 0.0;
    double Q2 = 0.0;
    double Q3 = 0.0;
    double Q4 = 0.0;
    double sum() const { return Q1 + Q2 + Q3 + Q4; }
};

struct EnergyBreakdown {
    double R_N = 0.0;
    double R_N_diamond = 0.0;
    std::optional<double> R_N_diamond2;
    double script_R_N = 0.0;
    double wick_mass = 0.0;  // ∫:u_N²:dx
    double Q_N = 0.0;
    QComponents Q;
};

/// Σ_n V̂(n)|ŵ(n)|², nonnegative for every real w.
double hartree_form(const FourierField& w, double beta);

/// R_N(u) = ¼Σ V̂|ŵ|² − ½α_N, w = :u_N²:
double r_N(const FourierField& u, const PotentialParams& params, const RenormTable& table);
/// Q_N(u) = Σ_{k≠0} V̂(k)|ŵ(k)|² − 2α_N
double q_N(const FourierField& u, const PotentialParams& params, const RenormTable& table);
/// The four sums of the Q_N decomposition.
QComponents q_components(const FourierField& u, const PotentialParams& params, const RenormTable& table);
/// R_N^◇(u) = R_N(u) − ∫:(K_N^{1/2}∗u_N)²:dx
double r_N_diamond(const FourierField& u, const PotentialParams& params, const RenormTable& table);
/// R_N^◇◇ = R_N^◇ + C_N; requires table.C_N.
double r_N_diamond2(const FourierField& u, const PotentialParams& params, const RenormTable& table);
/// 𝓡_N(u) = (σ/4)Σ V̂|ŵ|² − A|∫w|^γ − (σ/2)α_N
double script_r_N(const FourierField& u, const PotentialParams& params, const RenormTable& table);
/// M_γ(w) = 2Aγ|∫w|^{γ−2}∫w
double m_gamma(double mass, double A, double gamma);
double m_gamma(const FourierField& w, double A, double gamma);

EnergyBreakdown energy_breakdown(const FourierField& u, const PotentialParams& params, const RenormTable& table);

/// Nonlinear force σπ_N((V∗:u_N²:)u_N) − M_γ(:u_N²:)u_N, i.e. the L²-gradient of 𝓡_N.
/// `renormalize = false` drops σ_N from the Wick square (control experiments only).
FourierField hartree_force(const FourierField& u, const PotentialParams& params, const RenormTable& table,
                           bool renormalize = true);

struct ForceEnergy {
    FourierField force;
    double script_R_N = 0.0;
    double R_N = 0.0;
    double wick_mass = 0.0;
};

/// Force, 𝓡_N and R_N from one pass over a single grid (four transforms).
ForceEnergy hartree_force_energy(const FourierField& u, const PotentialParams& params, const RenormTable& table,
                                 bool renormalize = true);

/// Directional derivative DF(u)[v] of the force above; symmetric in the L² pairing.
FourierField hartree_force_derivative(const FourierField& u, const FourierField& v, const PotentialParams& params,
                                      const RenormTable& table, bool renormalize = true);

}  // namespace hp43
