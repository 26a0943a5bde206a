#include "hp43/energy.hpp"

#include <cmath>
#include <iostream>

#include "hp43/errors.hpp"
#include "hp43/fields.hpp"
#include "hp43/spectral.hpp"

namespace hp43 {

namespace {

void check_table(const PotentialParams& params, const RenormTable& table)
{
    if (std::abs(params.beta - table.beta) > 1e-14) throw ConfigError("renormalization table built for another beta");
}

// Σ_{k≠0} V̂(k)(f∗g)(k) for real even coefficient fields f, g.
double off_zero_pairing(const FourierField& f, const FourierField& g, double beta)
{
    const FourierField fg = multiply(f, g);
    const auto pts = fg.lattice().points();
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!pts[i].is_zero()) s += bessel_symbol(pts[i], beta) * fg.coeffs()[i].real();
    return s;
}

FourierField mode_power(const FourierField& uN)
{
    FourierField p(uN.cutoff());
    for (std::size_t i = 0; i < p.size(); ++i) p.coeffs()[i] = std::norm(uN.coeffs()[i]);
    return p;
}

}  // namespace

double hartree_form(const FourierField& w, double beta)
{
    const auto pts = w.lattice().points();
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) s += bessel_symbol(pts[i], beta) * std::norm(w.coeffs()[i]);
    return s;
}

double r_N(const FourierField& u, const PotentialParams& params, const RenormTable& table)
{
    check_table(params, table);
    return 0.25 * hartree_form(wick_square(u, table), params.beta) - 0.5 * table.alpha_N;
}

double q_N(const FourierField& u, const PotentialParams& params, const RenormTable& table)
{
    check_table(params, table);
    const FourierField w = wick_square(u, table);
    const double m = w(FrequencyIndex{}).real();
    return hartree_form(w, params.beta) - m * m - 2.0 * table.alpha_N;
}

QComponents q_components(const FourierField& u, const PotentialParams& params, const RenormTable& table)
{
    check_table(params, table);
    const double beta = params.beta;
    const FourierField uN = project(u, table.N);
    const FourierField p = mode_power(uN);
    FourierField d = p;
    const auto pts = d.lattice().points();
    for (std::size_t i = 0; i < pts.size(); ++i) d.coeffs()[i] -= 1.0 / pts[i].bracket2();

    QComponents q;
    q.Q2 = 2.0 * off_zero_pairing(d, d, beta);
    for (std::size_t i = 0; i < pts.size(); ++i) q.Q3 += 4.0 * d.coeffs()[i].real() * table.kappa.coeffs()[i].real();
    double F = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!pts[i].is_zero()) {
            const double a = p.coeffs()[i].real();
            F += bessel_symbol(pts[i] + pts[i], beta) * a * a;
        }
    q.Q4 = -F;
    // Q₁ = Σ_{k≠0}V̂|(u²)^(k)|² minus the pairings n₁+n₃ = 0 and n₁+n₄ = 0, plus their overlap.
    const FourierField u2 = multiply(uN, uN);
    double S = 0.0;
    const auto pts2 = u2.lattice().points();
    for (std::size_t i = 0; i < pts2.size(); ++i)
        if (!pts2[i].is_zero()) S += bessel_symbol(pts2[i], beta) * std::norm(u2.coeffs()[i]);
    const double P = off_zero_pairing(p, p, beta);
    q.Q1 = S - 2.0 * P + F;
    return q;
}

double r_N_diamond(const FourierField& u, const PotentialParams& params, const RenormTable& table)
{
    // v = K_N^{1/2}∗u_N; ∫:v²:dx = ∫v²dx − E_μ∫v²dx
    const FourierField uN = project(u, table.N);
    const auto& lat = uN.lattice();
    const FourierField v = uN.apply_multiplier([&](FrequencyIndex n) {
        return std::sqrt(table.kappa.coeffs()[std::size_t(lat.find(n))].real());
    });
    double mean = 0.0;
    const auto pts = lat.points();
    for (std::size_t i = 0; i < pts.size(); ++i) mean += table.kappa.coeffs()[i].real() / pts[i].bracket2();
    const double integral = multiply(v, v)(FrequencyIndex{}).real();
    return r_N(u, params, table) - (integral - mean);
}

double r_N_diamond2(const FourierField& u, const PotentialParams& params, const RenormTable& table)
{
    if (!table.C_N) throw ConfigError("C_N is not present in the renormalization table");
    return r_N_diamond(u, params, table) + table.C_N->value;
}

double m_gamma(double mass, double A, double gamma)
{
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (mass == 0.0) {
        if (gamma < 2.0) std::cerr << "warning: M_gamma with gamma < 2 at zero mass, returning 0\n";
        return 0.0;
    }
    return 2.0 * A * gamma * std::pow(std::abs(mass), gamma - 2.0) * mass;
}

double m_gamma(const FourierField& w, double A, double gamma)
{
    return m_gamma(w(FrequencyIndex{}).real(), A, gamma);
}

double script_r_N(const FourierField& u, const PotentialParams& params, const RenormTable& table)
{
    check_table(params, table);
    const FourierField w = wick_square(u, table);
    const double m = w(FrequencyIndex{}).real();
    return 0.25 * params.sigma * hartree_form(w, params.beta) - params.A * std::pow(std::abs(m), params.gamma) -
           0.5 * params.sigma * table.alpha_N;
}

EnergyBreakdown energy_breakdown(const FourierField& u, const PotentialParams& params, const RenormTable& table)
{
    EnergyBreakdown e;
    e.R_N = r_N(u, params, table);
    e.R_N_diamond = r_N_diamond(u, params, table);
    if (table.C_N) e.R_N_diamond2 = e.R_N_diamond + table.C_N->value;
    e.script_R_N = script_r_N(u, params, table);
    e.wick_mass = wick_mass(u, table);
    e.Q_N = q_N(u, params, table);
    e.Q = q_components(u, params, table);
    return e;
}

FourierField hartree_force(const FourierField& u, const PotentialParams& params, const RenormTable& table,
                           bool renormalize)
{
    return hartree_force_energy(u, params, table, renormalize).force;
}

ForceEnergy hartree_force_energy(const FourierField& u, const PotentialParams& params, const RenormTable& table,
                                 bool renormalize)
{
    check_table(params, table);
    const int N = table.N;
    const FourierField uN = u.cutoff() == N ? u : u.with_cutoff(N);
    auto& grid = SpectralGrid::for_side(dealiased_side(2 * N, N, N));
    const GridField gu = grid.to_grid(uN);
    GridField sq = gu;
    for (auto& x : sq.values) x *= x;
    FourierField w = grid.from_grid(sq, 2 * N);
    if (renormalize) w.set({0, 0, 0}, w(FrequencyIndex{}) - table.sigma_N);

    ForceEnergy out;
    const double mass = w(FrequencyIndex{}).real();
    const double form = hartree_form(w, params.beta);
    out.wick_mass = mass;
    out.R_N = 0.25 * form - 0.5 * table.alpha_N;
    out.script_R_N = 0.25 * params.sigma * form - params.A * std::pow(std::abs(mass), params.gamma) -
                     0.5 * params.sigma * table.alpha_N;

    GridField prod = grid.to_grid(apply_V(w, params.beta));
    for (std::size_t i = 0; i < prod.values.size(); ++i) prod.values[i] *= gu.values[i];
    out.force = grid.from_grid(prod, N);
    out.force *= params.sigma;
    const double mg = params.A == 0.0 ? 0.0 : m_gamma(mass, params.A, params.gamma);
    if (mg != 0.0) out.force -= mg * uN;
    return out;
}

FourierField hartree_force_derivative(const FourierField& u, const FourierField& v, const PotentialParams& params,
                                      const RenormTable& table, bool renormalize)
{
    check_table(params, table);
    const int N = table.N;
    const FourierField uN = u.cutoff() == N ? u : u.with_cutoff(N);
    const FourierField vN = v.cutoff() == N ? v : v.with_cutoff(N);
    auto& grid = SpectralGrid::for_side(dealiased_side(2 * N, N, N));
    const GridField gu = grid.to_grid(uN);
    const GridField gv = grid.to_grid(vN);
    GridField sq = gu, cross = gu;
    for (std::size_t i = 0; i < sq.values.size(); ++i) {
        sq.values[i] *= gu.values[i];
        cross.values[i] *= 2.0 * gv.values[i];
    }
    FourierField w = grid.from_grid(sq, 2 * N);
    if (renormalize) w.set({0, 0, 0}, w(FrequencyIndex{}) - table.sigma_N);
    const FourierField dw = grid.from_grid(cross, 2 * N);

    // (V∗w)v + (V∗δw)u with δw = 2uv
    const GridField a = grid.to_grid(apply_V(w, params.beta));
    const GridField b = grid.to_grid(apply_V(dw, params.beta));
    GridField prod = a;
    for (std::size_t i = 0; i < prod.values.size(); ++i)
        prod.values[i] = a.values[i] * gv.values[i] + b.values[i] * gu.values[i];
    FourierField out = grid.from_grid(prod, N);
    out *= params.sigma;
    if (params.A != 0.0) {
        const double mass = w(FrequencyIndex{}).real();
        const double dmass = dw(FrequencyIndex{}).real();
        out -= m_gamma(mass, params.A, params.gamma) * vN;
        const double slope = 2.0 * params.A * params.gamma * (params.gamma - 1.0) * std::pow(std::abs(mass), params.gamma - 2.0);
        out -= (slope * dmass) * uN;
    }
    return out;
}

}  // namespace hp43
