#include "hp43/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hp43/errors.hpp"
#include "hp43/parallel.hpp"
#include "hp43/spectral.hpp"

namespace hp43 {

namespace {

// h(n) = 𝟙_{|n|≤N}⟨n⟩^{-2}
FourierField free_field_covariance(int N)
{
    return FourierField::from_function(N, [](FrequencyIndex n) { return Complex(1.0 / n.bracket2()); });
}

FourierField bessel_field(int cutoff, double beta)
{
    return FourierField::from_function(cutoff, [beta](FrequencyIndex n) { return Complex(bessel_symbol(n, beta)); });
}

// Σ_{|n|≤N} f(|n|²) by counting lattice points per shell, so large N needs no lattice in memory.
double shell_sum(int N, const std::function<double(double)>& f)
{
    const long NN = long(N) * N;
    std::vector<long long> count(std::size_t(NN + 1), 0);
    for (long x = -N; x <= N; ++x)
        for (long y = -N; y <= N; ++y) {
            const long r = x * x + y * y;
            if (r > NN) continue;
            for (long z = 0; r + z * z <= NN; ++z) count[std::size_t(r + z * z)] += z == 0 ? 1 : 2;
        }
    double s = 0.0;
    for (long k = 0; k <= NN; ++k)
        if (count[std::size_t(k)] > 0) s += double(count[std::size_t(k)]) * f(double(k));
    return s;
}

}  // namespace

void PotentialParams::validate(bool focusing) const
{
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (A < 0.0) throw ConfigError("taming strength A must be nonnegative");
    if (focusing) {
        const double lo = beta > 1.0 ? std::max((beta + 1.0) / (beta - 1.0), 2.0) : INFINITY;
        if (!(gamma >= lo && gamma <= 3.0))
            throw ConfigError("focusing construction needs max((beta+1)/(beta-1), 2) <= gamma <= 3");
    }
}

double bessel_symbol(FrequencyIndex n, double beta) { return std::pow(n.bracket2(), -0.5 * beta); }

double bessel_symbol0(FrequencyIndex n, double beta) { return n.is_zero() ? 0.0 : bessel_symbol(n, beta); }

FourierField apply_V(const FourierField& u, double beta)
{
    return u.apply_multiplier([beta](FrequencyIndex n) { return bessel_symbol(n, beta); });
}

FourierField apply_V0(const FourierField& u, double beta)
{
    return u.apply_multiplier([beta](FrequencyIndex n) { return bessel_symbol0(n, beta); });
}

double sigma_N(int N)
{
    if (N < 0) throw ConfigError("N must be nonnegative");
    return shell_sum(N, [](double k) { return 1.0 / (1.0 + k); });
}

double alpha_N(int N, double beta)
{
    if (N < 1) throw ConfigError("alpha_N needs N >= 1");
    const FourierField h = free_field_covariance(N);
    const FourierField hh = multiply(h, h);  // (h∗h)(k)
    double s = 0.0;
    const auto pts = hh.lattice().points();
    const auto c = hh.coeffs();
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!pts[i].is_zero()) s += bessel_symbol(pts[i], beta) * c[i].real();
    return s;
}

FourierField kappa_N(int N, double beta)
{
    if (N < 1) throw ConfigError("kappa_N needs N >= 1");
    const FourierField h = free_field_covariance(N);
    // Σ_{n₁} V̂(n+n₁)h(n₁) = (V̂∗h)(n) since h is even; |n+n₁| ≤ 2N.
    FourierField k = multiply(bessel_field(2 * N, beta), h, N);
    const auto pts = k.lattice().points();
    auto c = k.coeffs();
    for (std::size_t i = 0; i < pts.size(); ++i) c[i] = c[i].real() - 1.0 / pts[i].bracket2();
    return k;
}

SingularityConstants singularity_constants(int N, double beta)
{
    if (N < 2) throw ConfigError("singularity constants need N >= 2");
    const double a = shell_sum(N, [beta](double k) { return std::pow(1.0 + k, -beta - 1.0); });
    return {a, std::pow(std::log(double(N)), -0.25) / std::sqrt(a)};
}

std::vector<double> cubic_mode_variance(int N, double beta)
{
    if (N < 1) throw ConfigError("cubic_mode_variance needs N >= 1");
    const FourierField c = free_field_covariance(N);
    const FourierField cc = multiply(c, c);
    const auto& lat = *Lattice::get(N);
    const auto& lat2 = cc.lattice();

    // T₁(n) = Σ_a V̂₀(a)²(c∗c)(a)c(n−a)
    FourierField w = cc.apply_multiplier([beta](FrequencyIndex a) {
        const double v = bessel_symbol0(a, beta);
        return v * v;
    });
    const FourierField t1 = multiply(w, c, N);

    // T₂(n) = Σ_{n₂} c(n₂)V̂₀(n−n₂) Σ_a p_n(a)c(a−n₂), p_n(a) = V̂₀(a)c(n−a).
    // p_n has real but not even coefficients: split into even and odd parts,
    // p_n = e + i·q with e, q Hermitian.
    std::vector<double> t2(lat.size());
    parallel_for(lat.size(), [&](std::size_t idx) {
        const FrequencyIndex n = lat[idx];
        auto p = [&](FrequencyIndex a) {
            const FrequencyIndex b = n - a;
            return lat.contains(b) ? bessel_symbol0(a, beta) / b.bracket2() : 0.0;
        };
        FourierField e(2 * N), q(2 * N);
        auto ec = e.coeffs();
        auto qc = q.coeffs();
        for (std::size_t i = 0; i < lat2.size(); ++i) {
            const double pa = p(lat2[i]);
            const double pm = p(-lat2[i]);
            ec[i] = 0.5 * (pa + pm);
            qc[i] = Complex(0.0, -0.5 * (pa - pm));
        }
        const FourierField fe = multiply(e, c, N);
        const FourierField fq = multiply(q, c, N);
        double s = 0.0;
        const auto pts = lat.points();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Complex F = fe.coeffs()[i] + Complex(0.0, 1.0) * fq.coeffs()[i];
            s += F.real() * bessel_symbol0(n - pts[i], beta) / pts[i].bracket2();
        }
        t2[idx] = s;
    });

    std::vector<double> out(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) out[i] = 2.0 * (t1.coeffs()[i].real() + 2.0 * t2[i]);
    return out;
}

double c_N_exact(int N, double beta)
{
    const auto var = cubic_mode_variance(N, beta);
    const auto pts = Lattice::get(N)->points();
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) s += var[i] / pts[i].bracket2();
    // ½∫₀¹t³dt = 1/8
    return s / 8.0;
}

RenormTable RenormTable::build(int N, double beta)
{
    if (N < 1) throw ConfigError("renormalization table needs N >= 1");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    RenormTable t;
    t.N = N;
    t.beta = beta;
    t.sigma_N = hp43::sigma_N(N);
    t.alpha_N = hp43::alpha_N(N, beta);
    t.kappa = kappa_N(N, beta);
    if (N >= 2) {
        const auto sc = singularity_constants(N, beta);
        t.A_N = sc.A_N;
        t.B_N = sc.B_N;
    }
    return t;
}

}  // namespace hp43
