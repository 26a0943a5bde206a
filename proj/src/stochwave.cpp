#include "hp43/stochwave.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "hp43/fields.hpp"
#include "hp43/spectral.hpp"

namespace hp43 {

namespace {

void check_times(double t, double tp)
{
    if (!(tp <= t)) throw std::invalid_argument("kernels need t' <= t");
}

// Σ_{k ≥ k_min(j)} φ_k(r) with k_min(j) the least k ≥ 0 satisfying j ≤ θk + c₀.
double split_tail_weight(int j, double r, const SplitParams& split)
{
    const double x = (double(j) - split.c0) / split.theta;
    const int kmin = std::max(0, int(std::ceil(x - 1e-9)));
    return 1.0 - lp_low_weight(kmin - 1, r);
}

FourierField bessel_field(int cutoff, double beta)
{
    return FourierField::from_function(cutoff, [beta](FrequencyIndex n) { return Complex(bessel_symbol(n, beta)); });
}

FourierField inverse_laplacian_field(int cutoff)
{
    return FourierField::from_function(cutoff, [](FrequencyIndex n) { return Complex(1.0 / n.bracket2()); });
}

}  // namespace

double wave_kernel(double t, FrequencyIndex n)
{
    const double w = n.wave_frequency();
    return std::exp(-0.5 * t) * std::sin(t * w) / w;
}

double wave_kernel_dt(double t, FrequencyIndex n)
{
    const double w = n.wave_frequency();
    return std::exp(-0.5 * t) * (std::cos(t * w) - std::sin(t * w) / (2.0 * w));
}

Mat2 damped_propagator(double t, FrequencyIndex n)
{
    if (t < 0) throw std::invalid_argument("propagator time must be nonnegative");
    const double D = wave_kernel(t, n);
    const double Dt = wave_kernel_dt(t, n);
    return {Dt + D, D, -n.bracket2() * D, Dt};
}

Mat2 undamped_propagator(double t, FrequencyIndex n)
{
    const double w = n.bracket();
    const double c = std::cos(t * w), s = std::sin(t * w);
    return {c, s / w, -w * s, c};
}

Mat2 step_noise_covariance(double h, FrequencyIndex n)
{
    const Mat2 P = damped_propagator(h, n);
    const double s1 = 1.0 / n.bracket2();
    // S − P S Pᵀ with S = diag(s1, 1)
    const double a = s1 - (P.a * P.a * s1 + P.b * P.b);
    const double b = -(P.a * P.c * s1 + P.b * P.d);
    const double d = 1.0 - (P.c * P.c * s1 + P.d * P.d);
    return {a, b, b, d};
}

double sigma_n(FrequencyIndex n, double t1, double t2)
{
    const double tau = std::abs(t1 - t2);
    const double w = n.wave_frequency();
    return std::exp(-0.5 * tau) * (std::cos(tau * w) + std::sin(tau * w) / (2.0 * w)) / n.bracket2();
}

double wick_pair_covariance(FrequencyIndex n1, FrequencyIndex n2, FrequencyIndex n1p, FrequencyIndex n2p, double t1,
                            double t1p, double t2, double t2p)
{
    if (!(t2p <= t2 && t2 <= t1p && t1p <= t1)) throw std::invalid_argument("times must satisfy t2' <= t2 <= t1' <= t1");
    double v = 0.0;
    if (n1 == n1p && n2 == n2p) v += sigma_n(n1, t1, t2) * sigma_n(n2, t1p, t2p);
    if (n1 == n2p && n2 == n1p) v += sigma_n(n1, t1, t2p) * sigma_n(n2, t1p, t2);
    return v;
}

WavePair stationary_wave_pair(int N, const RandomStream& key)
{
    WavePair s;
    s.pos = keyed_gaussian_field(N, key.derive(1), [](FrequencyIndex n) { return 1.0 / n.bracket2(); });
    s.vel = keyed_gaussian_field(N, key.derive(2), [](FrequencyIndex) { return 1.0; });
    return s;
}

LinearWaveStep::LinearWaveStep(int N, double h, bool damping, bool noise) : N_(N), h_(h), noise_(noise)
{
    if (!(h > 0)) throw std::invalid_argument("step size must be positive");
    if (noise && !damping) throw std::invalid_argument("the undamped step is deterministic");
    const auto lat = Lattice::get(N);
    prop_.resize(lat->size());
    chol_.resize(lat->size());
    for (std::size_t i = 0; i < lat->size(); ++i) {
        const auto n = (*lat)[i];
        prop_[i] = damping ? damped_propagator(h, n) : undamped_propagator(h, n);
        if (!noise) continue;
        const Mat2 S = step_noise_covariance(h, n);
        const double l11 = std::sqrt(std::max(S.a, 0.0));
        const double l21 = l11 > 0 ? S.b / l11 : 0.0;
        const double l22 = std::sqrt(std::max(S.d - l21 * l21, 0.0));
        chol_[i] = {l11, l21, l22};
    }
}

void LinearWaveStep::apply(WavePair& state, const RandomStream& key) const
{
    if (state.pos.cutoff() != N_ || state.vel.cutoff() != N_) throw std::invalid_argument("wave state cutoff mismatch");
    const auto& lat = state.pos.lattice();
    auto x = state.pos.coeffs();
    auto v = state.vel.coeffs();
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const auto n = lat[i];
        if (!n.is_zero() && !n.in_lambda()) continue;
        const Mat2& P = prop_[i];
        Complex xn = P.a * x[i] + P.b * v[i];
        Complex vn = P.c * x[i] + P.d * v[i];
        if (noise_) {
            const auto& L = chol_[i];
            RandomStream r = key.derive(n.packed());
            Complex z1, z2;
            if (n.is_zero()) {
                z1 = r.normal();
                z2 = r.normal();
            } else {
                z1 = r.complex_normal();
                z2 = r.complex_normal();
            }
            xn += L[0] * z1;
            vn += L[1] * z1 + L[2] * z2;
        }
        x[i] = xn;
        v[i] = vn;
        if (!n.is_zero()) {
            x[lat.mirror(i)] = std::conj(xn);
            v[lat.mirror(i)] = std::conj(vn);
        }
    }
    state.time += h_;
}

WavePair stoch_convolution_step(const WavePair& state, double h, const RandomStream& key)
{
    WavePair next = state;
    LinearWaveStep(state.cutoff(), h).apply(next, key);
    return next;
}

FourierField resonant_sum(int N, double beta)
{
    static std::mutex m;
    static std::map<std::pair<int, double>, FourierField> cache;
    {
        std::lock_guard lock(m);
        if (auto it = cache.find({N, beta}); it != cache.end()) return it->second;
    }
    const FourierField c = inverse_laplacian_field(N);
    FourierField S = resonant_product(bessel_field(2 * N, beta), c, N);
    // Remove the n + n₂ = 0 term, V̂(0)ρ(0, n)⟨n⟩^{−2}.
    S -= c.apply_multiplier([](FrequencyIndex n) { return resonance_weight(0.0, n.norm()); });
    std::lock_guard lock(m);
    cache.emplace(std::make_pair(N, beta), S);
    return S;
}

ResonantObject resonant_object(const FourierField& psi, const PotentialParams& params, const RenormTable& table,
                               bool decompose)
{
    const int N = table.N;
    if (!(params.beta > 0)) throw std::invalid_argument("beta must be positive");
    if (psi.cutoff() != N) throw std::invalid_argument("field cutoff must match the renormalization table");
    const double beta = params.beta;

    const FourierField w = wick_square(psi, table);
    ResonantObject r;
    r.Z = resonant_product(apply_V(w, beta), psi, N);
    if (!decompose) return r;

    const auto rho0 = [](FrequencyIndex n) { return resonance_weight(0.0, n.norm()); };
    r.Z2 = w(FrequencyIndex{}).real() * psi.apply_multiplier(rho0);

    FourierField d(N);
    {
        auto dc = d.coeffs();
        const auto pc = psi.coeffs();
        const auto& lat = psi.lattice();
        for (std::size_t i = 0; i < lat.size(); ++i) dc[i] = std::norm(pc[i]) - 1.0 / lat[i].bracket2();
    }
    FourierField sum12 = resonant_product(bessel_field(2 * N, beta), d, N);
    sum12 -= d.apply_multiplier(rho0);
    const FourierField S = resonant_sum(N, beta);

    r.Z12 = FourierField(N);
    r.Z13 = FourierField(N);
    r.Z14 = FourierField(N);
    const auto& lat = psi.lattice();
    const auto pc = psi.coeffs();
    const auto s12 = sum12.coeffs();
    const auto sc = S.coeffs();
    auto z12 = r.Z12.coeffs(), z13 = r.Z13.coeffs(), z14 = r.Z14.coeffs();
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const auto n = lat[i];
        z12[i] = 2.0 * pc[i] * s12[i].real();
        z13[i] = 2.0 * pc[i] * sc[i].real();
        if (!n.is_zero()) {
            const FrequencyIndex n2 = n + n;
            z14[i] = -bessel_symbol(n2, beta) * resonance_weight(n2.norm(), n.norm()) * std::norm(pc[i]) * pc[i];
        }
    }
    r.Z11 = r.Z - r.Z12 - r.Z13 - r.Z14 - r.Z2;
    return r;
}

double split_weight(FrequencyIndex n1, FrequencyIndex n2, const SplitParams& split)
{
    const double r1 = n1.norm(), r2 = n2.norm();
    double s = 0.0;
    for (int j = 0; j <= lp_max_block(int(std::ceil(r1))); ++j) {
        const double pj = lp_weight(j, r1);
        if (pj != 0.0) s += pj * split_tail_weight(j, r2, split);
    }
    return s;
}

KernelValue kernel_A(FrequencyIndex n, FrequencyIndex n1, double t, double tp, const FourierField& psi_tp,
                     const FourierField& psi_t, const SplitParams& split)
{
    check_times(t, tp);
    if (psi_tp.cutoff() != psi_t.cutoff()) throw std::invalid_argument("ensemble slices must share a cutoff");
    const double tau = t - tp;
    const auto& lat = psi_tp.lattice();
    const auto a = psi_tp.coeffs();
    const auto b = psi_t.coeffs();
    Complex s = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const auto n2 = lat[i];
        const auto k = psi_t.lattice().find(n - n1 - n2);
        if (k < 0) continue;
        const double L = split_weight(n1, n2, split);
        if (L == 0.0) continue;
        const FrequencyIndex m = n1 + n2;
        const double w = L * resonance_weight(m.norm(), psi_t.lattice()[std::size_t(k)].norm()) * wave_kernel(tau, m);
        s += w * a[i] * b[std::size_t(k)];
    }
    return {s, psi_tp.cutoff()};
}

CounterTerms kernel_counterterms(FrequencyIndex n, double t, double tp, int N, const SplitParams& split)
{
    check_times(t, tp);
    const double tau = t - tp;
    const double damp = std::exp(-tau);
    CounterTerms c;
    c.truncation = N;
    for (const auto& n2 : Lattice::get(N)->points()) {
        const FrequencyIndex m = n + n2;
        const double W = split_weight(n, n2, split) * resonance_weight(m.norm(), n2.norm());
        if (W == 0.0) continue;
        const double wa = m.wave_frequency(), w2 = n2.wave_frequency(), b2 = n2.bracket2();
        c.A2 += W * wave_kernel(tau, m) * sigma_n(n2, t, tp);
        c.A3 += W * damp * std::sin(tau * (wa + w2)) / (2.0 * wa * b2);
        c.A4 += W * damp * std::sin(tau * (wa - w2)) / (2.0 * wa * b2);
        c.A5 += W * damp * std::sin(tau * wa) * std::sin(tau * w2) / (2.0 * wa * b2 * w2);
    }
    return c;
}

Complex frak_A(FrequencyIndex n, double t, double tp, const FourierField& psi_tp, const FourierField& psi_t)
{
    check_times(t, tp);
    const double tau = t - tp;
    const auto& lat = psi_tp.lattice();
    const auto a = psi_tp.coeffs();
    const auto b = psi_t.coeffs();
    Complex s = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const auto n1 = lat[i];
        const auto k = psi_t.lattice().find(n - n1);
        if (k < 0) continue;
        const double w = resonance_weight(n1.norm(), (n - n1).norm()) * wave_kernel(tau, n1);
        s += w * a[i] * b[std::size_t(k)];
    }
    return s;
}

FourierField frak_A_field(double t, double tp, const FourierField& psi_tp, const FourierField& psi_t)
{
    check_times(t, tp);
    const double tau = t - tp;
    const FourierField Dpsi = psi_tp.apply_multiplier([tau](FrequencyIndex n) { return wave_kernel(tau, n); });
    return resonant_product(Dpsi, psi_t, psi_t.cutoff());
}

ParacontrolledOperator::ParacontrolledOperator(double t, double tp, FourierField psi_tp, FourierField psi_t,
                                               int input_cutoff, int output_cutoff, const SplitParams& split)
    : tau_(t - tp), psi_tp_(std::move(psi_tp)), psi_t_(std::move(psi_t)), in_(input_cutoff), out_(output_cutoff),
      split_(split)
{
    check_times(t, tp);
    if (!(split.theta > 0 && split.theta <= 1)) throw std::invalid_argument("theta must lie in (0, 1]");
}

FourierField ParacontrolledOperator::apply(const FourierField& w0) const
{
    const FourierField w = w0.with_cutoff(in_);
    const int mid = in_ + psi_tp_.cutoff();
    FourierField F(mid);
    for (int j = 0; j <= lp_max_block(in_); ++j) {
        const auto pw = w.apply_multiplier([j](FrequencyIndex n) { return lp_weight(j, n.norm()); });
        const auto lp =
            psi_tp_.apply_multiplier([j, this](FrequencyIndex n) { return split_tail_weight(j, n.norm(), split_); });
        F += multiply(pw, lp, mid);
    }
    FourierField out(out_);
    for (int l = 0; l <= lp_max_block(mid); ++l) {
        const double tau = tau_;
        const auto a = F.apply_multiplier([l, tau](FrequencyIndex n) { return lp_weight(l, n.norm()) * wave_kernel(tau, n); });
        const auto b = psi_t_.apply_multiplier([l](FrequencyIndex n) { return lp_band_weight(l, n.norm()); });
        out += multiply(a, b, out_);
    }
    return out;
}

FourierField ParacontrolledOperator::apply_adjoint(const FourierField& v0) const
{
    const FourierField v = v0.with_cutoff(out_);
    const int mid = in_ + psi_tp_.cutoff();
    FourierField G(mid);
    for (int l = 0; l <= lp_max_block(mid); ++l) {
        const double tau = tau_;
        const auto b = psi_t_.apply_multiplier([l](FrequencyIndex n) { return lp_band_weight(l, n.norm()); });
        G += multiply(v, b, mid).apply_multiplier(
            [l, tau](FrequencyIndex n) { return lp_weight(l, n.norm()) * wave_kernel(tau, n); });
    }
    FourierField out(in_);
    for (int j = 0; j <= lp_max_block(in_); ++j) {
        const auto lp =
            psi_tp_.apply_multiplier([j, this](FrequencyIndex n) { return split_tail_weight(j, n.norm(), split_); });
        out += multiply(G, lp, in_).apply_multiplier([j](FrequencyIndex n) { return lp_weight(j, n.norm()); });
    }
    return out;
}

double ParacontrolledOperator::norm_estimate(int iterations, const RandomStream& key) const
{
    FourierField x = keyed_gaussian_field(in_, key, [](FrequencyIndex) { return 1.0; });
    double estimate = 0.0;
    for (int k = 0; k < iterations; ++k) {
        const double nx = std::sqrt(x.norm2());
        if (nx == 0.0) return 0.0;
        x *= 1.0 / nx;
        x = apply_adjoint(apply(x));
        estimate = std::sqrt(std::sqrt(x.norm2()));
    }
    return estimate;
}

}  // namespace hp43
