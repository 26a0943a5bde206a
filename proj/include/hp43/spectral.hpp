#pragma once

#include <iosfwd>
#include <string>

#include "hp43/fourier_field.hpp"
#include "hp43/grid.hpp"

namespace hp43 {

/// Exact spectral product π_out(uv); out_cutoff < 0 keeps the full support cutoff(u)+cutoff(v).
FourierField multiply(const FourierField& u, const FourierField& v, int out_cutoff = -1);

/// Smooth bump φ: 1 on [0, 5/4], 0 on [8/5, ∞), C^∞ in between. Even in s.
double lp_bump(double s);
/// φ_j(ξ) as a function of r = |ξ|, normalized by Σ_k φ_k (which telescopes to 1).
double lp_weight(int j, double r);
/// Σ_{|m−ℓ|≤2} φ_m(r)
double lp_band_weight(int l, double r);
/// Σ_{m≤ℓ} φ_m(r) = φ(r/2^ℓ); zero for ℓ < 0.
double lp_low_weight(int l, double r);
/// Resonance weight ρ(a, b) = Σ_{|ℓ−m|≤2} φ_ℓ(a)φ_m(b) ∈ [0, 1].
double resonance_weight(double a, double b);
/// Largest block index j whose symbol meets {|n| ≤ cutoff}.
int lp_max_block(int cutoff);

/// 𝐏_j u
FourierField lp_block(const FourierField& u, int j);

struct Paraproducts {
    FourierField lo_hi;     // f ≺ g
    FourierField resonant;  // f ⊜ g
    FourierField hi_lo;     // f ≻ g
};

/// Bony decomposition of fg, each piece projected to out_cutoff (default cutoff(f)+cutoff(g)).
Paraproducts paraproducts(const FourierField& f, const FourierField& g, int out_cutoff = -1);

/// Resonant piece alone: Σ_{a+b=n} ρ(|a|,|b|) f̂(a)ĝ(b), projected to out_cutoff.
FourierField resonant_product(const FourierField& f, const FourierField& g, int out_cutoff = -1);

/// ‖2^{sj}‖𝐏_j u‖_{L^p}‖_{ℓ^q_j}; p or q = ∞ is passed as INFINITY.
double besov_norm(const FourierField& u, double s, double p, double q);

/// Snapshot file: "HP43", u16 version, u32 N, u8 reality, then (re, im) f64 pairs
/// in lexicographic order over the ball, all little-endian.
void write_snapshot(std::ostream& out, const FourierField& u);
FourierField read_snapshot(std::istream& in);
void write_snapshot(const std::string& path, const FourierField& u);
FourierField read_snapshot(const std::string& path);

}  // namespace hp43
