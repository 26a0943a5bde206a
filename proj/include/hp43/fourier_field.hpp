#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "hp43/lattice.hpp"

namespace hp43 {

using Complex = std::complex<double>;

/// Fourier coefficients û(n), n in the truncated lattice, with e_n = e^{in·x} and the
/// normalized measure on 𝕋³, so Parseval reads ∫|u|² = Σ|û(n)|².
///
/// A field flagged `real` is expected to satisfy û(−n) = conj(û(n)); mutating
/// coefficients through `coeffs()` does not re-check that, use `set()` or
/// `enforce_reality()` to keep it.
class FourierField {
public:
    FourierField() : FourierField(0) {}
    explicit FourierField(int cutoff, bool real = true, ProjectorShape shape = ProjectorShape::ball);

    static FourierField from_function(int cutoff, const std::function<Complex(FrequencyIndex)>& f,
                                      bool real = true, ProjectorShape shape = ProjectorShape::ball);
    static FourierField constant(double c, int cutoff = 0);

    int cutoff() const { return lattice_->cutoff(); }
    bool is_real() const { return real_; }
    ProjectorShape shape() const { return lattice_->shape(); }
    const Lattice& lattice() const { return *lattice_; }
    std::size_t size() const { return coeffs_.size(); }

    std::span<const Complex> coeffs() const { return coeffs_; }
    std::span<Complex> coeffs() { return coeffs_; }

    /// û(n); zero outside the lattice.
    Complex operator()(FrequencyIndex n) const;
    /// Sets û(n) (and û(−n) = conj for real fields). n must lie in the lattice.
    void set(FrequencyIndex n, Complex value);

    /// Σ_n |û(n)|² = ‖u‖²_{L²}
    double norm2() const;
    /// Σ_n ⟨n⟩^{2s}|û(n)|² = ‖u‖²_{H^s}
    double sobolev_norm2(double s) const;
    /// Σ_n û(n) conj(v̂(n)); real for real fields.
    Complex inner(const FourierField& v) const;

    bool is_hermitian(double tol = 1e-12) const;
    void enforce_reality();

    /// Same coefficients on a lattice of a different cutoff (zero-padding or projection).
    FourierField with_cutoff(int cutoff) const;

    /// Multiplies every coefficient by m(n).
    FourierField apply_multiplier(const std::function<double(FrequencyIndex)>& m) const;

    FourierField& operator+=(const FourierField& o);
    FourierField& operator-=(const FourierField& o);
    FourierField& operator*=(double a);

    friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
    friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
    friend FourierField operator*(double a, FourierField u) { return u *= a; }
    friend FourierField operator*(FourierField u, double a) { return u *= a; }

private:
    std::shared_ptr<const Lattice> lattice_;
    std::vector<Complex> coeffs_;
    bool real_;
};

/// π_N: zeroes every coefficient outside the projector of radius N.
FourierField project(const FourierField& u, int cutoff);

}  // namespace hp43
