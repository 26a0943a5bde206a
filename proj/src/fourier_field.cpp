#include "hp43/fourier_field.hpp"

#include <cmath>
#include <stdexcept>

namespace hp43 {

FourierField::FourierField(int cutoff, bool real, ProjectorShape shape)
    : lattice_(Lattice::get(cutoff, shape)), coeffs_(lattice_->size()), real_(real)
{
}

FourierField FourierField::from_function(int cutoff, const std::function<Complex(FrequencyIndex)>& f, bool real,
                                         ProjectorShape shape)
{
    FourierField u(cutoff, real, shape);
    const auto pts = u.lattice_->points();
    for (std::size_t i = 0; i < pts.size(); ++i) u.coeffs_[i] = f(pts[i]);
    return u;
}

FourierField FourierField::constant(double c, int cutoff)
{
    FourierField u(cutoff);
    u.set({0, 0, 0}, c);
    return u;
}

Complex FourierField::operator()(FrequencyIndex n) const
{
    const auto i = lattice_->find(n);
    return i < 0 ? Complex{} : coeffs_[std::size_t(i)];
}

void FourierField::set(FrequencyIndex n, Complex value)
{
    const auto i = lattice_->find(n);
    if (i < 0) throw std::out_of_range("frequency outside field lattice");
    if (real_ && n.is_zero()) value = value.real();
    coeffs_[std::size_t(i)] = value;
    if (real_) coeffs_[lattice_->mirror(std::size_t(i))] = std::conj(value);
}

double FourierField::norm2() const
{
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s;
}

double FourierField::sobolev_norm2(double s) const
{
    double acc = 0.0;
    const auto pts = lattice_->points();
    for (std::size_t i = 0; i < pts.size(); ++i) acc += std::pow(pts[i].bracket2(), s) * std::norm(coeffs_[i]);
    return acc;
}

Complex FourierField::inner(const FourierField& v) const
{
    Complex s{};
    const auto pts = lattice_->points();
    for (std::size_t i = 0; i < pts.size(); ++i) s += coeffs_[i] * std::conj(v(pts[i]));
    return s;
}

bool FourierField::is_hermitian(double tol) const
{
    double scale = 0.0;
    for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        if (std::abs(coeffs_[i] - std::conj(coeffs_[lattice_->mirror(i)])) > tol * std::max(scale, 1.0))
            return false;
    return true;
}

void FourierField::enforce_reality()
{
    real_ = true;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const std::size_t j = lattice_->mirror(i);
        if (j < i) continue;
        const Complex avg = 0.5 * (coeffs_[i] + std::conj(coeffs_[j]));
        coeffs_[i] = avg;
        coeffs_[j] = std::conj(avg);
    }
}

FourierField FourierField::with_cutoff(int cutoff) const
{
    FourierField out(cutoff, real_, shape());
    const auto pts = out.lattice_->points();
    if (cutoff <= this->cutoff()) {
        for (std::size_t i = 0; i < pts.size(); ++i) out.coeffs_[i] = (*this)(pts[i]);
    } else {
        const auto src = lattice_->points();
        for (std::size_t i = 0; i < src.size(); ++i)
            out.coeffs_[std::size_t(out.lattice_->find(src[i]))] = coeffs_[i];
    }
    return out;
}

FourierField FourierField::apply_multiplier(const std::function<double(FrequencyIndex)>& m) const
{
    FourierField out(*this);
    const auto pts = lattice_->points();
    for (std::size_t i = 0; i < pts.size(); ++i) out.coeffs_[i] *= m(pts[i]);
    return out;
}

FourierField& FourierField::operator+=(const FourierField& o)
{
    if (o.lattice_ == lattice_) {
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    } else {
        if (o.cutoff() > cutoff()) *this = with_cutoff(o.cutoff());
        const auto src = o.lattice_->points();
        for (std::size_t i = 0; i < src.size(); ++i) {
            const auto j = lattice_->find(src[i]);
            if (j < 0) throw std::invalid_argument("incompatible field lattices");
            coeffs_[std::size_t(j)] += o.coeffs_[i];
        }
    }
    real_ = real_ && o.real_;
    return *this;
}

FourierField& FourierField::operator-=(const FourierField& o)
{
    FourierField neg(o);
    neg *= -1.0;
    return *this += neg;
}

FourierField& FourierField::operator*=(double a)
{
    for (auto& c : coeffs_) c *= a;
    return *this;
}

FourierField project(const FourierField& u, int cutoff)
{
    if (cutoff < 0) throw std::invalid_argument("projection radius must be nonnegative");
    return u.with_cutoff(cutoff);
}

}  // namespace hp43
