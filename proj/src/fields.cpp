#include "hp43/fields.hpp"

#include <algorithm>
#include <cmath>

#include "hp43/errors.hpp"
#include "hp43/spectral.hpp"

namespace hp43 {

FourierField keyed_gaussian_field(int N, const RandomStream& key, const std::function<double(FrequencyIndex)>& variance)
{
    FourierField u(N);
    const auto& lat = u.lattice();
    auto c = u.coeffs();
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const FrequencyIndex n = lat[i];
        if (n.is_zero()) {
            RandomStream r = key.derive(n.packed());
            c[i] = std::sqrt(variance(n)) * r.normal();
        } else if (n.in_lambda()) {
            RandomStream r = key.derive(n.packed());
            const Complex g = r.complex_normal(variance(n));
            c[i] = g;
            c[lat.mirror(i)] = std::conj(g);
        }
    }
    return u;
}

FourierField sample_mu(const GaussianEnsembleSpec& spec)
{
    if (spec.N < 0) throw ConfigError("cutoff must be nonnegative");
    const double s = spec.s;
    return keyed_gaussian_field(spec.N, stream_for(spec.seed, Draw::field, spec.replica),
                                [s](FrequencyIndex n) { return std::pow(n.bracket2(), -s); });
}

FourierField wick_square(const FourierField& u, const RenormTable& table)
{
    const FourierField uN = project(u, table.N);
    FourierField w = multiply(uN, uN);
    w.set({0, 0, 0}, w(FrequencyIndex{}) - table.sigma_N);
    return w;
}

double wick_mass(const FourierField& u, const RenormTable& table)
{
    return project(u, table.N).norm2() - table.sigma_N;
}

WienerPath::WienerPath(int N, std::vector<double> times, std::uint64_t seed, std::uint64_t replica)
    : N_(N), times_(std::move(times))
{
    if (times_.size() < 2 || times_.front() != 0.0) throw ConfigError("time grid must start at 0 with >= 1 interval");
    for (std::size_t k = 1; k < times_.size(); ++k)
        if (!(times_[k] > times_[k - 1])) throw ConfigError("time grid must be increasing");
    const RandomStream base = stream_for(seed, Draw::wiener, replica);
    increments_.reserve(times_.size() - 1);
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
        const double dt = times_[k + 1] - times_[k];
        increments_.push_back(keyed_gaussian_field(N, base.derive(k), [dt](FrequencyIndex) { return dt; }));
    }
}

FourierField WienerPath::brownian(std::size_t k) const
{
    FourierField b(N_);
    for (std::size_t j = 0; j < k; ++j) b += increments_[j];
    return b;
}

FourierField WienerPath::Y(std::size_t k) const
{
    return brownian(k).apply_multiplier([](FrequencyIndex n) { return 1.0 / n.bracket(); });
}

std::size_t WienerPath::index_of(double t) const
{
    for (std::size_t k = 0; k < times_.size(); ++k)
        if (std::abs(times_[k] - t) <= 1e-14) return k;
    throw ConfigError("time is not on the path grid");
}

WienerPath sample_Y_path(int N, int timesteps, std::uint64_t seed, std::uint64_t replica)
{
    if (timesteps < 2) throw ConfigError("need at least 2 timesteps");
    std::vector<double> times(std::size_t(timesteps) + 1);
    for (int k = 0; k <= timesteps; ++k) times[std::size_t(k)] = double(k) / timesteps;
    times.back() = 1.0;
    return WienerPath(N, std::move(times), seed, replica);
}

WitnessRandoms witness_randoms(const WienerPath& path, int M)
{
    if (M > path.cutoff()) throw ConfigError("M exceeds the path cutoff");
    return {project(path.Y(path.index_of(0.5)), M), 0.5 * sigma_N(M)};
}

}  // namespace hp43
