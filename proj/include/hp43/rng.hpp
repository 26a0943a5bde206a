#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace hp43 {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Counter-based random stream. A stream is a key plus a counter; `derive` builds
/// independent child keys from integer labels (replica, step, packed frequency, ...),
/// so draws are addressed by their labels rather than by call order.
class RandomStream {
public:
    constexpr explicit RandomStream(std::uint64_t key = 0) : key_(mix64(key ^ 0x48503433ull)) {}

    RandomStream derive(std::uint64_t label) const
    {
        RandomStream child;
        child.key_ = mix64(key_ ^ mix64(label + 0x632BE59BD9B4E019ull));
        return child;
    }
    RandomStream derive(std::initializer_list<std::uint64_t> labels) const
    {
        RandomStream s = *this;
        for (auto l : labels) s = s.derive(l);
        return s;
    }

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() { return mix64(key_ + 0xD1B54A32D192ED03ull * ++counter_); }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal (Box–Muller, both variates used).
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Complex Gaussian with E|g|² = var, real and imaginary parts independent.
    std::complex<double> complex_normal(double var = 1.0)
    {
        const double s = std::sqrt(0.5 * var);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Purpose labels keep draws for different objects disjoint.
enum class Draw : std::uint64_t {
    field = 1,
    wiener = 2,
    wave_noise = 3,
    heat_noise = 4,
    mcmc = 5,
    velocity = 6,
    witness = 7,
    variational = 8,
};

inline RandomStream stream_for(std::uint64_t seed, Draw purpose, std::uint64_t replica)
{
    return RandomStream(seed).derive({std::uint64_t(purpose), replica});
}

}  // namespace hp43
