#include "hp43/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hp43/errors.hpp"

namespace hp43 {

namespace {

constexpr double kPlateau = 1.25;
constexpr double kSupport = 1.6;

// Multiplier m(|n|) applied to u, then sampled on the grid. |n|² is an integer, so m is tabulated.
GridField filtered_grid(SpectralGrid& grid, const FourierField& u, const std::function<double(double)>& m)
{
    const long c = u.cutoff();
    std::vector<double> table(std::size_t(3 * c * c + 1));
    for (std::size_t k = 0; k < table.size(); ++k) table[k] = m(std::sqrt(double(k)));
    return grid.to_grid(u.apply_multiplier([&](FrequencyIndex n) { return table[std::size_t(n.norm2())]; }));
}

void accumulate_product(std::vector<double>& acc, const GridField& a, const GridField& b)
{
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a.values[i] * b.values[i];
}

}  // namespace

FourierField multiply(const FourierField& u, const FourierField& v, int out_cutoff)
{
    if (!u.is_real() || !v.is_real()) throw std::invalid_argument("multiply requires real fields");
    const int out = out_cutoff < 0 ? u.cutoff() + v.cutoff() : out_cutoff;
    auto& grid = SpectralGrid::for_side(dealiased_side(u.cutoff(), v.cutoff(), out));
    GridField gu = grid.to_grid(u);
    const GridField gv = grid.to_grid(v);
    for (std::size_t i = 0; i < gu.values.size(); ++i) gu.values[i] *= gv.values[i];
    return grid.from_grid(gu, out, u.shape());
}

double lp_bump(double s)
{
    s = std::abs(s);
    if (s <= kPlateau) return 1.0;
    if (s >= kSupport) return 0.0;
    // Smooth step from 1 to 0 across (5/4, 8/5).
    const double x = (s - kPlateau) / (kSupport - kPlateau);
    const double a = std::exp(-1.0 / (1.0 - x));
    const double b = std::exp(-1.0 / x);
    return a / (a + b);
}

double lp_low_weight(int l, double r)
{
    if (l < 0) return 0.0;
    return lp_bump(std::ldexp(r, -l));
}

double lp_weight(int j, double r)
{
    if (j < 0) return 0.0;
    if (j == 0) return lp_bump(r);
    // Σ_k φ_k(ξ) telescopes to 1, so the normalizing denominator is exact.
    return lp_low_weight(j, r) - lp_low_weight(j - 1, r);
}

double lp_band_weight(int l, double r)
{
    return lp_low_weight(l + 2, r) - lp_low_weight(l - 3, r);
}

double resonance_weight(double a, double b)
{
    const int ja = lp_max_block(int(std::ceil(a)));
    double s = 0.0;
    for (int l = 0; l <= ja; ++l) {
        const double w = lp_weight(l, a);
        if (w != 0.0) s += w * lp_band_weight(l, b);
    }
    return s;
}

int lp_max_block(int cutoff)
{
    int j = 0;
    while (kPlateau * std::ldexp(1.0, j) < double(cutoff)) ++j;
    return j;
}

FourierField lp_block(const FourierField& u, int j)
{
    if (j < 0) throw std::invalid_argument("block index must be nonnegative");
    return u.apply_multiplier([j](FrequencyIndex n) { return lp_weight(j, n.norm()); });
}

Paraproducts paraproducts(const FourierField& f, const FourierField& g, int out_cutoff)
{
    if (!f.is_real() || !g.is_real()) throw std::invalid_argument("paraproducts require real fields");
    const int out = out_cutoff < 0 ? f.cutoff() + g.cutoff() : out_cutoff;
    auto& grid = SpectralGrid::for_side(dealiased_side(f.cutoff(), g.cutoff(), out));
    const std::size_t size = std::size_t(grid.side()) * grid.side() * grid.side();
    std::vector<double> lo(size, 0.0), res(size, 0.0), hi(size, 0.0);

    const int blocks = std::max(lp_max_block(f.cutoff()), lp_max_block(g.cutoff()));
    for (int k = 0; k <= blocks; ++k) {
        const GridField pf = filtered_grid(grid, f, [k](double r) { return lp_weight(k, r); });
        const GridField pg = filtered_grid(grid, g, [k](double r) { return lp_weight(k, r); });
        const GridField band_g = filtered_grid(grid, g, [k](double r) { return lp_band_weight(k, r); });
        accumulate_product(res, pf, band_g);
        if (k >= 3) {
            const GridField low_f = filtered_grid(grid, f, [k](double r) { return lp_low_weight(k - 3, r); });
            const GridField low_g = filtered_grid(grid, g, [k](double r) { return lp_low_weight(k - 3, r); });
            accumulate_product(lo, low_f, pg);
            accumulate_product(hi, pf, low_g);
        }
    }

    auto to_field = [&](std::vector<double>& values) {
        GridField gf{grid.side(), std::move(values)};
        return grid.from_grid(gf, out, f.shape());
    };
    return {to_field(lo), to_field(res), to_field(hi)};
}

FourierField resonant_product(const FourierField& f, const FourierField& g, int out_cutoff)
{
    if (!f.is_real() || !g.is_real()) throw std::invalid_argument("resonant product requires real fields");
    const int out = out_cutoff < 0 ? f.cutoff() + g.cutoff() : out_cutoff;
    auto& grid = SpectralGrid::for_side(dealiased_side(f.cutoff(), g.cutoff(), out));
    std::vector<double> res(std::size_t(grid.side()) * grid.side() * grid.side(), 0.0);
    const int fb = lp_max_block(f.cutoff());
    const int gb = lp_max_block(g.cutoff());
    for (int l = 0; l <= fb; ++l) {
        if (l - 2 > gb) break;
        const GridField pf = filtered_grid(grid, f, [l](double r) { return lp_weight(l, r); });
        const GridField band_g = filtered_grid(grid, g, [l](double r) { return lp_band_weight(l, r); });
        accumulate_product(res, pf, band_g);
    }
    GridField gf{grid.side(), std::move(res)};
    return grid.from_grid(gf, out, f.shape());
}

double besov_norm(const FourierField& u, double s, double p, double q)
{
    if (!(p >= 1.0) || !(q >= 1.0)) throw ConfigError("Besov exponents must satisfy p, q >= 1");
    auto& grid = SpectralGrid::for_side(fft_friendly_side(4 * u.cutoff() + 2));
    const int blocks = lp_max_block(u.cutoff());
    double acc = 0.0;
    for (int j = 0; j <= blocks; ++j) {
        const GridField pj = filtered_grid(grid, u, [j](double r) { return lp_weight(j, r); });
        double lp = 0.0;
        if (std::isinf(p)) {
            for (double x : pj.values) lp = std::max(lp, std::abs(x));
        } else {
            for (double x : pj.values) lp += std::pow(std::abs(x), p);
            lp = std::pow(lp / double(pj.values.size()), 1.0 / p);
        }
        const double term = std::pow(2.0, s * j) * lp;
        if (std::isinf(q)) acc = std::max(acc, term);
        else acc += std::pow(term, q);
    }
    return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

namespace {

constexpr char kMagic[4] = {'H', 'P', '4', '3'};
constexpr std::uint16_t kSnapshotVersion = 1;

template <class T>
void put_le(std::ostream& out, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in)
{
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw ConfigError("truncated snapshot");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_snapshot(std::ostream& out, const FourierField& u)
{
    if (u.shape() != ProjectorShape::ball) throw ConfigError("snapshots store ball-projected fields only");
    out.write(kMagic, 4);
    put_le<std::uint16_t>(out, kSnapshotVersion);
    put_le<std::uint32_t>(out, std::uint32_t(u.cutoff()));
    put_le<std::uint8_t>(out, u.is_real() ? 1 : 0);
    for (const auto& c : u.coeffs()) {
        put_le<double>(out, c.real());
        put_le<double>(out, c.imag());
    }
}

FourierField read_snapshot(std::istream& in)
{
    char magic[4];
    in.read(magic, 4);
    if (!in || !std::equal(magic, magic + 4, kMagic)) throw ConfigError("not an HP43 snapshot");
    const auto version = get_le<std::uint16_t>(in);
    if (version != kSnapshotVersion) throw ConfigError("unsupported snapshot version " + std::to_string(version));
    const auto cutoff = get_le<std::uint32_t>(in);
    const bool real = get_le<std::uint8_t>(in) != 0;
    FourierField u(int(cutoff), real);
    for (auto& c : u.coeffs()) {
        const double re = get_le<double>(in);
        const double im = get_le<double>(in);
        c = {re, im};
    }
    return u;
}

void write_snapshot(const std::string& path, const FourierField& u)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    write_snapshot(out, u);
}

FourierField read_snapshot(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    return read_snapshot(in);
}

}  // namespace hp43
