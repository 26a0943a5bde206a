#include "hp43/grid.hpp"

#include <fftw3.h>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

#include "hp43/errors.hpp"

namespace hp43 {

namespace {

std::atomic<std::size_t> g_memory_cap{std::size_t(3) << 30};

// FFTW's planner is not reentrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

bool smooth_2357(int n)
{
    for (int p : {2, 3, 5, 7})
        while (n % p == 0) n /= p;
    return n == 1;
}

inline int wrap(int k, int side) { return k < 0 ? k + side : k; }

}  // namespace

double GridField::mean() const
{
    return std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
}

int fft_friendly_side(int min_side)
{
    int n = std::max(min_side, 2);
    if (n % 2) ++n;
    while (!smooth_2357(n)) n += 2;
    return n;
}

int dealiased_side(int a, int b, int out)
{
    if (out < 0) out = a + b;
    return fft_friendly_side(a + b + out + 1);
}

void set_grid_memory_cap(std::size_t bytes) { g_memory_cap = bytes; }
std::size_t grid_memory_cap() { return g_memory_cap; }
const char* fft_library_version() { return fftw_version; }

SpectralGrid::SpectralGrid(int side) : side_(side)
{
    if (side < 2 || side % 2) throw std::invalid_argument("grid side must be even and >= 2");
    const std::size_t m = std::size_t(side);
    const std::size_t n_real = m * m * m;
    const std::size_t n_spec = m * m * (m / 2 + 1);
    const std::size_t bytes = n_real * sizeof(double) * 2 + n_spec * sizeof(fftw_complex);
    if (bytes > g_memory_cap)
        throw ResourceError("grid of side " + std::to_string(side) + " needs " + std::to_string(bytes >> 20) +
                            " MiB, above the memory cap");

    std::lock_guard lock(planner_mutex());
    real_buf_ = fftw_alloc_real(n_real);
    auto* spec = fftw_alloc_complex(n_spec);
    spec_buf_ = spec;
    if (!real_buf_ || !spec) throw ResourceError("FFT buffer allocation failed");
    // FFTW_ESTIMATE keeps the plan (and therefore rounding) identical run to run.
    forward_ = fftw_plan_dft_r2c_3d(side, side, side, real_buf_, spec, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_3d(side, side, side, spec, real_buf_, FFTW_ESTIMATE);
}

SpectralGrid::~SpectralGrid()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_));
    fftw_destroy_plan(static_cast<fftw_plan>(backward_));
    fftw_free(real_buf_);
    fftw_free(spec_buf_);
}

SpectralGrid& SpectralGrid::for_side(int side)
{
    thread_local std::map<int, std::unique_ptr<SpectralGrid>> cache;
    auto& slot = cache[side];
    if (!slot) {
        // Keep at most a handful of grids alive per thread.
        if (cache.size() > 4) {
            for (auto it = cache.begin(); it != cache.end();) {
                if (it->first != side) it = cache.erase(it);
                else ++it;
            }
        }
        cache[side] = std::make_unique<SpectralGrid>(side);
        return *cache[side];
    }
    return *slot;
}

void SpectralGrid::load_spectrum(const FourierField& u)
{
    if (!u.is_real()) throw std::invalid_argument("grid transforms require a real field");
    if (2 * u.cutoff() >= side_) throw std::invalid_argument("field cutoff does not fit the grid");
    const std::size_t m = std::size_t(side_);
    const std::size_t h = m / 2 + 1;
    auto* spec = static_cast<fftw_complex*>(spec_buf_);
    std::fill(reinterpret_cast<double*>(spec), reinterpret_cast<double*>(spec) + 2 * m * m * h, 0.0);
    const auto pts = u.lattice().points();
    const auto c = u.coeffs();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& n = pts[i];
        if (n.z < 0) continue;
        const std::size_t off = (std::size_t(wrap(n.x, side_)) * m + std::size_t(wrap(n.y, side_))) * h + std::size_t(n.z);
        spec[off][0] = c[i].real();
        spec[off][1] = c[i].imag();
    }
}

GridField SpectralGrid::to_grid(const FourierField& u)
{
    load_spectrum(u);
    fftw_execute(static_cast<fftw_plan>(backward_));
    GridField g;
    g.side = side_;
    g.values.assign(real_buf_, real_buf_ + std::size_t(side_) * side_ * side_);
    return g;
}

FourierField SpectralGrid::from_grid(const GridField& g, int cutoff, ProjectorShape shape)
{
    if (g.side != side_) throw std::invalid_argument("grid side mismatch");
    if (2 * cutoff >= side_) throw std::invalid_argument("requested cutoff does not fit the grid");
    std::copy(g.values.begin(), g.values.end(), real_buf_);
    fftw_execute(static_cast<fftw_plan>(forward_));
    const std::size_t m = std::size_t(side_);
    const std::size_t h = m / 2 + 1;
    const double scale = 1.0 / (double(m) * double(m) * double(m));
    const auto* spec = static_cast<const fftw_complex*>(spec_buf_);

    FourierField out(cutoff, true, shape);
    const auto& lat = out.lattice();
    auto coeffs = out.coeffs();
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const auto& n = lat[i];
        if (n.z < 0 || (n.z == 0 && !n.in_lambda() && !n.is_zero())) continue;
        const std::size_t off = (std::size_t(wrap(n.x, side_)) * m + std::size_t(wrap(n.y, side_))) * h + std::size_t(n.z);
        Complex v{spec[off][0] * scale, spec[off][1] * scale};
        if (n.is_zero()) v = v.real();
        coeffs[i] = v;
        coeffs[lat.mirror(i)] = std::conj(v);
    }
    return out;
}

}  // namespace hp43
