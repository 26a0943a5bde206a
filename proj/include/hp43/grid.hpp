#pragma once

#include <cstddef>
#include <vector>

#include "hp43/fourier_field.hpp"

namespace hp43 {

/// Real samples of a field on the uniform grid x_j = 2πj/side, j ∈ {0..side-1}³, row-major.
struct GridField {
    int side = 0;
    std::vector<double> values;

    double mean() const;
    double& at(int i, int j, int k) { return values[(std::size_t(i) * side + j) * side + k]; }
    double at(int i, int j, int k) const { return values[(std::size_t(i) * side + j) * side + k]; }
};

/// Smallest even size ≥ min_side whose prime factors are in {2,3,5,7}.
int fft_friendly_side(int min_side);

/// Grid side on which the product of fields with radii `a` and `b` is exact on
/// the projector of radius `out` (default a+b): side > a + b + out.
int dealiased_side(int a, int b, int out = -1);

/// Upper bound on grid memory (bytes); exceeding it raises ResourceError.
void set_grid_memory_cap(std::size_t bytes);
std::size_t grid_memory_cap();
/// Version string of the FFT backend.
const char* fft_library_version();

/// FFT bridge between FourierField and GridField for one grid side.
/// Not thread-safe; use `for_side` to get the calling thread's instance.
class SpectralGrid {
public:
    explicit SpectralGrid(int side);
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    static SpectralGrid& for_side(int side);

    int side() const { return side_; }

    /// u(x_j) = Σ_n û(n) e^{in·x_j}. Requires a real field whose cutoff fits the grid.
    GridField to_grid(const FourierField& u);
    /// û(n) = side^{-3} Σ_j u(x_j) e^{-in·x_j}, restricted to the projector of radius `cutoff`.
    FourierField from_grid(const GridField& g, int cutoff, ProjectorShape shape = ProjectorShape::ball);

private:
    void load_spectrum(const FourierField& u);

    int side_;
    double* real_buf_ = nullptr;
    void* spec_buf_ = nullptr;  // fftw_complex*
    void* forward_ = nullptr;   // fftw_plan
    void* backward_ = nullptr;  // fftw_plan
};

}  // namespace hp43
