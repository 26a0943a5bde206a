#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace hp43 {

/// Lattice frequency n ∈ ℤ³.
struct FrequencyIndex {
    int x = 0;
    int y = 0;
    int z = 0;

    constexpr long norm2() const { return long(x) * x + long(y) * y + long(z) * z; }
    double norm() const { return std::sqrt(double(norm2())); }
    int max_abs() const;

    /// ⟨n⟩ = (1+|n|²)^{1/2}
    double bracket() const { return std::sqrt(1.0 + double(norm2())); }
    double bracket2() const { return 1.0 + double(norm2()); }
    /// ⟪n⟫ = (3/4+|n|²)^{1/2}, the damped-wave frequency.
    double wave_frequency() const { return std::sqrt(0.75 + double(norm2())); }

    constexpr FrequencyIndex operator-() const { return {-x, -y, -z}; }
    constexpr FrequencyIndex operator+(FrequencyIndex o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr FrequencyIndex operator-(FrequencyIndex o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr bool operator==(const FrequencyIndex&) const = default;
    constexpr auto operator<=>(const FrequencyIndex&) const = default;

    bool is_zero() const { return x == 0 && y == 0 && z == 0; }

    /// Membership in Λ: the last nonzero component is positive. ℤ³ = Λ ∪ (−Λ) ∪ {0}.
    bool in_lambda() const;

    /// Stable 64-bit code, independent of any cutoff.
    std::uint64_t packed() const;
};

enum class ProjectorShape { ball, cube };

/// Immutable enumeration of {|n| ≤ N} (or {|n|_∞ ≤ N}) in lexicographic order.
/// Instances are shared and cached per (cutoff, shape).
class Lattice {
public:
    static std::shared_ptr<const Lattice> get(int cutoff, ProjectorShape shape = ProjectorShape::ball);

    int cutoff() const { return cutoff_; }
    ProjectorShape shape() const { return shape_; }
    std::size_t size() const { return points_.size(); }
    std::span<const FrequencyIndex> points() const { return points_; }
    const FrequencyIndex& operator[](std::size_t i) const { return points_[i]; }

    bool contains(FrequencyIndex n) const;
    /// Position of n, or -1 when n lies outside the lattice.
    std::ptrdiff_t find(FrequencyIndex n) const;
    /// Position of −n for the point stored at i.
    std::size_t mirror(std::size_t i) const { return mirror_[i]; }

    Lattice(int cutoff, ProjectorShape shape);

private:
    std::size_t dense_offset(FrequencyIndex n) const;

    int cutoff_;
    ProjectorShape shape_;
    std::vector<FrequencyIndex> points_;
    std::vector<std::size_t> mirror_;
    std::vector<std::ptrdiff_t> dense_;
};

bool in_projector(FrequencyIndex n, int cutoff, ProjectorShape shape);

}  // namespace hp43
