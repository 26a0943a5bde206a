#include "hp43/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hp43 {

int FrequencyIndex::max_abs() const
{
    return std::max({std::abs(x), std::abs(y), std::abs(z)});
}

bool FrequencyIndex::in_lambda() const
{
    if (z != 0) return z > 0;
    if (y != 0) return y > 0;
    return x > 0;
}

std::uint64_t FrequencyIndex::packed() const
{
    // 21 bits per component, offset so that negative values stay distinct.
    constexpr std::int64_t off = 1 << 20;
    auto enc = [](int v) { return std::uint64_t(std::int64_t(v) + off) & 0x1FFFFFu; };
    return (enc(x) << 42) | (enc(y) << 21) | enc(z);
}

bool in_projector(FrequencyIndex n, int cutoff, ProjectorShape shape)
{
    if (cutoff < 0) return false;
    if (shape == ProjectorShape::cube) return n.max_abs() <= cutoff;
    return n.norm2() <= long(cutoff) * cutoff;
}

Lattice::Lattice(int cutoff, ProjectorShape shape) : cutoff_(cutoff), shape_(shape)
{
    if (cutoff < 0) throw std::invalid_argument("lattice cutoff must be nonnegative");
    const int side = 2 * cutoff + 1;
    dense_.assign(std::size_t(side) * side * side, -1);
    for (int a = -cutoff; a <= cutoff; ++a)
        for (int b = -cutoff; b <= cutoff; ++b)
            for (int c = -cutoff; c <= cutoff; ++c) {
                FrequencyIndex n{a, b, c};
                if (!in_projector(n, cutoff, shape)) continue;
                dense_[dense_offset(n)] = std::ptrdiff_t(points_.size());
                points_.push_back(n);
            }
    mirror_.resize(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i)
        mirror_[i] = std::size_t(dense_[dense_offset(-points_[i])]);
}

std::size_t Lattice::dense_offset(FrequencyIndex n) const
{
    const std::size_t side = std::size_t(2 * cutoff_ + 1);
    return (std::size_t(n.x + cutoff_) * side + std::size_t(n.y + cutoff_)) * side + std::size_t(n.z + cutoff_);
}

bool Lattice::contains(FrequencyIndex n) const
{
    return in_projector(n, cutoff_, shape_);
}

std::ptrdiff_t Lattice::find(FrequencyIndex n) const
{
    if (n.max_abs() > cutoff_) return -1;
    return dense_[dense_offset(n)];
}

std::shared_ptr<const Lattice> Lattice::get(int cutoff, ProjectorShape shape)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const Lattice>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(cutoff, int(shape));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto lattice = std::make_shared<const Lattice>(cutoff, shape);
    cache.emplace(key, lattice);
    return lattice;
}

}  // namespace hp43
