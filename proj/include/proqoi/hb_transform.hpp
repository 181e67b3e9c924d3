#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace proqoi {

// Dyadic multilevel layout over a 1-D array of length n. Indices are split
// into depth+1 disjoint levels:
//   level 0           the coarsest surviving nodes: multiples of 2^depth
//   level l (1..depth) the midpoints introduced at refinement step l:
//                      odd multiples of 2^(depth-l)
// A midpoint m at level l sits between surviving nodes m-h and m+h with
// h = 2^(depth-l); the right neighbor may fall off the end of the array, in
// which case the left neighbor alone is the prediction.
struct HbLayout {
    std::size_t n = 0;
    int depth = 0;

    // Depth that keeps the coarsest level at <= 64 nodes:
    // max(0, floor(log2(n-1)) - 5).
    static int default_depth(std::size_t n) noexcept;

    explicit HbLayout(std::size_t n, int depth = -1);

    std::size_t level_count() const noexcept { return static_cast<std::size_t>(depth) + 1; }
    // Prediction half-stride of a midpoint level (levels 1..depth).
    std::size_t half_stride(int level) const noexcept {
        return std::size_t{1} << (depth - level);
    }
    std::size_t nodes_at(int level) const noexcept;

    // Visits the indices of one level in ascending order.
    template <class F> void for_each_node(int level, F&& fn) const {
        if (level == 0) {
            const std::size_t s = std::size_t{1} << depth;
            for (std::size_t i = 0; i < n; i += s)
                fn(i);
        } else {
            const std::size_t h = half_stride(level);
            for (std::size_t i = h; i < n; i += 2 * h)
                fn(i);
        }
    }
};

// In-place hierarchical-basis analysis: each midpoint is replaced by its
// linear-interpolation residual value[m] - (value[m-h]+value[m+h])/2 (or
// value[m] - value[m-h] at the right boundary); coarsest nodes keep their
// raw values. Levels are analyzed finest first so every prediction reads
// raw (not yet replaced) parent values.
void hb_forward(std::span<double> values, const HbLayout& layout);
// In-place synthesis, coarsest level first; inverse of hb_forward to within
// one rounding of the prediction addition per element.
void hb_inverse(std::span<double> values, const HbLayout& layout);

// Integer variants used by the bitplane codec: the prediction is the
// floor-mean (a+b)>>1, which the synthesis reproduces bit-for-bit, so the
// integer round trip is exact. With per-level coefficient errors bounded by
// E_l, synthesis error is at most sum_l E_l plus one unit per level (the
// floor-mean of perturbed parents differs from the floor-mean of the true
// parents by at most the mean perturbation plus one).
void hb_forward(std::span<std::int64_t> values, const HbLayout& layout);
void hb_inverse(std::span<std::int64_t> values, const HbLayout& layout);

} // namespace proqoi
