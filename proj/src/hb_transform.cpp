#include "proqoi/hb_transform.hpp"

#include <bit>
#include <stdexcept>

namespace proqoi {

int HbLayout::default_depth(std::size_t n) noexcept {
    if (n < 2)
        return 0;
    const int log2_floor = std::bit_width(n - 1) - 1;
    return log2_floor > 5 ? log2_floor - 5 : 0;
}

HbLayout::HbLayout(std::size_t n_, int depth_) : n(n_), depth(depth_) {
    if (n == 0)
        throw std::invalid_argument("multilevel layout requires at least one element");
    if (depth < 0)
        depth = default_depth(n);
    if (depth >= 62)
        throw std::invalid_argument("multilevel depth out of range");
}

std::size_t HbLayout::nodes_at(int level) const noexcept {
    if (level == 0) {
        const std::size_t s = std::size_t{1} << depth;
        return (n - 1) / s + 1;
    }
    const std::size_t h = half_stride(level);
    if (n <= h)
        return 0;
    return (n - h - 1) / (2 * h) + 1;
}

namespace {

// Finest level first: a level-l midpoint predicts from nodes of levels
// l-1 and coarser, which must still hold raw values when it is visited.
template <class T, class Predict>
void analyze(std::span<T> values, const HbLayout& layout, Predict predict) {
    for (int level = layout.depth; level >= 1; --level) {
        const std::size_t h = layout.half_stride(level);
        for (std::size_t m = h; m < layout.n; m += 2 * h) {
            const T left = values[m - h];
            const T pred = (m + h < layout.n) ? predict(left, values[m + h]) : left;
            values[m] = values[m] - pred;
        }
    }
}

// Coarsest level first: predictions need the parents already synthesized.
template <class T, class Predict>
void synthesize(std::span<T> values, const HbLayout& layout, Predict predict) {
    for (int level = 1; level <= layout.depth; ++level) {
        const std::size_t h = layout.half_stride(level);
        for (std::size_t m = h; m < layout.n; m += 2 * h) {
            const T left = values[m - h];
            const T pred = (m + h < layout.n) ? predict(left, values[m + h]) : left;
            values[m] = values[m] + pred;
        }
    }
}

inline double mean_d(double a, double b) { return (a + b) / 2.0; }
inline std::int64_t floor_mean_i(std::int64_t a, std::int64_t b) { return (a + b) >> 1; }

} // namespace

void hb_forward(std::span<double> values, const HbLayout& layout) {
    if (values.size() != layout.n)
        throw std::invalid_argument("value count does not match layout");
    analyze(values, layout, mean_d);
}

void hb_inverse(std::span<double> values, const HbLayout& layout) {
    if (values.size() != layout.n)
        throw std::invalid_argument("value count does not match layout");
    synthesize(values, layout, mean_d);
}

void hb_forward(std::span<std::int64_t> values, const HbLayout& layout) {
    if (values.size() != layout.n)
        throw std::invalid_argument("value count does not match layout");
    analyze(values, layout, floor_mean_i);
}

void hb_inverse(std::span<std::int64_t> values, const HbLayout& layout) {
    if (values.size() != layout.n)
        throw std::invalid_argument("value count does not match layout");
    synthesize(values, layout, floor_mean_i);
}

} // namespace proqoi
