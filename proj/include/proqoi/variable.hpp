#ifndef PROQOI_VARIABLE_HPP
#define PROQOI_VARIABLE_HPP

/**
 * @file variable.hpp
 * In-memory variable arrays and the shared outlier mask. Masked points are
 * excluded from encoding statistics and are reconstructed exactly as the
 * mask constant, so they never contribute reconstruction error.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace proqoi {

struct VariableData {
    std::string name;
    std::vector<double> values;
    double vmin = 0.0; // over all points
    double vmax = 0.0;

    /// Validates: at least one element, no NaN. Records min/max.
    static VariableData from_values(std::string name, std::vector<double> values);

    std::size_t size() const noexcept { return values.size(); }
    double range() const noexcept { return vmax - vmin; }
};

/// Bitmap over element indices; set bits mark outlier points that are stored
/// exactly as `constant`. Packed little-endian, LSB-first within each byte.
class OutlierMask {
public:
    OutlierMask() = default;
    explicit OutlierMask(std::size_t n) : n_(n), bits_((n + 7) / 8, 0) {}

    std::size_t size() const noexcept { return n_; }
    bool test(std::size_t i) const { return (bits_[i >> 3] >> (i & 7)) & 1u; }
    void set(std::size_t i, bool v = true) {
        const std::uint8_t m = static_cast<std::uint8_t>(1u << (i & 7));
        if (v)
            bits_[i >> 3] |= m;
        else
            bits_[i >> 3] &= static_cast<std::uint8_t>(~m);
    }
    std::size_t count() const noexcept;

    const std::vector<std::uint8_t>& packed() const noexcept { return bits_; }
    static OutlierMask from_packed(std::span<const std::uint8_t> bytes, std::size_t n);

    double constant = 0.0;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Marks every index where the predicate holds on the tuple of values across
/// the listed variables. All variables must share one length.
OutlierMask build_mask(std::span<const VariableData> vars,
                       const std::function<bool(std::span<const double>)>& predicate);

/// Default predicate: the point is masked when every listed variable is
/// exactly zero there. Mask constant is 0.
OutlierMask build_mask(std::span<const VariableData> vars);

/// Min/max over unmasked points; when a mask covers everything the stats
/// collapse to the mask constant (range 0).
struct MaskedStats {
    double vmin;
    double vmax;
    std::size_t unmasked;
    double range() const noexcept { return vmax - vmin; }
    double midpoint() const noexcept { return (vmin + vmax) / 2.0; }
};
MaskedStats masked_stats(const VariableData& var, const OutlierMask* mask);

} // namespace proqoi

#endif // PROQOI_VARIABLE_HPP
