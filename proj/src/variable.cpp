#include "proqoi/variable.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace proqoi {

VariableData VariableData::from_values(std::string name, std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("variable '" + name + "' has no elements");
    double lo = values[0];
    double hi = values[0];
    for (double v : values) {
        if (std::isnan(v))
            throw std::invalid_argument("variable '" + name + "' contains NaN");
        if (v < lo)
            lo = v;
        if (v > hi)
            hi = v;
    }
    VariableData d;
    d.name = std::move(name);
    d.values = std::move(values);
    d.vmin = lo;
    d.vmax = hi;
    return d;
}

std::size_t OutlierMask::count() const noexcept {
    std::size_t c = 0;
    for (std::uint8_t b : bits_)
        c += static_cast<std::size_t>(std::popcount(b));
    return c;
}

OutlierMask OutlierMask::from_packed(std::span<const std::uint8_t> bytes, std::size_t n) {
    if (bytes.size() != (n + 7) / 8)
        throw std::invalid_argument("packed mask length does not match element count");
    OutlierMask m(n);
    std::copy(bytes.begin(), bytes.end(), m.bits_.begin());
    // Clear any stray bits beyond n.
    if (n % 8 != 0 && !m.bits_.empty())
        m.bits_.back() &= static_cast<std::uint8_t>((1u << (n % 8)) - 1u);
    return m;
}

OutlierMask build_mask(std::span<const VariableData> vars,
                       const std::function<bool(std::span<const double>)>& predicate) {
    if (vars.empty())
        throw std::invalid_argument("build_mask requires at least one variable");
    const std::size_t n = vars[0].size();
    for (const auto& v : vars)
        if (v.size() != n)
            throw std::invalid_argument("build_mask requires equal-length variables");
    OutlierMask m(n);
    std::vector<double> tuple(vars.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < vars.size(); ++k)
            tuple[k] = vars[k].values[i];
        if (predicate(tuple))
            m.set(i);
    }
    return m;
}

OutlierMask build_mask(std::span<const VariableData> vars) {
    return build_mask(vars, [](std::span<const double> tuple) {
        for (double v : tuple)
            if (v != 0.0)
                return false;
        return true;
    });
}

MaskedStats masked_stats(const VariableData& var, const OutlierMask* mask) {
    if (mask && mask->size() != var.size())
        throw std::invalid_argument("mask length does not match variable length");
    bool any = false;
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < var.size(); ++i) {
        if (mask && mask->test(i))
            continue;
        const double v = var.values[i];
        if (!any) {
            lo = hi = v;
            any = true;
        } else {
            if (v < lo)
                lo = v;
            if (v > hi)
                hi = v;
        }
    }
    if (!any) {
        const double c = mask ? mask->constant : 0.0;
        return {c, c, 0};
    }
    std::size_t unmasked = var.size() - (mask ? mask->count() : 0);
    return {lo, hi, unmasked};
}

} // namespace proqoi
